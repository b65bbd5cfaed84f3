#include "doctest.h"

#include "crit4/trees.hpp"

#include <cmath>
#include <map>
#include <sstream>

using namespace crit4::trees;

namespace {
std::string shape(const GenealogyTree& t) {
    std::string s;
    std::vector<int> st{0};
    while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        s += char('0' + t.children(v).size());
        const auto& ch = t.children(v);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) st.push_back(*it);
    }
    return s;
}
}  // namespace

TEST_CASE("Horton-Strahler fixtures") {
    CHECK(horton_strahler(GenealogyTree()) == 1);
    CHECK(horton_strahler(GenealogyTree::path(10)) == 1);
    CHECK(horton_strahler(GenealogyTree::perfect_binary(4)) == 4);
    CHECK(GenealogyTree::perfect_binary(4).size() == 15);
    // caterpillar: max attained once at every branching
    CHECK(horton_strahler(GenealogyTree({-1, 0, 0, 1, 1, 3, 3})) == 2);
}

TEST_CASE("tree validation and cached statistics") {
    CHECK_THROWS_AS(GenealogyTree({0}), InvalidTree);
    CHECK_THROWS_AS(GenealogyTree({-1, 2, 1}), InvalidTree);
    GenealogyTree t({-1, 0, 0, 1});
    CHECK(t.depth() == 2);
    CHECK(t.leaves() == 2);
    CHECK(t.depth_of(3) == 2);
}

TEST_CASE("parent-array round trip") {
    auto t = GenealogyTree::perfect_binary(3);
    std::stringstream ss;
    t.write(ss);
    auto u = GenealogyTree::read(ss);
    CHECK(u.parents() == t.parents());
    std::stringstream bad("0 -1\n1 x\n");
    try {
        GenealogyTree::read(bad);
        FAIL("expected a parse error");
    } catch (const InvalidTree& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("size-conditioned sampling") {
    SampleRequest req;
    req.condition = Condition::Size;
    req.n = 1;
    CHECK(sample_bgw(req, 1, 0).size() == 1);
    req.n = 2;
    CHECK_THROWS_AS(sample_bgw(req, 1, 0), std::invalid_argument);
    req.n = 101;
    for (int i = 0; i < 20; ++i) {
        auto t = sample_bgw(req, 4, i);
        CHECK(t.size() == 101);
        for (int v = 0; v < t.size(); ++v) CHECK((t.children(v).size() == 0 || t.children(v).size() == 2));
    }
    req.n = 1001;
    req.max_attempts = 3;
    CHECK_THROWS_AS(sample_bgw(req, 1, 0), AttemptCapReached);
}

TEST_CASE("parity: binary total progeny is always odd") {
    for (int n = 1; n <= 5; ++n) {
        for (const auto& t : enumerate_trees(n)) {
            bool binary = true;
            for (int v = 0; v < t.size(); ++v)
                if (t.children(v).size() == 1 || t.children(v).size() > 2) binary = false;
            if (binary) CHECK(n % 2 == 1);
        }
    }
}

TEST_CASE("n=7 shapes are uniform") {
    SampleRequest req;
    req.condition = Condition::Size;
    req.n = 7;
    std::map<std::string, int> freq;
    const int N = 100000;
    for (int i = 0; i < N; ++i) ++freq[shape(sample_bgw(req, 9, i))];
    CHECK(freq.size() == 5);  // Catalan(3)
    double chi2 = 0, e = N / 5.0;
    for (auto& [s, c] : freq) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 13.277);  // 1% critical value, 4 degrees of freedom
}

TEST_CASE("survival conditioning") {
    SampleRequest req;
    req.condition = Condition::Survive;
    req.n = 10;
    for (int i = 0; i < 10; ++i) CHECK(sample_bgw(req, 2, i).depth() >= 10);
}

TEST_CASE("highways: simple shapes") {
    auto p = highways(GenealogyTree::path(10));
    CHECK(p.rounds == 1);
    CHECK(p.paths.size() == 1);
    CHECK(p.paths[0].size() == 10);
    auto b = highways(GenealogyTree::perfect_binary(4));
    CHECK(b.rounds == 4);
    auto one = highways(GenealogyTree());
    CHECK(one.rounds == 1);
}

TEST_CASE("highways: exhaustive over small trees") {
    int checked = 0;
    for (int n = 1; n <= 9; ++n) {
        for (const auto& t : enumerate_trees(n)) {
            auto h = highways(t);
            int H = horton_strahler(t);
            auto a = audit_highways(t, h);
            CHECK(h.rounds == H);
            CHECK(a.edge_disjoint_cover);
            CHECK(a.monotone);
            CHECK(a.max_paths_per_geodesic <= H);
            CHECK(H <= std::ceil(std::log2(n + 1.0)));
            ++checked;
        }
    }
    CHECK(checked == 1 + 1 + 2 + 5 + 14 + 42 + 132 + 429 + 1430);
}

TEST_CASE("highways: random critical trees") {
    SampleRequest req;
    req.max_vertices = 200000;
    int ok = 0;
    for (int i = 0; i < 10000; ++i) {
        GenealogyTree t;
        try {
            t = sample_bgw(req, 21, i);
        } catch (const std::runtime_error&) {
            continue;  // larger than the vertex cap
        }
        auto h = highways(t);
        int H = horton_strahler(t);
        auto a = audit_highways(t, h);
        bool good = h.rounds == H && a.edge_disjoint_cover && a.monotone && a.max_paths_per_geodesic <= H &&
                    H <= std::ceil(std::log2(t.size() + 1.0));
        if (good) ++ok;
        else CHECK(good);
    }
    CHECK(ok >= 9950);
}

TEST_CASE("Horton-Strahler statistics") {
    auto rows = hs_statistics({65, 513}, 200, 5);
    REQUIRE(rows.size() == 2);
    for (auto& r : rows) {
        CHECK(r.mean_ratio > 0.3);
        CHECK(r.mean_ratio < 1.0);
        CHECK(r.q10 <= r.q50);
        CHECK(r.q50 <= r.q90);
    }
    CHECK_THROWS(hs_statistics({1}, 10, 1));
}
