#include "doctest.h"

#include "crit4/coupling.hpp"
#include "crit4/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace crit4::coupling;
using crit4::trees::GenealogyTree;

namespace {
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}
}  // namespace

TEST_CASE("discrete quantiles") {
    CHECK(binomial_half_quantile(0.5, 10) == 5);
    CHECK(binomial_half_quantile(1e-9, 10) == 0);
    CHECK(binomial_half_quantile(1 - 1e-12, 10) == 10);
    CHECK(hypergeometric_quantile(0.5, 10, 10, 5) == 5);
    CHECK(hypergeometric_quantile(0.5, 10, 0, 5) == 0);
    CHECK(hypergeometric_quantile(0.999999, 8, 6, 4) == 4);
}

TEST_CASE("single vertex couples exactly") {
    auto r = couple(GenealogyTree(), Increments::GaussianSubordinated, 1, 0);
    CHECK(r.sup_error == 0.0);
    CHECK(r.bound_proxy == 0.0);
    auto l = couple(GenealogyTree(), Increments::LatticeNN, 1, 0);
    CHECK(l.sup_error == 0.0);
}

TEST_CASE("path of length 2^10") {
    auto t = GenealogyTree::path(1025);
    std::vector<double> sup;
    for (int s = 0; s < 100; ++s) sup.push_back(couple(t, Increments::GaussianSubordinated, 17, s).sup_error);
    std::nth_element(sup.begin(), sup.begin() + 50, sup.end());
    CHECK(std::isfinite(sup[50]));
    CHECK(sup[50] <= 8 * std::log(1 + 1024.0));
}

TEST_CASE("welded fields: lattice steps are nearest-neighbour") {
    auto t = GenealogyTree::perfect_binary(5);
    CoupledFields f;
    couple(t, Increments::LatticeNN, 3, 1, &f);
    for (int v = 1; v < t.size(); ++v) {
        double l1 = 0;
        for (int i = 0; i < 4; ++i) l1 += std::abs(f.S[v][i] - f.S[t.parent(v)][i]) / 2;
        CHECK(l1 == doctest::Approx(1.0));
    }
}

TEST_CASE("coupling marginals along a root-leaf path") {
    // leaf at depth 4 in a perfect binary tree; its value is a 4-step walk
    auto t = GenealogyTree::perfect_binary(5);
    const int leaf = t.size() - 1;
    const int depth = t.depth_of(leaf);
    const int N = 10000;
    for (auto inc : {Increments::GaussianSubordinated, Increments::LatticeNN}) {
        std::vector<double> welded, direct;
        crit4::Rng rng(99, 0);
        for (int s = 0; s < N; ++s) {
            CoupledFields f;
            couple(t, inc, 5, s, &f);
            welded.push_back(f.S[leaf][0]);
            double x = 0;
            for (int k = 0; k < depth; ++k) {
                if (inc == Increments::GaussianSubordinated) {
                    double e = rng.exponential();
                    x += std::sqrt(e) * rng.normal();
                } else {
                    auto u = rng() & 7u;
                    if ((u >> 1) == 0) x += (u & 1) ? 2.0 : -2.0;
                }
            }
            direct.push_back(x);
        }
        double d = ks_two_sample(welded, direct);
        CHECK(d < 1.628 * std::sqrt(2.0 / N));
    }
}

TEST_CASE("bound proxy") {
    auto t = GenealogyTree::perfect_binary(3);
    auto r = couple(t, Increments::GaussianSubordinated, 1, 0);
    CHECK(r.H == 3);
    CHECK(r.depth == 2);
    CHECK(r.leaves == 4);
    CHECK(r.bound_proxy == doctest::Approx(3 * std::log(3.0) + std::log(4.0)));
}
