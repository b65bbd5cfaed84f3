#include "doctest.h"

#include "crit4/branching.hpp"
#include "crit4/rng.hpp"

#include <cmath>
#include <numeric>

using namespace crit4::branching;

TEST_CASE("Philox4x32-10 known answers") {
    using crit4::Philox;
    CHECK(Philox::block({0, 0, 0, 0}, 0, 0) == Philox::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, 0xffffffff, 0xffffffff) ==
          Philox::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, 0xa4093822, 0x299f31d0) ==
          Philox::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("replica streams are distinct and reproducible") {
    crit4::Rng a(7, 1), b(7, 1), c(7, 2), d(8, 1);
    auto x = a(), y = b(), z = c(), w = d();
    CHECK(x == y);
    CHECK(x != z);
    CHECK(x != w);
    crit4::Rng u(1, 0);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double g = u.normal();
        s += g;
        s2 += g * g;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1) < 0.02);
}

TEST_CASE("start on the target sphere freezes immediately") {
    SimConfig cfg;
    cfg.n_replicas = 50;
    SphereGeometry g;
    g.start_radius = 1.0;
    g.target_radius = 1.0;
    g.kill_radius = 1.0;
    auto t = run_bbm_pioneers(g, cfg);
    CHECK(t.counts.size() == 1);
    CHECK(t.counts.at(1) == 50);
    CHECK(t.mean_count().value == 1.0);
}

TEST_CASE("annulus resolution check") {
    SimConfig cfg;
    cfg.dt = 1e-2;
    SphereGeometry g;
    g.start_radius = 1.5;
    g.target_radius = 1.0;
    g.kill_radius = 1.5;
    CHECK_THROWS(run_bbm_pioneers(g, cfg));
    cfg.n_replicas = 0;
    g.kill_radius = 3.0;
    CHECK_THROWS(run_bbm_pioneers(g, cfg));
}

TEST_CASE("tally is independent of the thread partition") {
    SimConfig cfg;
    cfg.n_replicas = 400;
    cfg.seed = 11;
    SphereGeometry g;
    g.start_radius = 3;
    g.target_radius = 1;
    g.kill_radius = 10;
    auto a = run_bbm_pioneers(g, cfg);
    cfg.threads = 3;
    auto b = run_bbm_pioneers(g, cfg);
    CHECK(a.counts == b.counts);
    CHECK(a.particle_steps == b.particle_steps);
    // monotone tail probabilities
    for (std::uint64_t k = 1; k < 20; ++k) CHECK(a.tail_prob(k + 1) <= a.tail_prob(k));
    std::uint64_t tot = 0;
    for (auto& [k, c] : a.counts) tot += c;
    CHECK(tot == a.n_replicas);
}

TEST_CASE("first moment matches the harmonic formula") {
    SimConfig cfg;
    cfg.n_replicas = 20000;
    cfg.seed = 3;
    SphereGeometry g;
    g.start_radius = 2;
    g.target_radius = 1;
    g.kill_radius = 4;
    auto t = run_bbm_pioneers(g, cfg);
    auto m = t.mean_count();
    double exact = harmonic_first_moment(2, 1, 4);
    CHECK(std::abs(m.value - exact) <= 3 * m.stderr_);
    CHECK(harmonic_first_moment(1, 1, 4) == doctest::Approx(1.0));
}

TEST_CASE("weighted sums") {
    PioneerTally t;
    t.counts = {{0, 2}, {2, 2}};
    t.n_replicas = 4;
    CHECK(t.weighted_sum(0.0).value == 1.0);
    CHECK(t.weighted_sum(0.5).value == doctest::Approx(0.625));
    CHECK(t.hit_indicator_mean().value == 0.5);
    double ess = 0;
    t.weighted_sum(0.5, &ess);
    CHECK(ess == doctest::Approx(1.25 * 1.25 * 4 / (2 + 2 * 0.0625)));
}

TEST_CASE("psi") {
    CHECK(psi(1, INFINITY) == doctest::Approx(1.0));
    CHECK(psi(8, INFINITY) == doctest::Approx(6.0));
    CHECK(psi(8, 1) == doctest::Approx(8.0));
    CHECK(psi(2, INFINITY) == doctest::Approx(2.0));
    for (double a : {0.5, 3.0, 8.0, 20.0}) CHECK(psi(a, INFINITY) <= psi(a, 1) + 1e-15);
    CHECK_THROWS(psi(0, 2));
    CHECK_THROWS(psi(1, 0.5));
}

TEST_CASE("Green kernel from the heat kernel") {
    for (double rho : {0.5, 1.0, 3.0}) CHECK(green_from_heat_kernel(rho) == doctest::Approx(1 / (2 * M_PI * M_PI * rho * rho)).epsilon(1e-9));
}

TEST_CASE("m1 by quadrature and Monte Carlo") {
    const double e1[4] = {1, 0, 0, 0};
    const double y[4] = {0.5, -0.5, 0.5, 0.5};
    double q1 = m1_quadrature(e1), q2 = m1_quadrature(y);
    CHECK(q1 == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(q1 - q2) <= 1e-10);
    double se = 0;
    double mc = m1_monte_carlo(2000000, 5, &se);
    CHECK(std::abs(mc - 0.25) <= 4 * se);
}

TEST_CASE("lattice walk: one-vertex tree") {
    BrwOptions opt;
    opt.condition_on_survival = false;
    // find a replica whose root has no children
    for (std::uint64_t r = 0; r < 64; ++r) {
        auto f = run_brw_replica(4, {1.0}, 1, r, opt);
        if (f.tree_size != 1) continue;
        REQUIRE(f.sites.size() == 1);
        CHECK(f.sites[0].second == 1);
        CHECK(f.max_local_time == 1);
        return;
    }
    FAIL("no childless root in 64 replicas");
}

TEST_CASE("lattice walk: local times sum to the tree size") {
    for (std::uint64_t r = 0; r < 5; ++r) {
        auto f = run_brw_replica(8, {0.5, 1.0}, 2, r, {});
        std::uint64_t s = 0;
        for (auto& [site, l] : f.sites) s += l;
        CHECK(s == f.tree_size);
        CHECK(f.thick_counts[0] >= f.thick_counts[1]);
        CHECK(f.attempts >= 1);
    }
    CHECK(thick_threshold(1.0, std::exp(2.0)) == doctest::Approx(16 * 0.25 / (M_PI * M_PI) * 4));
}

TEST_CASE("scale invariance at s=0 is trivial") {
    SimConfig cfg;
    cfg.n_replicas = 200;
    auto r = scale_invariance_check(0.0, 0.5, 4, 8, cfg);
    CHECK(r.value1 == 0.0);
    CHECK(r.value2 == 0.0);
    CHECK(r.pass);
}
