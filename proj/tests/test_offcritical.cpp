#include "doctest.h"

#include "crit4/offcritical.hpp"

#include <cmath>

using namespace crit4::offcritical;

TEST_CASE("correction exponent") {
    CHECK(beta_of(1) == doctest::Approx(1.0));
    CHECK(beta_of(2) == doctest::Approx(0.8284271247));
    CHECK(beta_of(3) == doctest::Approx(0.5615528128));
    CHECK(beta_of(5) == doctest::Approx(1.0));
    CHECK(beta_of(7) == doctest::Approx(3.0));
    CHECK_THROWS(beta_of(4));
    CHECK_THROWS(beta_of(0));
}

TEST_CASE("alpha sequence and its bound") {
    auto t = alpha_seq(5, 10);
    CHECK(t.alphas[0] == 0.0);
    CHECK(t.alphas[1] == 1.0);
    CHECK(t.alphas[2] == doctest::Approx(0.25));
    CHECK(t.alphas[3] == doctest::Approx(0.05));
    for (int d : {1, 2, 3, 5, 6, 7, 8}) {
        auto a = alpha_seq(d, 50);
        CHECK(a.bound_holds);
        for (int l = 1; l <= 50; ++l) CHECK(a.alphas[l] <= alpha_bound(a.params, l) * (1 + 1e-12));
    }
    CHECK(alpha_seq(2, 4).alphas[0] == 4.0);
}

TEST_CASE("series root for d=5") {
    auto t = alpha_seq(5, 256);
    double mu = mu_s_highdim(5, 1.0, t);
    CHECK(mu == doctest::Approx(0.806655283150875).epsilon(1e-13));
    CHECK(std::abs(power_sum(t, mu) - 1.0) <= 1e-12);
    CHECK(mu_s_highdim(5, 0.5, t) == doctest::Approx(0.445561141366).epsilon(1e-11));
    CHECK(mu_s_highdim(5, 0.0, t) == 0.0);
}

TEST_CASE("b roots") {
    auto [b1, b2] = b_roots(6.0);
    CHECK(b1 == doctest::Approx(2.0));
    CHECK(b2 == doctest::Approx(3.0));
    for (int d : {1, 2, 3}) {
        double g = params_of(d).gamma;
        auto [r1, r2] = b_roots(g);
        CHECK(std::abs(r1 + r2 - (g - 1)) <= 1e-12);
        CHECK(std::abs(r1 * r2 - g) <= 1e-12);
    }
}

TEST_CASE("low-dimensional f_mu and its root") {
    crit4::ode::SolveConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-15;
    auto p = params_of(2);
    CHECK(f_mu_at(p, -1, 1.0, cfg) == doctest::Approx(3.1595).epsilon(1e-4));
    CHECK(f_mu_at(p, -10, 1.0, cfg) == doctest::Approx(0.7794).epsilon(1e-4));
    CHECK(f_mu_at(p, -100, 1.0, cfg) == doctest::Approx(0.01906).epsilon(1e-3));
    CHECK(f_mu_at(p, 0, 1.0, cfg) == 4.0);
    double expected[] = {-17.3938769134, -7.9208385738, -1.6703793085};
    for (int d = 1; d <= 3; ++d)
        CHECK(mu_of_s_lowdim(params_of(d), 1.0, cfg) == doctest::Approx(expected[d - 1]).epsilon(1e-8));
}

TEST_CASE("hitting series solves the radial equation") {
    for (int d : {1, 2, 3, 5, 6}) {
        for (int i = 0; i < 20; ++i) {
            double r = std::pow(10.0, 0.1 * i) * (d >= 5 ? 1.05 : 3.0);
            auto v = hitting_series_full(d, 1.0, r);
            double res = v.d2v + (d - 1) / r * v.dv - v.v * v.v;
            CHECK(std::abs(res) <= 1e-7 * std::max(1.0, v.v * v.v));
        }
    }
    CHECK(hitting_series(5, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hitting_series(5, 1.0, 10.0) == doctest::Approx(0.00082318891976).epsilon(1e-9));
    CHECK(hitting_series(3, 0.0, 5.0) == 0.0);
    CHECK_THROWS_AS(hitting_series(5, 1.0, 0.5), DivergenceRegion);
}

TEST_CASE("far-field behaviour r^2 v -> 8-2d") {
    CHECK(1e6 * hitting_series(1, 1.0, 1e3) == doctest::Approx(5.98264).epsilon(1e-5));
    CHECK(1e6 * hitting_series(2, 1.0, 1e3) == doctest::Approx(3.97421).epsilon(1e-5));
    CHECK(1e6 * hitting_series(3, 1.0, 1e3) == doctest::Approx(1.96592).epsilon(1e-5));
}
