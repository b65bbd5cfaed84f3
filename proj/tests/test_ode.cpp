#include "doctest.h"

#include "crit4/ode.hpp"

#include <cmath>

using namespace crit4::ode;

namespace {
Trajectory solve(double lambda, double x_max) { return solve_g_lambda({lambda, x_max, Direction::ForwardG}, {}); }
}  // namespace

TEST_CASE("zero slope gives the zero solution") {
    auto t = solve(0.0, 10);
    for (size_t i = 0; i < t.xs.size(); ++i) {
        CHECK(t.g[i] == 0.0);
        CHECK(t.gp[i] == 0.0);
    }
    CHECK_FALSE(t.blowup_at);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(solve(-0.1, 10), std::invalid_argument);
    CHECK_THROWS(solve_g_lambda({0.5, 10, Direction::ForwardH}, {}));
}

TEST_CASE("value at x=1000 for lambda=0.5") {
    auto t = solve(0.5, 1000);
    // frozen solver output, consistent with -2/x + (2 log x + C)/x^2 at the figure constant
    CHECK(t.at(1000).g == doctest::Approx(-1.976954368e-3).epsilon(1e-8));
    CHECK(std::abs(t.at(1000).g - (-1.977e-3)) < 1e-5);
}

TEST_CASE("residual and small-lambda bounds") {
    for (double lambda : {0.3, 0.5, 1.5}) {
        auto t = solve(lambda, 200);
        CHECK_FALSE(t.blowup_at);
        CHECK(t.max_residual(0.05) <= 10 * SolveConfig{}.rel_tol);
        double gmax = 0, gpmax = 0;
        for (size_t i = 0; i < t.xs.size(); ++i) {
            CHECK(t.g[i] <= 0.0);
            gmax = std::max(gmax, std::abs(t.g[i]));
            gpmax = std::max(gpmax, std::abs(t.gp[i]));
            // Gronwall lower envelope
            CHECK(t.g[i] >= -lambda / 2 * (1 - std::exp(-2 * t.xs[i])) - 1e-12);
        }
        CHECK(gmax <= lambda / 2);
        CHECK(gpmax <= 2 * lambda);
    }
}

TEST_CASE("monotone in lambda") {
    auto a = solve(0.3, 100), b = solve(0.6, 100);
    for (double x = 0.5; x <= 100; x += 0.5) CHECK(b.at(x).g < a.at(x).g);
}

TEST_CASE("small-lambda profile") {
    for (double lambda : {0.02, 0.01}) {
        auto t = solve(lambda, 4.5 / lambda);
        for (double s : {1.0, 2.0, 4.0}) {
            double x = s / lambda;
            double ref = -2 * lambda / (lambda * x + 4);
            CHECK(std::abs(t.at(x).g / ref - 1) <= 0.1);
        }
    }
}

TEST_CASE("first-order tail") {
    for (double lambda : {0.3, 0.6, 1.0}) {
        double v = 1000 * solve(lambda, 1000).at(1000).g;
        CHECK(v >= -2.2);
        CHECK(v <= -1.8);
    }
}

TEST_CASE("phase markers at lambda=1e-3") {
    const double lambda = 1e-3;
    auto t = solve(lambda, 60);
    auto pm = phase_markers(t);
    CHECK(std::abs(pm.x0 - 0.5 * std::log(8 / lambda)) <= 0.05);
    double g0 = t.at(pm.x0).g;
    CHECK(g0 >= -5.0e-4);
    CHECK(g0 <= -4.95e-4);
    CHECK(pm.x1 > pm.x0);
    CHECK(pm.x1 - pm.x0 <= 0.5 * std::log(1 / lambda) + 5);
    // unimodality
    for (double x = 0.05; x < pm.x0 - 0.01; x += 0.05) CHECK(t.at(x).gp < 0);
    for (double x = pm.x0 + 0.01; x < 60; x += 0.1) CHECK(t.at(x).gp > 0);
    CHECK_THROWS_AS(phase_markers(solve(lambda, 5.0)), HorizonTooShort);
}

TEST_CASE("delta decays like 4/x^3") {
    auto t = solve(0.5, 600);
    auto pm = phase_markers(t, {500.0});
    REQUIRE(pm.delta_samples.size() == 1);
    CHECK(std::abs(pm.delta_samples[0].second * std::pow(500.0, 3) / 4 - 1) <= 0.15);
    for (double x = pm.x1 + 0.1; x < 600; x += 5) {
        auto p = t.at(x);
        CHECK(2 * p.gp - p.g * p.g >= -1e-12);
    }
}

TEST_CASE("h tail from the P expansion") {
    auto h = solve_h_tail(200, 3, {});
    CHECK(std::abs(h.traj.at(200).g - 1.02649e-2) <= 2e-4);
    for (const auto& p : h.traj.sample(0.5)) {
        if (p.x < h.valid_from) continue;
        double h3 = 2 * p.g * p.gp + 2 * p.gpp;  // derivative of h''=h^2+2h'
        CHECK(p.g > 0);
        CHECK(p.gp < 0);
        CHECK(p.gpp > 0);
        CHECK(h3 < 0);
    }
    auto far = solve_h_tail(1000, 3, {});
    double prev = 1e9;
    for (double x : {200.0, 400.0, 800.0}) {
        double v = x * far.traj.at(x).g;
        CHECK(std::abs(v - 2) <= 0.2);
        CHECK(std::abs(v - 2) < prev);
        prev = std::abs(v - 2);
    }
}

TEST_CASE("finite-volume hitting BVP") {
    auto t = solve_h_bvp(1.0, 5.0, {});
    CHECK(t.at(0.0).g == doctest::Approx(1.0));
    CHECK(std::abs(t.at(5.0).g) < 1e-8);
    CHECK(std::exp(-4.0) * t.at(2.0).g == doctest::Approx(0.0102272).epsilon(1e-4));
}

TEST_CASE("positivity predicate and threshold") {
    CHECK_FALSE(becomes_positive(1.5, 100, {}));
    CHECK(becomes_positive(150, 100, {}));
    auto th = positivity_threshold(8, 14, 0.05, {});
    CHECK(std::abs(th.value - 11.2) <= 0.3);
    CHECK(th.bracket_width <= 0.05);
    CHECK_THROWS(positivity_threshold(1.0, 1.5, 0.05, {}));
}
