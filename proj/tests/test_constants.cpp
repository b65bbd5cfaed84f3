#include "doctest.h"

#include "crit4/constants.hpp"

#include <cmath>

using namespace crit4::constants;

TEST_CASE("integral formula at lambda=0.5") {
    auto cfg = precise_config();
    auto e = estimate_c_lambda(0.5, 1.0, 1000, cfg);
    // frozen: integral route K and the expansion constant 2K
    CHECK(e.value == doctest::Approx(4.73928).epsilon(2e-5));
    CHECK(e.expansion_constant == doctest::Approx(2 * e.value));
    for (double x0 : {2.0, 5.0}) {
        auto f = estimate_c_lambda(0.5, x0, 1000, cfg);
        CHECK(std::abs(f.value - e.value) <= 1e-3);
    }
    CHECK_THROWS(estimate_c_lambda(1.2, 1.0, 1000, cfg));
}

TEST_CASE("finite-x fit of the expansion constant") {
    CHECK(c_lambda_tail_fit(0.5, 1000, precise_config()) == doctest::Approx(9.230122).epsilon(1e-5));
}

TEST_CASE("small lambda scaling") {
    auto e = estimate_c_lambda(0.01, 1.0, 2e5, precise_config());
    CHECK(0.01 * e.value >= 3.6);
    CHECK(0.01 * e.value <= 4.4);
}

TEST_CASE("C_lambda decreases in lambda") {
    double prev = INFINITY;
    for (int i = 1; i <= 9; ++i) {
        double v = estimate_c_lambda(0.1 * i, 1.0, 2000, precise_config()).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("asymptotic partial sums") {
    CHECK(eval_g_asymptotic(9.209, 100, 1) == doctest::Approx(-0.02));
    CHECK(eval_g_asymptotic(9.209, 1000, 2) == doctest::Approx(-1.97698e-3).epsilon(1e-5));
}

TEST_CASE("divergent truncation at x=40") {
    auto cfg = precise_config();
    double C = estimate_c_lambda(0.5, 1.0, 1000, cfg).expansion_constant;
    double exact = crit4::ode::solve_g_lambda({0.5, 40}, cfg).at(40).g;
    auto rows = truncation_table(C, 40, 12, exact);
    size_t best = 0;
    for (size_t i = 0; i < rows.size(); ++i)
        if (rows[i].abs_error < rows[best].abs_error) best = i;
    CHECK(best > 0);
    CHECK(best + 1 < rows.size());
    CHECK(rows.back().abs_error > rows[best].abs_error);
    int n_opt = optimal_truncation(C, 40, 30);
    CHECK(std::abs(eval_g_asymptotic(C, 40, n_opt) - exact) < std::abs(eval_g_asymptotic(C, 40, 1) - exact));
}

TEST_CASE("turning-point objective") {
    crit4::ode::SolveConfig cfg;
    double peak = lambda_c_objective(2.5, 1000, cfg);
    for (double l : {0.5, 1.0}) {
        double v = lambda_c_objective(l, 1000, cfg);
        CHECK(v > 0.8);
        CHECK(v < 1.05);
        CHECK(v < peak);
    }
    CHECK_THROWS(estimate_lambda_c(1000, {1.0, 1.2, 1.4}, cfg));
}
