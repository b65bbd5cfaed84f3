#include "doctest.h"

#include "crit4/series.hpp"

using namespace crit4::series;

namespace {
BiPoly X(int p = 1) { return BiPoly::monomial(1, p, 0); }
BiPoly c(int p = 1) { return BiPoly::monomial(1, 0, p); }
BiPoly k(long v, long d = 1) { return BiPoly(mpq_class(v, d)); }
}  // namespace

TEST_CASE("first P and Q polynomials") {
    auto P = gen_P(3);
    auto Q = gen_Q(3);
    CHECK(P.at(1) == k(2));
    CHECK(P.at(2) == X() * mpq_class(2) + c());
    CHECK(Q.at(1) == k(-2));
    CHECK(Q.at(2) == X() * mpq_class(2) + c());
}

TEST_CASE("third polynomials follow the recurrence") {
    // oracle: sympy substitution of the three-term ansatz into each ODE
    BiPoly p3 = X(2) * mpq_class(2) + X() * c() * mpq_class(2) - X() * mpq_class(2) +
                c(2) * mpq_class(1, 2) - c() + k(3);
    BiPoly q3 = X(2) * mpq_class(-2) + X() * mpq_class(2) - X() * c() * mpq_class(2) -
                c(2) * mpq_class(1, 2) + c() - k(3);
    CHECK(gen_P(3).at(3) == p3);
    CHECK(gen_Q(3).at(3) == q3);
}

TEST_CASE("truncated families cancel the ODE through order 11") {
    CHECK(consistent_order(gen_P(10)) >= 11);
    CHECK(consistent_order(gen_Q(10)) >= 11);
}

TEST_CASE("a perturbed family loses consistency") {
    auto P = gen_P(6);
    P.polys[4] = P.polys[4] + k(1, 7);
    CHECK(consistent_order(P) < 7);
}

TEST_CASE("derived R polynomials") {
    auto R = derived_R(gen_Q(3));
    // g' = 2/x^2 - (4 log x + 2C - 2)/x^3 + ...
    CHECK(R.at(0) == k(2));
    CHECK(R.at(1) == X() * mpq_class(-4) + k(2) - c() * mpq_class(2));
}

TEST_CASE("BiPoly arithmetic") {
    BiPoly a = X() + c();
    CHECK((a * a) == X(2) + X() * c() * mpq_class(2) + c(2));
    CHECK((a - a).is_zero());
    CHECK(a.derivative() == k(1));
    CHECK((X(3) * mpq_class(5)).degree_x() == 3);
    CHECK(BiPoly().degree_x() == -1);
    CHECK(eval_bipoly(a * a, 1.5, 0.5) == doctest::Approx(4.0));
    CHECK(eval_bipoly_fast(gen_P(3).at(3), 2.0, 1.0) == doctest::Approx(eval_bipoly(gen_P(3).at(3), 2.0, 1.0)));
}

TEST_CASE("dump is stable") {
    std::string s = dump(gen_P(2));
    CHECK(s.find("P1 = ") != std::string::npos);
    CHECK(s == dump(gen_P(2)));
}
