#pragma once

#include "crit4/ode.hpp"

#include <vector>

namespace crit4::constants {

struct ClambdaEstimate {
    double lambda;
    // lim -(X + 2/g(X) + log X), i.e. the integral formula as written
    double value;
    // constant of the x^{-2} term, g = -2/x + (2 log x + C)/x^2 + ...; equals 2*value
    double expansion_constant;
    double x0_used;
    double quadrature_error;
};

// High-accuracy defaults for the constant extractions.
ode::SolveConfig precise_config();

ClambdaEstimate estimate_c_lambda(double lambda, double x0, double x_max,
                                  const ode::SolveConfig& cfg);

// x^2 (g(x) + 2/x - 2 log x / x^2) at one x: the finite-x fit of the expansion constant
double c_lambda_tail_fit(double lambda, double x, const ode::SolveConfig& cfg);

struct LambdaCResult {
    double argmax;
    double peak;
    std::vector<double> lambdas;
    std::vector<double> objective;
};

double lambda_c_objective(double lambda, double x_eval, const ode::SolveConfig& cfg);
LambdaCResult estimate_lambda_c(double x_eval, const std::vector<double>& lambda_grid,
                                const ode::SolveConfig& cfg);

// partial sum of Q_n(log x)/x^n with the constant slot bound to C
double eval_g_asymptotic(double C, double x, int n_terms);

struct TruncationRow {
    int n;
    double partial_sum;
    double abs_error;
    double last_term;
};
std::vector<TruncationRow> truncation_table(double C, double x, int n_max, double exact);
// N minimising |term_N|
int optimal_truncation(double C, double x, int n_max);

}  // namespace crit4::constants
