#include "crit4/constants.hpp"

#include "crit4/series.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace crit4::constants {

ode::SolveConfig precise_config() {
    ode::SolveConfig c;
    c.rel_tol = 1e-13;
    c.abs_tol = 1e-30;
    c.max_step = 1e6;
    c.dense_grid_spacing = 1.0;
    return c;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth, double& err) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15 * tol) {
        err += std::abs(diff) / 15;
        return left + right + diff / 15;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, err) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, err);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        double& err) {
    // split into geometric panels so the recursion sees comparable scales
    double total = 0.0;
    double lo = a;
    while (lo < b) {
        double hi = std::min(b, std::max(lo * 2, lo + 1));
        double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
        total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, 40, err);
        lo = hi;
    }
    return total;
}

// 1/x coefficient of -(X + 2/g(X) + log X) + C/2 from the Q_3 term of the expansion
double tail_correction(double C, double X) {
    double L = std::log(X);
    return (-L + (3 - C) / 2) / X;
}

}  // namespace

ClambdaEstimate estimate_c_lambda(double lambda, double x0, double x_max,
                                  const ode::SolveConfig& cfg) {
    if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("lambda must lie in (0,1)");
    if (!(x0 >= 1 && x0 <= x_max / 10)) throw std::invalid_argument("x0 must lie in [1, x_max/10]");
    auto tr = ode::solve_g_lambda({lambda, x_max, ode::Direction::ForwardG}, cfg);
    if (tr.blowup_at) throw std::runtime_error("unexpected blow-up");
    auto f = [&](double x) {
        auto p = tr.at(x);
        return 1.0 - 2.0 * p.gp / (p.g * p.g) + 1.0 / x;
    };
    double qerr = 0.0;
    double integral = adaptive_simpson(f, x0, x_max, 1e-11, qerr);
    double g0 = tr.at(x0).g;
    double head = -integral - 2.0 / g0 - x0 - std::log(x0);

    // Tail beyond x_max. Analytic model from the expansion, iterated because it
    // depends on C; a least-squares fit of (a L^2 + b L + c)/x^2 on the last
    // decade gives an independent estimate whose gap feeds the error.
    double K = head;
    for (int it = 0; it < 50; ++it) K = head + tail_correction(2 * K, x_max);
    double tail_analytic = K - head;

    double A[3][3] = {}, rhs[3] = {};
    for (int k = 0; k < 64; ++k) {
        double x = x_max / 10 * std::pow(10.0, k / 63.0);
        double L = std::log(x);
        double phi[3] = {L * L / (x * x), L / (x * x), 1 / (x * x)};
        double w = x * x;  // relative weighting
        for (int i = 0; i < 3; ++i) {
            rhs[i] += w * w * phi[i] * f(x);
            for (int j = 0; j < 3; ++j) A[i][j] += w * w * phi[i] * phi[j];
        }
    }
    // 3x3 solve by Cramer's rule
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    double D = det3(A), coef[3];
    for (int c = 0; c < 3; ++c) {
        double M[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M[i][j] = j == c ? rhs[i] : A[i][j];
        coef[c] = det3(M) / D;
    }
    double L = std::log(x_max);
    double tail_fit_int = (coef[0] * (L * L + 2 * L + 2) + coef[1] * (L + 1) + coef[2]) / x_max;
    double tail_fit = -tail_fit_int;

    ClambdaEstimate est;
    est.lambda = lambda;
    est.value = head + tail_analytic;
    est.expansion_constant = 2 * est.value;
    est.x0_used = x0;
    est.quadrature_error = qerr + std::abs(tail_fit - tail_analytic);
    return est;
}

double c_lambda_tail_fit(double lambda, double x, const ode::SolveConfig& cfg) {
    auto tr = ode::solve_g_lambda({lambda, x, ode::Direction::ForwardG}, cfg);
    double g = tr.g.back();
    return x * x * (g + 2 / x - 2 * std::log(x) / (x * x));
}

double lambda_c_objective(double lambda, double x_eval, const ode::SolveConfig& cfg) {
    auto tr = ode::solve_g_lambda({lambda, x_eval, ode::Direction::ForwardG}, cfg);
    if (tr.blowup_at) throw std::runtime_error("blow-up in lambda_c scan");
    return -(x_eval / 2) * tr.g.back();
}

LambdaCResult estimate_lambda_c(double x_eval, const std::vector<double>& grid,
                                const ode::SolveConfig& cfg) {
    if (grid.size() < 3) throw std::invalid_argument("grid too small");
    LambdaCResult r;
    r.lambdas = grid;
    for (double l : grid) r.objective.push_back(lambda_c_objective(l, x_eval, cfg));
    size_t k = std::max_element(r.objective.begin(), r.objective.end()) - r.objective.begin();
    if (k == 0 || k + 1 == grid.size()) throw std::runtime_error("grid too narrow");
    double x1 = grid[k - 1], x2 = grid[k], x3 = grid[k + 1];
    double y1 = r.objective[k - 1], y2 = r.objective[k], y3 = r.objective[k + 1];
    double num = (x2 - x1) * (x2 - x1) * (y2 - y3) - (x2 - x3) * (x2 - x3) * (y2 - y1);
    double den = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    r.argmax = den != 0 ? x2 - 0.5 * num / den : x2;
    r.peak = y2;
    return r;
}

namespace {
const series::SeriesFamily& q_family() {
    static const series::SeriesFamily q = series::gen_Q(30);
    return q;
}
}  // namespace

double eval_g_asymptotic(double C, double x, int n_terms) {
    if (n_terms < 1 || n_terms > 30) throw std::invalid_argument("n_terms must be in [1,30]");
    const auto& q = q_family();
    double L = std::log(x), s = 0.0;
    for (int n = 1; n <= n_terms; ++n) s += series::eval_bipoly_fast(q.at(n), L, C) / std::pow(x, n);
    return s;
}

std::vector<TruncationRow> truncation_table(double C, double x, int n_max, double exact) {
    std::vector<TruncationRow> rows;
    const auto& q = q_family();
    double L = std::log(x), s = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        double term = series::eval_bipoly_fast(q.at(n), L, C) / std::pow(x, n);
        s += term;
        rows.push_back({n, s, std::abs(s - exact), term});
    }
    return rows;
}

int optimal_truncation(double C, double x, int n_max) {
    auto rows = truncation_table(C, x, n_max, 0.0);
    int best = 1;
    for (const auto& r : rows)
        if (std::abs(r.last_term) < std::abs(rows[best - 1].last_term)) best = r.n;
    return best;
}

}  // namespace crit4::constants
