#include "crit4/ode.hpp"

#include "crit4/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <boost/numeric/odeint.hpp>

namespace crit4::ode {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

namespace {

constexpr double kBlowup = 1e6;
constexpr double kMinStep = 1e-12;

// y'' = y^2 - 2 s y'
struct Rhs {
    double s;
    void operator()(const State& y, State& dy, double) const {
        dy[0] = y[1];
        dy[1] = y[0] * y[0] - 2.0 * s * y[1];
    }
};

// Integrate from x_from to x_to (either direction). `stop` is checked after
// every accepted step and ends integration early when it returns true.
template <class Stop>
Trajectory integrate(double sign, State y, double x_from, double x_to, const SolveConfig& cfg,
                     Stop stop) {
    Trajectory tr;
    tr.sign = sign;
    Rhs rhs{sign};
    // the step controller runs 100x tighter than rel_tol so the interpolant
    // residual stays within 10 rel_tol
    auto stepper = odeint::make_controlled(0.01 * cfg.abs_tol, 0.01 * cfg.rel_tol,
                                           odeint::runge_kutta_fehlberg78<State>());
    const double dir = x_to >= x_from ? 1.0 : -1.0;
    double x = x_from;
    double h = dir * std::min(cfg.max_step, 1e-3);
    tr.xs.push_back(x);
    tr.g.push_back(y[0]);
    tr.gp.push_back(y[1]);
    while (dir * (x_to - x) > 0) {
        if (dir * (x + h - x_to) > 0) h = x_to - x;
        if (std::abs(h) > cfg.max_step) h = dir * cfg.max_step;
        auto res = stepper.try_step(rhs, y, x, h);
        if (res == odeint::fail) {
            if (std::abs(h) < kMinStep) {
                if (std::abs(y[0]) < 1e3)
                    throw StiffnessFailure("stiffness failure: step size underflow", x);
                tr.blowup_at = x;
                break;
            }
            continue;
        }
        tr.xs.push_back(x);
        tr.g.push_back(y[0]);
        tr.gp.push_back(y[1]);
        if (!std::isfinite(y[0]) || std::abs(y[0]) > kBlowup) {
            tr.blowup_at = x;
            break;
        }
        if (stop(x, y)) break;
    }
    if (dir < 0) {
        std::reverse(tr.xs.begin(), tr.xs.end());
        std::reverse(tr.g.begin(), tr.g.end());
        std::reverse(tr.gp.begin(), tr.gp.end());
    }
    return tr;
}

}  // namespace

double Trajectory::gpp_at_node(size_t i) const { return g[i] * g[i] - 2.0 * sign * gp[i]; }

Trajectory::Point Trajectory::at(double x) const {
    if (x <= xs.front()) return {xs.front(), g.front(), gp.front(), gpp_at_node(0)};
    if (x >= xs.back()) {
        size_t n = xs.size() - 1;
        return {xs.back(), g.back(), gp.back(), gpp_at_node(n)};
    }
    size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1;
    const double h = xs[i + 1] - xs[i];
    const double t = (x - xs[i]) / h;
    const double d2a = gpp_at_node(i), d2b = gpp_at_node(i + 1);
    const double d3a = 2 * g[i] * gp[i] - 2 * sign * d2a;
    const double d3b = 2 * g[i + 1] * gp[i + 1] - 2 * sign * d2b;
    double a[8];
    a[0] = g[i];
    a[1] = h * gp[i];
    a[2] = h * h * d2a / 2;
    a[3] = h * h * h * d3a / 6;
    const double A = g[i + 1] - a[0] - a[1] - a[2] - a[3];
    const double B = h * gp[i + 1] - a[1] - 2 * a[2] - 3 * a[3];
    const double C = h * h * d2b - 2 * a[2] - 6 * a[3];
    const double D = h * h * h * d3b - 6 * a[3];
    a[4] = 35 * A - 15 * B + 2.5 * C - D / 6;
    a[5] = -84 * A + 39 * B - 7 * C + 0.5 * D;
    a[6] = 70 * A - 34 * B + 6.5 * C - 0.5 * D;
    a[7] = -20 * A + 10 * B - 2 * C + D / 6;
    double p = 0, dp = 0, ddp = 0;
    for (int k = 7; k >= 0; --k) p = p * t + a[k];
    for (int k = 7; k >= 1; --k) dp = dp * t + k * a[k];
    for (int k = 7; k >= 2; --k) ddp = ddp * t + k * (k - 1) * a[k];
    return {x, p, dp / h, ddp / (h * h)};
}

std::vector<Trajectory::Point> Trajectory::sample(double spacing) const {
    std::vector<Point> out;
    const double lo = x_lo(), hi = x_hi();
    const auto n = static_cast<long>(std::floor((hi - lo) / spacing + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(at(lo + k * spacing));
    return out;
}

double Trajectory::max_residual(double spacing) const {
    double worst = 0.0;
    for (const auto& p : sample(spacing)) {
        double r = std::abs(p.gpp + 2.0 * sign * p.gp - p.g * p.g) / std::max(1.0, p.g * p.g);
        worst = std::max(worst, r);
    }
    return worst;
}

Trajectory solve_g_lambda(const GLambdaSpec& spec, const SolveConfig& cfg) {
    if (!(spec.lambda >= 0)) throw std::invalid_argument("lambda must be nonnegative");
    if (!(spec.x_max > 0)) throw std::invalid_argument("x_max must be positive");
    if (spec.direction == Direction::ForwardH)
        throw std::invalid_argument("forward h integration is unstable; use solve_h_tail");
    State y{0.0, -spec.lambda};
    return integrate(1.0, y, 0.0, spec.x_max, cfg, [](double, const State&) { return false; });
}

HTail solve_h_tail(double x_start, int n_terms, const SolveConfig& cfg) {
    if (x_start < 50) throw std::invalid_argument("x_start must be >= 50");
    if (n_terms < 2) throw std::invalid_argument("n_terms must be >= 2");
    auto fam = series::gen_P(n_terms);
    const double L = std::log(x_start);
    double h = 0.0, hp = 0.0;
    for (int n = 1; n <= n_terms; ++n) {
        const auto& p = fam.at(n);
        double pn = series::eval_bipoly_fast(p, L, 0.0);
        double dpn = series::eval_bipoly_fast(p.derivative(), L, 0.0);
        h += pn / std::pow(x_start, n);
        hp += (dpn - n * pn) / std::pow(x_start, n + 1);
    }
    State y{h, hp};
    // stop once the sign pattern breaks: h>0, h'<0, h''>0, h'''<0
    auto broken = [](const State& s) {
        double h2 = s[0] * s[0] + 2 * s[1];
        double h3 = 2 * s[0] * s[1] + 2 * h2;
        return !(s[0] > 0 && s[1] < 0 && h2 > 0 && h3 < 0);
    };
    Trajectory tr = integrate(-1.0, y, x_start, 0.0, cfg,
                              [&](double, const State& s) { return broken(s); });
    HTail out{std::move(tr), 0.0, false};
    // drop nodes that violate the pattern (at most the final one)
    auto& t = out.traj;
    size_t first = 0;
    while (first < t.xs.size() && broken({t.g[first], t.gp[first]})) ++first;
    t.xs.erase(t.xs.begin(), t.xs.begin() + first);
    t.g.erase(t.g.begin(), t.g.begin() + first);
    t.gp.erase(t.gp.begin(), t.gp.begin() + first);
    if (first > 0) t.blowup_at.reset();
    out.valid_from = t.xs.front();
    out.reached_zero = t.xs.front() == 0.0 && !t.blowup_at;
    return out;
}

Trajectory solve_h_bvp(double h0, double L, const SolveConfig& cfg) {
    if (!(h0 > 0) || !(L > 0)) throw std::invalid_argument("need h0 > 0 and L > 0");
    // integrate backward from h(L)=0, h'(L)=-sigma; h(0) increases with sigma
    auto shoot = [&](double sigma) {
        return integrate(-1.0, State{0.0, -sigma}, L, 0.0, cfg,
                         [](double, const State& s) { return s[0] > 1e5; });
    };
    auto h_at_0 = [&](const Trajectory& t) {
        return (t.blowup_at || t.xs.front() > 0.0) ? INFINITY : t.g.front();
    };
    double lo = 0.0, hi = h0;
    while (h_at_0(shoot(hi)) < h0) hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (h_at_0(shoot(mid)) < h0 ? lo : hi) = mid;
    }
    return shoot(0.5 * (lo + hi));
}

PhaseMarkers phase_markers(const Trajectory& traj, const std::vector<double>& delta_at) {
    auto refine = [&](auto f, double a, double b) {
        double fa = f(a);
        while (b - a > 1e-8) {
            double m = 0.5 * (a + b);
            double fm = f(m);
            if ((fm > 0) == (fa > 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    auto gp = [&](double x) { return traj.at(x).gp; };
    auto gpp = [&](double x) { return traj.at(x).gpp; };
    const auto& xs = traj.xs;
    std::optional<double> x0, x1;
    for (size_t i = 0; i + 1 < xs.size() && !x0; ++i)
        if (traj.gp[i] < 0 && traj.gp[i + 1] >= 0) x0 = refine(gp, xs[i], xs[i + 1]);
    if (!x0) throw HorizonTooShort("horizon too short: g' has no sign change");
    for (size_t i = 0; i + 1 < xs.size() && !x1; ++i) {
        if (xs[i + 1] <= *x0) continue;
        double a = std::max(xs[i], *x0 + 1e-9);
        if (gpp(a) > 0 && traj.gpp_at_node(i + 1) <= 0) x1 = refine(gpp, a, xs[i + 1]);
    }
    if (!x1) throw HorizonTooShort("horizon too short: g'' has no sign change after x0");
    PhaseMarkers pm{*x0, *x1, {}};
    for (double x : delta_at) {
        auto p = traj.at(x);
        pm.delta_samples.emplace_back(x, 2 * p.gp - p.g * p.g);
    }
    return pm;
}

bool becomes_positive(double lambda, double x_max, const SolveConfig& cfg) {
    State y{0.0, -lambda};
    auto tr = integrate(1.0, y, 0.0, x_max, cfg, [](double, const State& s) { return s[0] > 0; });
    return tr.g.back() > 0;
}

Threshold positivity_threshold(double lambda_lo, double lambda_hi, double width,
                               const SolveConfig& cfg, double x_max) {
    if (!(lambda_lo < lambda_hi)) throw std::invalid_argument("bracket invalid");
    bool plo = becomes_positive(lambda_lo, x_max, cfg);
    bool phi = becomes_positive(lambda_hi, x_max, cfg);
    if (plo || !phi) throw std::invalid_argument("bracket invalid: no sign change");
    double lo = lambda_lo, hi = lambda_hi;
    while (hi - lo > width) {
        double m = 0.5 * (lo + hi);
        (becomes_positive(m, x_max, cfg) ? hi : lo) = m;
    }
    return {0.5 * (lo + hi), hi - lo};
}

void write_trajectory(const Trajectory& t, double spacing, const std::string& path) {
    std::ofstream os(path);
    os << "# x g gp\n" << std::setprecision(17);
    for (const auto& p : t.sample(spacing)) os << p.x << " " << p.g << " " << p.gp << "\n";
}

}  // namespace crit4::ode
