#include "crit4/offcritical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/numeric/odeint.hpp>

namespace crit4::offcritical {

namespace odeint = boost::numeric::odeint;

namespace {
constexpr double kTailTol = 1e-14;
constexpr int kMaxTerms = 20000;
}  // namespace

double beta_of(int d) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (d == 4) throw std::invalid_argument("exponent degenerates to 0 at d=4");
    if (d <= 3) return (d - 6 + std::sqrt(double(d * d - 20 * d + 68))) / 2;
    return d - 4;
}

DimensionParams params_of(int d) {
    DimensionParams p;
    p.d = d;
    p.beta = beta_of(d);
    p.p = p.beta * p.beta;
    p.q = std::abs(8.0 - 2.0 * d);
    p.gamma = d <= 3 ? p.q / p.p : 0.0;
    return p;
}

double alpha_bound(const DimensionParams& p, int l) {
    return std::pow(2 * p.p + p.q, 1 - l);
}

AlphaTable alpha_seq(int d, int n_max) {
    if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
    AlphaTable t;
    t.params = params_of(d);
    t.r_alpha_lower = 2 * t.params.p + t.params.q;
    t.alphas.assign(n_max + 1, 0.0);
    t.alphas[0] = std::max(0.0, 8.0 - 2.0 * d);
    t.alphas[1] = 1.0;
    for (int l = 2; l <= n_max; ++l) {
        double s = 0.0;
        for (int k = 1; k <= l - 1; ++k) s += t.alphas[k] * t.alphas[l - k];
        t.alphas[l] = s / ((t.params.p * l + t.params.q) * (l - 1));
    }
    t.bound_holds = true;
    for (int l = 1; l <= n_max; ++l)
        if (t.alphas[l] < 0 || t.alphas[l] > alpha_bound(t.params, l) * (1 + 1e-12))
            t.bound_holds = false;
    return t;
}

namespace {

std::shared_ptr<const AlphaTable> cached_table(int d, int n_needed) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const AlphaTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[d];
    if (!slot || static_cast<int>(slot->alphas.size()) <= n_needed)
        slot = std::make_shared<const AlphaTable>(alpha_seq(d, std::max(n_needed, 256)));
    return slot;
}

// number of terms after which the geometric tail  B z^n/(1-z) drops below tol
int terms_for_ratio(double z, double scale) {
    if (z <= 0) return 2;
    if (z >= 1) return -1;
    double n = std::log(kTailTol * (1 - z) / std::max(scale, 1e-300)) / std::log(z);
    return std::max(2, static_cast<int>(std::ceil(n)) + 1);
}

}  // namespace

double power_sum(const AlphaTable& t, double mu) {
    const double B = t.r_alpha_lower;
    const double z = std::abs(mu) / B;
    int n = terms_for_ratio(z, B);
    if (n < 0) throw DivergenceRegion("mu outside the certified convergence disc");
    auto big = static_cast<int>(t.alphas.size()) > n ? nullptr : cached_table(t.params.d, n);
    const AlphaTable& tab = big ? *big : t;
    double s = 0.0, m = 1.0;
    for (int l = 1; l <= n; ++l) {
        m *= mu;
        s += tab.alphas[l] * m;
    }
    return s;
}

double mu_s_highdim(int d, double s, const AlphaTable& table) {
    if (d < 5) throw std::invalid_argument("mu_s_highdim needs d >= 5");
    if (s < 0 || s > 1) throw std::invalid_argument("s must lie in [0,1]");
    if (s == 0) return 0.0;
    double lo = 0.0, hi = 1.0;
    if (power_sum(table, hi) < s) throw std::runtime_error("no root in [0,1)");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = power_sum(table, mid);
        if (std::abs(v - s) <= 1e-15) return mid;
        (v < s ? lo : hi) = mid;
        if (hi - lo < 1e-17) break;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> b_roots(double gamma) {
    double disc = std::max(0.0, 1 - 6 * gamma + gamma * gamma);
    double r = std::sqrt(disc);
    return {(gamma - 1 - r) / 2, (gamma - 1 + r) / 2};
}

namespace {

using State = std::array<double, 2>;

struct FRhs {
    double p, q;
    void operator()(const State& y, State& dy, double x) const {
        dy[0] = y[1];
        dy[1] = (y[0] * y[0] - q * y[0] - q * x * y[1]) / (p * x * x);
    }
};

// series value and derivative of sum alpha_l mu^l x^l
std::pair<double, double> series_f(const AlphaTable& t, double mu, double x) {
    double z = std::abs(mu) * x / t.r_alpha_lower;
    int n = terms_for_ratio(z, t.r_alpha_lower * t.params.q);
    auto big = static_cast<int>(t.alphas.size()) > n ? nullptr : cached_table(t.params.d, n);
    const AlphaTable& tab = big ? *big : t;
    double f = tab.alphas[0], fp = 0.0, m = 1.0;  // m = (mu x)^{l-1}
    for (int l = 1; l <= n; ++l) {
        fp += tab.alphas[l] * l * mu * m;
        m *= mu * x;
        f += tab.alphas[l] * m;
    }
    return {f, fp};
}

void check_lowdim(const DimensionParams& p, double mu) {
    if (p.d < 1 || p.d > 3) throw std::invalid_argument("low-dimensional path needs d in {1,2,3}");
    if (mu > 0) throw std::invalid_argument("mu must be nonpositive");
}

}  // namespace

FMuTrace f_mu_lowdim(const DimensionParams& params, double mu, double x_max,
                     const ode::SolveConfig& cfg, double spacing) {
    check_lowdim(params, mu);
    FMuTrace tr;
    tr.mu = mu;
    const double B = 2 * params.p + params.q;
    tr.series_cutover_x = mu == 0 ? INFINITY : 0.5 * B / std::abs(mu);
    auto tab_ptr = cached_table(params.d, 256);
    const AlphaTable& tab = *tab_ptr;
    const double xs = std::min(tr.series_cutover_x, x_max);
    const auto n = static_cast<long>(std::floor(xs / spacing + 1e-9));
    for (long k = 0; k <= n; ++k) {
        double x = k * spacing;
        auto [f, fp] = mu == 0 ? std::pair{params.q, 0.0} : series_f(tab, mu, x);
        tr.x.push_back(x);
        tr.f.push_back(f);
        tr.fp.push_back(fp);
    }
    if (x_max <= xs) return tr;
    auto [f0, fp0] = series_f(tab, mu, xs);
    State y{f0, fp0};
    FRhs rhs{params.p, params.q};
    auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                           odeint::runge_kutta_fehlberg78<State>());
    double x = xs;
    if (tr.x.back() < xs) {
        tr.x.push_back(xs);
        tr.f.push_back(f0);
        tr.fp.push_back(fp0);
    }
    double h = std::min(spacing, 1e-3 * (1 + xs));
    double next = tr.x.back() + spacing;
    while (x < x_max) {
        double target = std::min(next, x_max);
        if (x + h > target) h = target - x;
        if (stepper.try_step(rhs, y, x, h) == odeint::fail) {
            if (h < 1e-14) throw ode::StiffnessFailure("f_mu continuation failed", x);
            continue;
        }
        if (x >= target - 1e-15) {
            tr.x.push_back(x);
            tr.f.push_back(y[0]);
            tr.fp.push_back(y[1]);
            next = x + spacing;
            h = std::min(h, spacing);
        }
    }
    return tr;
}

double f_mu_at(const DimensionParams& params, double mu, double x, const ode::SolveConfig& cfg) {
    check_lowdim(params, mu);
    if (mu == 0) return params.q;
    const double B = 2 * params.p + params.q;
    if (x <= 0.5 * B / std::abs(mu)) return series_f(*cached_table(params.d, 256), mu, x).first;
    auto tr = f_mu_lowdim(params, mu, x, cfg, x);
    return tr.f.back();
}

double mu_of_s_lowdim(const DimensionParams& params, double s, const ode::SolveConfig& cfg) {
    check_lowdim(params, 0.0);
    if (!(s > 0 && s <= params.q)) throw std::invalid_argument("s must lie in (0, 8-2d]");
    if (s == params.q) return 0.0;
    double lo = -1.0, hi = 0.0;
    while (f_mu_at(params, lo, 1.0, cfg) > s) lo *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = f_mu_at(params, mid, 1.0, cfg);
        if (std::abs(v - s) <= 1e-12) return mid;
        (v > s ? hi : lo) = mid;
        if (hi - lo < 1e-15 * std::abs(lo)) break;
    }
    return 0.5 * (lo + hi);
}

HitValue hitting_series_mu(int d, double mu, double r) {
    DimensionParams p = params_of(d);
    if (d >= 5 && r < 1) throw DivergenceRegion("r must be >= 1 for d >= 5");
    const double B = 2 * p.p + p.q;
    const double z = std::abs(mu) * std::pow(r, -p.beta) / B;
    int n = terms_for_ratio(z, B * std::pow(r, -2.0));
    if (n < 0 || n > kMaxTerms)
        throw DivergenceRegion("r^beta must exceed |mu_s|/(2 beta^2 + |2d-8|)");
    auto tab_ptr = cached_table(d, n);
    const AlphaTable& tab = *tab_ptr;
    HitValue out{0, 0, 0, n};
    double m = 1.0;
    for (int l = 0; l <= n; ++l) {
        if (l > 0) m *= mu;
        double a = 2 + p.beta * l;
        double term = tab.alphas[l] * m * std::pow(r, -a);
        out.v += term;
        out.dv += -a * term / r;
        out.d2v += a * (a + 1) * term / (r * r);
    }
    return out;
}

HitValue hitting_series_full(int d, double s, double r) {
    if (s == 0) return {0, 0, 0, 0};
    DimensionParams p = params_of(d);
    double mu;
    if (d >= 5) {
        mu = mu_s_highdim(d, s, *cached_table(d, 256));
    } else {
        ode::SolveConfig cfg;
        cfg.rel_tol = 1e-13;
        cfg.abs_tol = 1e-15;
        mu = mu_of_s_lowdim(p, s, cfg);
    }
    return hitting_series_mu(d, mu, r);
}

double hitting_series(int d, double s, double r) { return hitting_series_full(d, s, r).v; }

}  // namespace crit4::offcritical
