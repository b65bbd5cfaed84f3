#include "crit4/branching.hpp"

#include "crit4/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

namespace crit4::branching {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exact transition of the d-dimensional Bessel process over time t
inline double radial_step(double rho, double t, int d, Rng& rng) {
    double st = std::sqrt(t);
    double a = rho + st * rng.normal();
    return std::sqrt(a * a + t * rng.chi2(d - 1));
}

struct Spheres {
    double r;      // inner sphere radius, or -inf
    double R;      // outer sphere radius, or +inf
    bool count_inner;
    bool count_outer;
};

enum class Hit { None, Inner, Outer };

// Moves one particle through its remaining life. Returns the sphere it froze
// on (if any); rho is updated to the end-of-life position otherwise.
template <class Pos>
Hit move_particle(Pos& pos, double tau, bool branches, const Spheres& sp, const SimConfig& cfg,
                  Rng& rng, std::uint64_t& steps, double far_factor);

struct RadialPos {
    double rho;
    double radius() const { return rho; }
    void step(double t, int d, Rng& rng) { rho = radial_step(rho, t, d, rng); }
};

struct CartesianPos {
    double x[4];
    double radius() const {
        return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
    }
    void step(double t, int, Rng& rng) {
        double st = std::sqrt(t);
        for (double& c : x) c += st * rng.normal();
    }
};

template <class Pos>
Hit move_particle(Pos& pos, double tau, bool branches, const Spheres& sp, const SimConfig& cfg,
                  Rng& rng, std::uint64_t& steps, double far_factor) {
    while (tau > 0) {
        const double rho = pos.radius();
        const double a = rho - sp.r, b = sp.R - rho;
        const double delta = std::min(a, b);
        // chance of reaching either sphere within tau is below 1e-15
        if (delta * delta > far_factor * tau) {
            if (!branches) return Hit::None;  // dies out of reach; its path is irrelevant
            pos.step(tau, cfg.d, rng);
            ++steps;
            return Hit::None;
        }
        const double dt = std::min(tau, std::max(cfg.dt, cfg.kappa * delta * delta));
        pos.step(dt, cfg.d, rng);
        ++steps;
        const double rho2 = pos.radius();
        if (rho2 <= sp.r) return Hit::Inner;
        if (rho2 >= sp.R) return Hit::Outer;
        if (cfg.bridge_correction) {
            if (std::isfinite(sp.r) && rng.uniform() < std::exp(-2 * a * (rho2 - sp.r) / dt))
                return Hit::Inner;
            if (std::isfinite(sp.R) && rng.uniform() < std::exp(-2 * b * (sp.R - rho2) / dt))
                return Hit::Outer;
        }
        tau -= dt;
    }
    return Hit::None;
}

template <class Pos>
std::uint64_t simulate_replica(Pos start, const Spheres& sp, const SimConfig& cfg, Rng& rng,
                               std::uint64_t& steps) {
    const double far_factor = 2.0 * cfg.d * std::log(2.0 * cfg.d * 1e15);
    std::uint64_t n = 0;
    const double r0 = start.radius();
    if (r0 <= sp.r) return sp.count_inner ? 1 : 0;
    if (r0 >= sp.R) return sp.count_outer ? 1 : 0;
    std::vector<Pos> stack{start};
    while (!stack.empty()) {
        Pos p = stack.back();
        stack.pop_back();
        const double tau = rng.exponential();
        const bool branches = rng.coin();
        Hit h = move_particle(p, tau, branches, sp, cfg, rng, steps, far_factor);
        if (h == Hit::Inner) {
            if (sp.count_inner) ++n;
            continue;
        }
        if (h == Hit::Outer) {
            if (sp.count_outer) ++n;
            continue;
        }
        if (branches) {
            stack.push_back(p);
            stack.push_back(p);
        }
    }
    return n;
}

Spheres spheres_of(const SphereGeometry& g) {
    Spheres sp;
    sp.r = g.target_radius ? *g.target_radius : -kInf;
    sp.R = g.kill_radius ? *g.kill_radius : kInf;
    sp.count_outer = g.count_outer;
    sp.count_inner = !g.count_outer;
    return sp;
}

}  // namespace

void PioneerTally::merge(const PioneerTally& o) {
    for (const auto& [k, c] : o.counts) counts[k] += c;
    n_replicas += o.n_replicas;
    particle_steps += o.particle_steps;
}

Estimate PioneerTally::hit_indicator_mean() const {
    double n = static_cast<double>(n_replicas);
    auto it = counts.find(0);
    double zeros = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    double p = 1.0 - zeros / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

Estimate PioneerTally::mean_count() const {
    double n = static_cast<double>(n_replicas), s = 0, s2 = 0;
    for (const auto& [k, c] : counts) {
        s += double(k) * double(c);
        s2 += double(k) * double(k) * double(c);
    }
    double m = s / n;
    double var = n > 1 ? (s2 - n * m * m) / (n - 1) : 0.0;
    return {m, std::sqrt(std::max(var, 0.0) / n)};
}

Estimate PioneerTally::weighted_sum(double s, double* ess) const {
    const double w = 1.0 - s;
    double n = static_cast<double>(n_replicas), sum = 0, sum2 = 0;
    for (const auto& [k, c] : counts) {
        double v = std::pow(w, static_cast<double>(k));
        sum += v * double(c);
        sum2 += v * v * double(c);
    }
    double m = sum / n;
    double var = n > 1 ? (sum2 - n * m * m) / (n - 1) : 0.0;
    if (ess) *ess = sum2 > 0 ? sum * sum / sum2 : 0.0;
    return {m, std::sqrt(std::max(var, 0.0) / n)};
}

double PioneerTally::tail_prob(std::uint64_t k) const {
    std::uint64_t c = 0;
    for (auto it = counts.lower_bound(k); it != counts.end(); ++it) c += it->second;
    return double(c) / double(n_replicas);
}

PioneerTally run_bbm_pioneers(const SphereGeometry& geom, const SimConfig& cfg) {
    if (cfg.n_replicas < 1) throw std::invalid_argument("n_replicas must be >= 1");
    if (cfg.mode == Mode::LatticeWalk) throw std::invalid_argument("lattice mode uses run_brw_replica");
    if (cfg.mode == Mode::FullCartesian && cfg.d != 4)
        throw std::invalid_argument("cartesian mode is implemented for d=4");
    const Spheres sp = spheres_of(geom);
    if (geom.target_radius && geom.kill_radius) {
        double r = *geom.target_radius, R = *geom.kill_radius;
        if (R > r && cfg.dt > (R - r) * (R - r) / 100)
            throw std::invalid_argument("dt too large to resolve the annulus");
    }
    const int T = std::max(1, cfg.threads);
    std::vector<PioneerTally> parts(T);
    auto work = [&](int t) {
        std::uint64_t lo = cfg.n_replicas * t / T, hi = cfg.n_replicas * (t + 1) / T;
        PioneerTally& tally = parts[t];
        for (std::uint64_t i = lo; i < hi; ++i) {
            Rng rng(cfg.seed, i);
            std::uint64_t n;
            if (cfg.mode == Mode::RadialBessel) {
                n = simulate_replica(RadialPos{geom.start_radius}, sp, cfg, rng, tally.particle_steps);
            } else {
                n = simulate_replica(CartesianPos{{geom.start_radius, 0, 0, 0}}, sp, cfg, rng,
                                     tally.particle_steps);
            }
            ++tally.counts[n];
            ++tally.n_replicas;
        }
    };
    if (T == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    PioneerTally out;
    for (const auto& p : parts) out.merge(p);
    return out;
}

double harmonic_first_moment(double start, double r, double R) {
    return (std::pow(start, -2) - std::pow(R, -2)) / (std::pow(r, -2) - std::pow(R, -2));
}

IdentityReport generating_identity_check(double lambda, double x, double L, const SimConfig& cfg) {
    if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("identity holds for lambda in (0,1)");
    if (!(x > 0 && x < L)) throw std::invalid_argument("need 0 < x < L");
    ode::SolveConfig oc;
    oc.rel_tol = 1e-12;
    oc.abs_tol = 1e-16;
    auto tr = ode::solve_g_lambda({lambda, L, ode::Direction::ForwardG}, oc);
    IdentityReport rep;
    rep.lambda = lambda;
    rep.x = x;
    rep.L = L;
    rep.s = tr.g.back();
    rep.ode_value = tr.at(x).g;
    SphereGeometry geom;
    geom.start_radius = std::exp(L - x);
    geom.target_radius = 1.0;
    geom.kill_radius = std::exp(L);
    rep.tally = run_bbm_pioneers(geom, cfg);
    Estimate w = rep.tally.weighted_sum(rep.s);
    double scale = std::exp(2 * (L - x));
    rep.mc_value = scale * (1 - w.value);
    rep.mc_stderr = scale * w.stderr_;
    rep.allowance = kIdentityAllowance * std::abs(rep.ode_value);
    rep.pass = std::abs(rep.mc_value - rep.ode_value) <= 3 * rep.mc_stderr + rep.allowance;
    return rep;
}

InvarianceReport scale_invariance_check(double s, double y_frac, double R1, double R2,
                                        const SimConfig& cfg) {
    if (!(y_frac > 0 && y_frac < 1)) throw std::invalid_argument("y_frac must lie in (0,1)");
    InvarianceReport rep{};
    rep.s = s;
    auto run = [&](double R, double& value, double& err, double& ess, std::uint64_t salt) {
        SphereGeometry g;
        g.start_radius = y_frac * R;
        g.target_radius.reset();
        g.kill_radius = R;
        g.count_outer = true;
        SimConfig c = cfg;
        c.seed = cfg.seed ^ (salt * 0x9E3779B97F4A7C15ull);
        PioneerTally t = run_bbm_pioneers(g, c);
        Estimate w = t.weighted_sum(s / (R * R), &ess);
        value = R * R * (1 - w.value);
        err = R * R * w.stderr_;
        return t;
    };
    PioneerTally t1 = run(R1, rep.value1, rep.err1, rep.ess1, 1);
    PioneerTally t2 = run(R2, rep.value2, rep.err2, rep.ess2, 2);
    rep.outside_band = rep.ess1 < 100 || rep.ess2 < 100;
    // two-sample KS on N/R^2
    std::vector<std::pair<double, int>> pts;
    for (auto& [k, c] : t1.counts) pts.emplace_back(double(k) / (R1 * R1), 1);
    for (auto& [k, c] : t2.counts) pts.emplace_back(double(k) / (R2 * R2), 2);
    std::sort(pts.begin(), pts.end());
    double F1 = 0, F2 = 0, D = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double v = pts[i].first;
        if (pts[i].second == 1) {
            F1 += double(t1.counts.at(std::llround(v * R1 * R1))) / double(t1.n_replicas);
        } else {
            F2 += double(t2.counts.at(std::llround(v * R2 * R2))) / double(t2.n_replicas);
        }
        if (i + 1 == pts.size() || pts[i + 1].first != v) D = std::max(D, std::abs(F1 - F2));
    }
    rep.ks_statistic = D;
    double err = std::sqrt(rep.err1 * rep.err1 + rep.err2 * rep.err2);
    rep.pass = !rep.outside_band && std::abs(rep.value1 - rep.value2) <= 3 * err;
    return rep;
}

double psi(double a, double s) {
    if (!(a > 0)) throw std::invalid_argument("a must be positive");
    if (!(s >= 1)) throw std::invalid_argument("s must be >= 1");
    double t = std::clamp(std::sqrt(a / 2), 1.0, s);
    return 2 * (t - 1) + a / t;
}

TailProbe tail_exponent_probe(double a, const std::vector<double>& R_grid, double x0,
                              double kill_factor, const SimConfig& cfg) {
    if (R_grid.size() < 2) throw std::invalid_argument("need at least two radii");
    TailProbe tp{};
    std::vector<double> xs, ys, ws;
    for (size_t i = 0; i < R_grid.size(); ++i) {
        double R = R_grid[i];
        SphereGeometry g;
        g.start_radius = std::exp(-x0) * R;
        g.target_radius = 1.0;
        g.kill_radius = kill_factor * R;
        SimConfig c = cfg;
        c.seed = cfg.seed + 7919 * (i + 1);
        PioneerTally t = run_bbm_pioneers(g, c);
        double thr = a / 2 * std::log(R) * std::log(R);
        auto k = static_cast<std::uint64_t>(std::max(1.0, std::ceil(thr - 1e-12)));
        double p_pos = t.tail_prob(1), p_k = t.tail_prob(k);
        auto hits = static_cast<std::uint64_t>(std::llround(p_k * double(t.n_replicas)));
        double cond = p_pos > 0 ? p_k / p_pos : 0.0;
        tp.R.push_back(R);
        tp.prob.push_back(cond);
        tp.hits.push_back(hits);
        if (hits < 30) tp.insufficient = true;
        if (cond > 0) {
            xs.push_back(-std::log(R));
            ys.push_back(std::log(cond));
            double var = cond < 1 ? (1 - cond) / std::max<double>(1.0, double(hits)) : 1e-12;
            ws.push_back(1 / std::max(var, 1e-12));
        }
    }
    if (xs.size() < 2) {
        tp.slope = NAN;
        tp.slope_stderr = NAN;
        tp.insufficient = true;
        return tp;
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
        sxx += ws[i] * xs[i] * xs[i];
        sxy += ws[i] * xs[i] * ys[i];
    }
    double den = sw * sxx - sx * sx;
    // log P ~ slope * (-log R): slope is the decay exponent
    tp.slope = (sw * sxy - sx * sy) / den;
    tp.slope_stderr = std::sqrt(sw / den);
    return tp;
}

double green_from_heat_kernel(double rho) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [rho](double t) {
        if (t <= 0) return 0.0;
        // log space: k^2 overflows and the Gaussian underflows near t = 0
        return std::exp(-rho * rho / (2 * t) - 2 * std::log(2 * M_PI * t));
    };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

double m1_quadrature(const double x[4], int) {
    // m1 = (1/2pi^2) * integral over S^3 of l(w)^2/2, l(w) = max(0, -2 x.w):
    // the ball seen from x along each ray w has chord length l(w), and
    // int_0^l t^3 G(t) dt = l^2/(4 pi^2). Angles are measured in a frame whose
    // first axis is x (Householder reflection e1 -> x).
    double v[4] = {1 - x[0], -x[1], -x[2], -x[3]};
    double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
    auto reflect = [&](const double w[4], double out[4]) {
        if (vv < 1e-30) {
            std::copy(w, w + 4, out);
            return;
        }
        double dot = v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3];
        for (int i = 0; i < 4; ++i) out[i] = w[i] - 2 * dot / vv * v[i];
    };
    using G = boost::math::quadrature::gauss<double, 30>;
    auto chord2 = [&](double psi, double th, double ph) {
        double w[4] = {std::cos(psi), std::sin(psi) * std::cos(th),
                       std::sin(psi) * std::sin(th) * std::cos(ph),
                       std::sin(psi) * std::sin(th) * std::sin(ph)};
        double y[4];
        reflect(w, y);
        double c = x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
        double l = std::max(0.0, -2 * c);
        return 0.5 * l * l;
    };
    auto over_psi = [&](double a, double b) {
        return G::integrate(
            [&](double psi) {
                double inner = G::integrate(
                    [&](double th) {
                        double ring = G::integrate([&](double ph) { return chord2(psi, th, ph); },
                                                   0.0, 2 * M_PI);
                        return ring * std::sin(th);
                    },
                    0.0, M_PI);
                return inner * std::sin(psi) * std::sin(psi);
            },
            a, b);
    };
    double total = over_psi(0.0, M_PI / 2) + over_psi(M_PI / 2, M_PI);
    return total / (2 * M_PI * M_PI);
}

double m1_monte_carlo(std::uint64_t n_samples, std::uint64_t seed, double* stderr_out) {
    // uniform direction on S^3; the chord formula gives m1 = E[l(w)^2 / 2]
    Rng rng(seed, 0x6d31);
    double s = 0, s2 = 0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double w[4], n2 = 0;
        for (double& c : w) {
            c = rng.normal();
            n2 += c * c;
        }
        double c = w[0] / std::sqrt(n2);  // x = e1
        double l = std::max(0.0, -2 * c);
        double v = 0.5 * l * l;
        s += v;
        s2 += v * v;
    }
    double n = double(n_samples), m = s / n;
    if (stderr_out) *stderr_out = std::sqrt((s2 / n - m * m) / n);
    return m;
}

}  // namespace crit4::branching
