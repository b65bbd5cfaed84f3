#include "crit4/tauberian.hpp"

#include "crit4/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/gamma_distribution.hpp>

namespace crit4::tauberian {

namespace {
constexpr double kZ = 2.5758293035489;  // two-sided 99%
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void BandSpec::validate() const {
    if (!(0 < c && c < C && std::isfinite(C))) throw std::invalid_argument("need 0 < c < C < inf");
    if (!(T > 1)) throw std::invalid_argument("need T > 1");
    if (!(delta > 0)) throw std::invalid_argument("need delta > 0");
    if (C >= T) throw std::invalid_argument("need C < T so that the band stays inside (0,1)");
}

SampleableLaw SampleableLaw::exponential(double mean) { return mixture({{1.0, 1.0, mean}}); }

SampleableLaw SampleableLaw::zero() { return mixture({{1.0, 0.0, 1.0}}); }

SampleableLaw SampleableLaw::mixture(std::vector<GammaComponent> parts) {
    if (parts.empty()) throw std::invalid_argument("empty mixture");
    double tot = 0;
    for (const auto& p : parts) {
        if (!(p.weight >= 0 && p.shape >= 0 && p.scale > 0)) throw std::invalid_argument("bad mixture component");
        tot += p.weight;
    }
    if (!(tot > 0)) throw std::invalid_argument("mixture weights sum to zero");
    for (auto& p : parts) p.weight /= tot;
    SampleableLaw law;
    law.parts_ = std::move(parts);
    return law;
}

SampleableLaw SampleableLaw::opaque(std::function<double(std::uint64_t, std::uint64_t)> sampler) {
    SampleableLaw law;
    law.opaque_ = std::move(sampler);
    return law;
}

double SampleableLaw::mgf(double lambda) const {
    if (!has_exact()) throw std::logic_error("law has no exact MGF");
    double m = 0;
    for (const auto& p : parts_) {
        if (p.shape == 0) {
            m += p.weight;
            continue;
        }
        double base = 1 - lambda * p.scale;
        if (base <= 0) return kInf;
        m += p.weight * std::pow(base, -p.shape);
    }
    return m;
}

double SampleableLaw::sample(std::uint64_t seed, std::uint64_t i) const {
    if (!has_exact()) return opaque_(seed, i);
    Rng rng(seed, i);
    double u = rng.uniform(), acc = 0;
    const GammaComponent* pick = &parts_.back();
    for (const auto& p : parts_) {
        acc += p.weight;
        if (u < acc) {
            pick = &p;
            break;
        }
    }
    if (pick->shape == 0) return 0.0;
    return boost::random::gamma_distribution<double>(pick->shape, pick->scale)(rng);
}

double SampleableLaw::interval_probability(double lo, double hi) const {
    if (!has_exact()) throw std::logic_error("law has no exact distribution function");
    if (hi < lo) return 0.0;
    double p = 0;
    for (const auto& c : parts_) {
        if (c.shape == 0) {
            if (lo <= 0 && 0 <= hi) p += c.weight;
            continue;
        }
        double a = std::max(lo, 0.0) / c.scale, b = std::max(hi, 0.0) / c.scale;
        p += c.weight * (boost::math::gamma_q(c.shape, a) - boost::math::gamma_q(c.shape, b));
    }
    return p;
}

double SampleableLaw::mean() const {
    double m = 0;
    for (const auto& p : parts_) m += p.weight * p.shape * p.scale;
    return m;
}

BandResult band_check(const SampleableLaw& law, const BandSpec& spec, int grid_points,
                      std::uint64_t n_samples, std::uint64_t seed) {
    spec.validate();
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    const double l0 = 1 - spec.C / spec.T, l1 = 1 - spec.c / spec.T;
    BandResult r{true, false, 1.0, l0, kInf};
    double worst = 0;
    std::vector<double> xs;
    if (!law.has_exact()) {
        xs.resize(n_samples);
        for (std::uint64_t i = 0; i < n_samples; ++i) xs[i] = law.sample(seed, i);
    }
    for (int j = 0; j < grid_points; ++j) {
        double lam = l0 + (l1 - l0) * j / (grid_points - 1);
        double m;
        if (law.has_exact()) {
            m = law.mgf(lam);
        } else {
            double s = 0, s2 = 0;
            for (double x : xs) {
                double w = std::exp(lam * x);
                s += w;
                s2 += w * w;
            }
            double ess = s2 > 0 ? s * s / s2 : 0;
            r.min_ess = std::min(r.min_ess, ess);
            if (!(ess >= 100)) r.unverifiable = true;
            m = s / double(n_samples);
        }
        double dev = (std::isfinite(m) && m > 0) ? std::abs(std::log(m * (1 - lam))) : kInf;
        if (dev > worst) {
            worst = dev;
            r.worst_lambda = lam;
        }
    }
    r.margin = std::exp(worst);
    r.pass = !r.unverifiable && worst <= spec.delta;
    return r;
}

double lower_bound(double a, const BandSpec& spec) {
    if (!(a > 0 && a < 1)) throw std::invalid_argument("a must lie in (0,1)");
    spec.validate();
    return spec.delta * a * spec.T * std::exp(-(1 + a) * spec.T);
}

SampleableLaw tilt(const SampleableLaw& law, double s) {
    if (!(s >= 0 && s < 1)) throw std::invalid_argument("tilt parameter must lie in [0,1)");
    if (!law.has_exact()) throw std::invalid_argument("tilting needs the exact mixture representation");
    std::vector<GammaComponent> out;
    for (const auto& p : law.parts()) {
        if (p.shape == 0) {
            out.push_back(p);
            continue;
        }
        double base = 1 - s * p.scale;
        if (base <= 0) throw std::invalid_argument("MGF diverges at the tilt parameter");
        out.push_back({p.weight * std::pow(base, -p.shape), p.shape, p.scale * (1 - s) / base});
    }
    return SampleableLaw::mixture(std::move(out));
}

namespace {

struct IntervalEstimate {
    double est, lo, hi;
    std::string method;
    double s = 0;
};

IntervalEstimate estimate_interval(const SampleableLaw& law, double a, const BandSpec& spec,
                                   std::uint64_t n, std::uint64_t seed) {
    const double lo = (1 - a) * spec.T, hi = (1 + a) * spec.T;
    if (n < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (spec.T < 20) {
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double x = law.sample(seed, i);
            if (lo <= x && x <= hi) ++k;
        }
        // Wilson score interval
        double p = double(k) / double(n), z2 = kZ * kZ, nn = double(n);
        double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
        double half = kZ * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
        return {p, std::max(0.0, centre - half), std::min(1.0, centre + half), "direct"};
    }
    if (!law.has_exact()) throw Unverifiable("unverifiable at this T: direct MC infeasible and no exact MGF");
    const double s = 1 - (spec.c + spec.C) / (2 * spec.T);
    if (!(s > 0 && s < 1)) throw Unverifiable("unverifiable at this T: tilt parameter outside (0,1)");
    const double ms = law.mgf(s);
    if (!std::isfinite(ms)) throw Unverifiable("unverifiable at this T: MGF diverges at the tilt");
    SampleableLaw tilted = tilt(law, s);
    double sum = 0, sum2 = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double x = tilted.sample(seed, i) / (1 - s);
        double w = (lo <= x && x <= hi) ? ms * std::exp(-s * x) : 0.0;
        sum += w;
        sum2 += w * w;
    }
    double m = sum / double(n);
    double se = std::sqrt(std::max(0.0, sum2 / double(n) - m * m) / double(n));
    return {m, std::max(0.0, m - kZ * se), m + kZ * se, "tilted", s};
}

}  // namespace

TheoremReport verify_theorem(const SampleableLaw& law, double a, const BandSpec& spec,
                             std::uint64_t n_samples, std::uint64_t seed) {
    double bound = lower_bound(a, spec);
    BandResult band = band_check(law, spec, 64, std::min<std::uint64_t>(n_samples, 1000000), seed);
    if (!band.pass) throw BandViolation("Laplace band hypothesis fails for this law");
    IntervalEstimate e = estimate_interval(law, a, spec, n_samples, seed);
    TheoremReport r;
    r.T = spec.T;
    r.a = a;
    r.delta = spec.delta;
    r.bound = bound;
    r.estimate = e.est;
    r.ci_low = e.lo;
    r.ci_high = e.hi;
    r.method = e.method;
    r.tilt_s = e.s;
    if (law.has_exact()) r.exact = law.interval_probability((1 - a) * spec.T, (1 + a) * spec.T);
    r.pass = r.ci_low > bound;
    return r;
}

std::optional<double> delta_search(const SampleableLaw& law, double a, double c, double C,
                                   const std::vector<double>& T_grid, std::uint64_t n_samples,
                                   std::uint64_t seed) {
    if (T_grid.empty()) throw std::invalid_argument("empty T grid");
    double need = 0, allow = kInf;
    for (double T : T_grid) {
        BandSpec spec{c, C, T, 1.0};
        BandResult b = band_check(law, spec, 64, std::min<std::uint64_t>(n_samples, 1000000), seed);
        if (b.unverifiable) return std::nullopt;
        need = std::max(need, std::log(b.margin));
        IntervalEstimate e = estimate_interval(law, a, spec, n_samples, seed);
        allow = std::min(allow, e.lo / (a * T * std::exp(-(1 + a) * T)));
    }
    // passing needs need <= delta < allow
    double d = std::floor(allow * 1000) / 1000;
    if (d >= allow) d -= 1e-3;
    if (d < need || d <= 0) return std::nullopt;
    return d;
}

}  // namespace crit4::tauberian
