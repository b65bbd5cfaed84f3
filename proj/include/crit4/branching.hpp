#pragma once

#include "crit4/ode.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crit4::branching {

enum class Mode { RadialBessel, FullCartesian, LatticeWalk };

struct SimConfig {
    int d = 4;
    double dt = 1e-2;  // step floor next to a sphere
    std::uint64_t seed = 1;
    std::uint64_t n_replicas = 1000;
    Mode mode = Mode::RadialBessel;
    bool bridge_correction = true;
    int threads = 1;
    double kappa = 0.1;  // step <= kappa * dist^2 away from the floor
};

// Counting sphere is either the inner sphere (pioneers at radius r) or, when
// count_outer is set, the outer sphere (particles frozen on first exit).
struct SphereGeometry {
    double start_radius = 2;
    std::optional<double> target_radius = 1.0;
    std::optional<double> kill_radius;
    bool count_outer = false;
};

struct Estimate {
    double value = 0;
    double stderr_ = 0;
};

struct PioneerTally {
    std::map<std::uint64_t, std::uint64_t> counts;  // N -> number of replicas
    std::uint64_t n_replicas = 0;
    std::uint64_t particle_steps = 0;

    void merge(const PioneerTally& o);
    Estimate hit_indicator_mean() const;
    Estimate mean_count() const;
    // mean of (1-s)^N; effective sample size reported through ess
    Estimate weighted_sum(double s, double* ess = nullptr) const;
    double tail_prob(std::uint64_t k) const;  // P(N >= k)
};

PioneerTally run_bbm_pioneers(const SphereGeometry& geom, const SimConfig& cfg);

// exact first moment of N_r in d=4: (start^-2 - R^-2)/(r^-2 - R^-2)
double harmonic_first_moment(double start, double r, double R);

struct IdentityReport {
    double lambda, x, L, s;
    double mc_value, mc_stderr;
    double ode_value;
    double allowance;
    bool pass;
    PioneerTally tally;
};
// discretisation allowance for the identity check, relative to |g_lambda(x)|
constexpr double kIdentityAllowance = 0.02;
IdentityReport generating_identity_check(double lambda, double x, double L, const SimConfig& cfg);

struct InvarianceReport {
    double s;
    double value1, err1, value2, err2;
    double ess1, ess2;
    double ks_statistic;  // two-sample KS on N/R^2
    bool pass;
    bool outside_band;
};
InvarianceReport scale_invariance_check(double s, double y_frac, double R1, double R2,
                                        const SimConfig& cfg);

double psi(double a, double s);  // s = INFINITY allowed

struct TailProbe {
    std::vector<double> R;
    std::vector<double> prob;
    std::vector<std::uint64_t> hits;
    double slope;
    double slope_stderr;
    bool insufficient;
};
// start at e^{-x0} R, unit target; outer radius = kill_factor * R
TailProbe tail_exponent_probe(double a, const std::vector<double>& R_grid, double x0,
                              double kill_factor, const SimConfig& cfg);

double m1_quadrature(const double x[4], int n_nodes = 64);
double m1_monte_carlo(std::uint64_t n_samples, std::uint64_t seed, double* stderr_out = nullptr);
// integral over t of the 4-d heat kernel (2 pi t)^{-2} exp(-rho^2/2t)
double green_from_heat_kernel(double rho);

// lattice branching random walk on Z^4
struct LocalTimeField {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> sites;  // packed site -> visits
    std::uint64_t total_visits = 0;
    std::uint64_t tree_size = 0;  // vertices of the surviving (killed) tree
    std::uint32_t max_local_time = 0;
    std::vector<std::uint64_t> thick_counts;  // per threshold
    std::uint64_t attempts = 0;
};

struct BrwOptions {
    bool condition_on_survival = true;
    std::uint64_t max_attempts = 100000000;
};
// threshold for thickness a: a (16 m1/pi^2) (log R)^2 with m1 = 1/4
double thick_threshold(double a, double R);
LocalTimeField run_brw_replica(int R, const std::vector<double>& a_list, std::uint64_t seed,
                               std::uint64_t replica, const BrwOptions& opt);

struct ThickPointSummary {
    std::vector<int> R;
    std::vector<double> mean_count;  // for the first a in a_list
    std::vector<double> count_stderr;
    double slope;
};
ThickPointSummary thick_point_slope(const std::vector<int>& R_list, double a, int replicas,
                                    std::uint64_t seed, int threads);

class StatisticalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace crit4::branching
