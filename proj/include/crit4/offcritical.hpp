#pragma once

#include "crit4/ode.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace crit4::offcritical {

struct DimensionParams {
    int d;
    double beta;
    double p;      // beta^2
    double q;      // |8-2d|
    double gamma;  // q/p, meaningful for d <= 3
};

double beta_of(int d);
DimensionParams params_of(int d);

struct AlphaTable {
    DimensionParams params;
    std::vector<double> alphas;  // from l = 0
    double r_alpha_lower;        // 2 beta^2 + |2d-8|
    bool bound_holds;
};

AlphaTable alpha_seq(int d, int n_max);
// bound (2 beta^2 + |2d-8|)^{1-l}
double alpha_bound(const DimensionParams& p, int l);

// sum_{l>=1} alpha_l mu^l, truncated by the geometric tail certificate
double power_sum(const AlphaTable& t, double mu);
double mu_s_highdim(int d, double s, const AlphaTable& table);

struct FMuTrace {
    double mu;
    double series_cutover_x;
    std::vector<double> x;
    std::vector<double> f;
    std::vector<double> fp;
};

FMuTrace f_mu_lowdim(const DimensionParams& params, double mu, double x_max,
                     const ode::SolveConfig& cfg, double sample_spacing = 0.05);
double f_mu_at(const DimensionParams& params, double mu, double x, const ode::SolveConfig& cfg);
double mu_of_s_lowdim(const DimensionParams& params, double s, const ode::SolveConfig& cfg);

// roots b1 <= b2 of b^2 + (1-gamma) b + gamma
std::pair<double, double> b_roots(double gamma);

struct HitValue {
    double v, dv, d2v;  // value and termwise r-derivatives
    int terms;
};
// sum_l alpha_l mu^l r^{-2-beta l} for a given root mu
HitValue hitting_series_mu(int d, double mu, double r);
// 1 - E[(1-s)^{N_1}] from radius r; d != 4
HitValue hitting_series_full(int d, double s, double r);
double hitting_series(int d, double s, double r);

class DivergenceRegion : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

}  // namespace crit4::offcritical
