#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crit4::ode {

enum class Direction { ForwardG, ForwardH };

struct GLambdaSpec {
    double lambda = 0.0;
    double x_max = 10.0;
    Direction direction = Direction::ForwardG;
};

struct SolveConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double max_step = 1.0;
    double dense_grid_spacing = 0.1;
};

class StiffnessFailure : public std::runtime_error {
  public:
    StiffnessFailure(const std::string& what, double last_x)
        : std::runtime_error(what), last_x(last_x) {}
    double last_x;
};

// Accepted integrator nodes. Between nodes the solution is a degree-7 Hermite
// interpolant; g'' and g''' at the nodes come from the ODE.
struct Trajectory {
    std::vector<double> xs;
    std::vector<double> g;
    std::vector<double> gp;
    std::optional<double> blowup_at;
    double sign = 1.0;  // +1: g''=g^2-2g', -1 (h branch): h''=h^2+2h'

    double gpp_at_node(size_t i) const;
    double x_lo() const { return xs.front(); }
    double x_hi() const { return xs.back(); }
    // value, first and second derivative of the interpolant
    struct Point { double x, g, gp, gpp; };
    Point at(double x) const;
    std::vector<Point> sample(double spacing) const;
    // max over the sample grid of |g''+2g'-g^2| / max(1,|g|^2), g'' from the interpolant
    double max_residual(double spacing) const;
};

Trajectory solve_g_lambda(const GLambdaSpec& spec, const SolveConfig& cfg);

// h''-2h'=h^2 seeded at x_start from the P_n expansion with the constant slot 0,
// integrated backward toward 0.
struct HTail {
    Trajectory traj;
    double valid_from;  // smallest x where the sign pattern (+,-,+,-) still holds
    bool reached_zero;
};
HTail solve_h_tail(double x_start, int n_terms, const SolveConfig& cfg);

// h''-2h'=h^2 with h(0)=h0, h(L)=0, by shooting on h'(0); used as the exact
// finite-volume hitting oracle (h(x) = e^{2x} P_{e^x, e^L}(N_1>0) with h0=1).
Trajectory solve_h_bvp(double h0, double L, const SolveConfig& cfg);

struct PhaseMarkers {
    double x0;
    double x1;
    std::vector<std::pair<double, double>> delta_samples;
};

class HorizonTooShort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

PhaseMarkers phase_markers(const Trajectory& traj, const std::vector<double>& delta_at = {});

struct Threshold {
    double value;
    double bracket_width;
};
bool becomes_positive(double lambda, double x_max, const SolveConfig& cfg);
Threshold positivity_threshold(double lambda_lo, double lambda_hi, double width,
                               const SolveConfig& cfg, double x_max = 100.0);

void write_trajectory(const Trajectory& t, double spacing, const std::string& path);

}  // namespace crit4::ode
