#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crit4::tauberian {

struct BandSpec {
    double c, C, T, delta;
    void validate() const;
};

// Finite mixture of Gamma(shape k, scale theta) laws; k = 0 is an atom at 0.
// The family is closed under the tilt used by the theorem.
struct GammaComponent {
    double weight, shape, scale;
};

class SampleableLaw {
  public:
    static SampleableLaw exponential(double mean = 1.0);
    static SampleableLaw zero();
    static SampleableLaw mixture(std::vector<GammaComponent> parts);
    // law with only a sampler; tilting and exact checks are unavailable
    static SampleableLaw opaque(std::function<double(std::uint64_t seed, std::uint64_t i)> sampler);

    bool has_exact() const { return !parts_.empty(); }
    const std::vector<GammaComponent>& parts() const { return parts_; }
    double mgf(double lambda) const;  // +inf outside the domain
    double sample(std::uint64_t seed, std::uint64_t i) const;
    double interval_probability(double lo, double hi) const;
    double mean() const;

  private:
    std::vector<GammaComponent> parts_;
    std::function<double(std::uint64_t, std::uint64_t)> opaque_;
};

struct BandResult {
    bool pass;
    bool unverifiable;
    double margin;       // exp(max |log(m(lambda)(1-lambda))|)
    double worst_lambda;
    double min_ess;      // empirical path only
};
BandResult band_check(const SampleableLaw& law, const BandSpec& spec, int grid_points,
                      std::uint64_t n_samples = 1000000, std::uint64_t seed = 1);

double lower_bound(double a, const BandSpec& spec);

// (1-s) X under the law biased by e^{sX}
SampleableLaw tilt(const SampleableLaw& law, double s);

struct TheoremReport {
    double T, a, delta;
    double bound;
    double estimate, ci_low, ci_high;
    std::optional<double> exact;
    std::string method;  // "direct" or "tilted"
    double tilt_s = 0;
    bool pass;
};

class Unverifiable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class BandViolation : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

TheoremReport verify_theorem(const SampleableLaw& law, double a, const BandSpec& spec,
                             std::uint64_t n_samples, std::uint64_t seed);

// largest delta (resolution 1e-3) for which verify_theorem passes at every T
std::optional<double> delta_search(const SampleableLaw& law, double a, double c, double C,
                                   const std::vector<double>& T_grid, std::uint64_t n_samples,
                                   std::uint64_t seed);

}  // namespace crit4::tauberian
