#pragma once

#include "crit4/trees.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace crit4::coupling {

enum class Increments { GaussianSubordinated, LatticeNN };

using Vec4 = std::array<double, 4>;

struct CouplingReport {
    double sup_error = 0;  // max over vertices of |Gamma^{-1/2} S - B|
    int H = 1;
    int depth = 0;
    int leaves = 1;
    double bound_proxy = 0;  // H log(1+depth) + log(leaves)
    int n_highways = 0;
};

struct CoupledFields {
    std::vector<Vec4> S;  // normalised walk at each vertex
    std::vector<Vec4> B;
};

CouplingReport couple(const trees::GenealogyTree& t, Increments inc, std::uint64_t seed,
                      std::uint64_t stream, CoupledFields* fields = nullptr);

// smallest x in [lo, hi] with CDF(x) >= u
int binomial_half_quantile(double u, int n);
int hypergeometric_quantile(double u, int population, int successes, int draws);

struct CouplingTrendRow {
    std::uint64_t n;
    double median_sup;
    double median_scaled;  // median of sup / (log n)^2
    double median_proxy;
};
std::vector<CouplingTrendRow> coupling_trend(const std::vector<std::uint64_t>& sizes, int replicas,
                                             Increments inc, std::uint64_t seed);

}  // namespace crit4::coupling
