#include "crit4/coupling.hpp"

#include "crit4/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crit4::coupling {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

template <class LogPmf>
int invert_discrete(double u, int lo, int hi, int mode, LogPmf logpmf) {
    mode = std::clamp(mode, lo, hi);
    const double top = logpmf(mode);
    int a = mode, b = mode;
    while (a > lo && logpmf(a - 1) - top > -50) --a;
    while (b < hi && logpmf(b + 1) - top > -50) ++b;
    std::vector<double> w(b - a + 1);
    for (int x = a; x <= b; ++x) w[x - a] = std::exp(logpmf(x) - top);
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    double target = u * total, c = 0;
    for (int x = a; x <= b; ++x) {
        c += w[x - a];
        if (c >= target) return x;
    }
    return b;
}

double lchoose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// KMT-style dyadic construction of a +-1 walk Y on [l, r] from the Brownian
// values W at integer times; ups = number of +1 steps in (l, r].
void dyadic_fill(const std::vector<double>& W, int l, int r, int ups, std::vector<int>& Y) {
    const int k = r - l;
    if (k <= 1) return;
    const int h = k / 2, mid = l + h;
    double mean = W[l] + (W[r] - W[l]) * double(h) / k;
    double sd = std::sqrt(double(h) * (k - h) / k);
    double u = std_normal_cdf((W[mid] - mean) / sd);
    int first = hypergeometric_quantile(u, k, ups, h);
    Y[mid] = Y[l] + 2 * first - h;
    dyadic_fill(W, l, mid, first, Y);
    dyadic_fill(W, mid, r, ups - first, Y);
}

struct PathPiece {
    std::vector<Vec4> S, B;  // indexed by edge count from the attachment vertex
};

PathPiece gaussian_piece(int m, Rng& rng) {
    PathPiece p;
    p.S.assign(m + 1, Vec4{});
    p.B.assign(m + 1, Vec4{});
    for (int j = 1; j <= m; ++j) {
        double se = std::sqrt(rng.exponential());
        for (int i = 0; i < 4; ++i) {
            double g = rng.normal();
            p.S[j][i] = p.S[j - 1][i] + se * g;
            p.B[j][i] = p.B[j - 1][i] + g;
        }
    }
    return p;
}

PathPiece lattice_piece(int m, Rng& rng) {
    PathPiece p;
    p.S.assign(m + 1, Vec4{});
    p.B.assign(m + 1, Vec4{});
    std::vector<int> coord(m + 1);
    int n[4] = {0, 0, 0, 0};
    for (int j = 1; j <= m; ++j) {
        coord[j] = static_cast<int>(rng() & 3u);
        ++n[coord[j]];
    }
    for (int i = 0; i < 4; ++i) {
        // W_i on the grid of quarter-integers up to max(n_i, m/4)
        const int len = std::max(4 * n[i], m);
        std::vector<double> Wq(len + 1, 0.0);
        for (int q = 1; q <= len; ++q) Wq[q] = Wq[q - 1] + 0.5 * rng.normal();
        std::vector<double> W(n[i] + 1);
        for (int t = 0; t <= n[i]; ++t) W[t] = Wq[4 * t];
        std::vector<int> Y(n[i] + 1, 0);
        if (n[i] > 0) {
            double z = W[n[i]] / std::sqrt(double(n[i]));
            int ups = binomial_half_quantile(std_normal_cdf(z), n[i]);
            Y[n[i]] = 2 * ups - n[i];
            dyadic_fill(W, 0, n[i], ups, Y);
        }
        int seen = 0;
        for (int j = 1; j <= m; ++j) {
            if (coord[j] == i) ++seen;
            // Gamma = I/4, so Gamma^{-1/2} S = 2 S; B_i(j) = 2 W_i(j/4)
            p.S[j][i] = 2.0 * Y[seen];
            p.B[j][i] = 2.0 * Wq[j];
        }
    }
    return p;
}

double dist(const Vec4& a, const Vec4& b) {
    double s = 0;
    for (int i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

int binomial_half_quantile(double u, int n) {
    auto lp = [n](int x) { return lchoose(n, x) - n * std::log(2.0); };
    return invert_discrete(u, 0, n, n / 2, lp);
}

int hypergeometric_quantile(double u, int population, int successes, int draws) {
    const int lo = std::max(0, draws + successes - population), hi = std::min(draws, successes);
    auto lp = [&](int x) {
        return lchoose(successes, x) + lchoose(population - successes, draws - x) - lchoose(population, draws);
    };
    int mode = static_cast<int>(std::floor((draws + 1.0) * (successes + 1.0) / (population + 2.0)));
    return invert_discrete(u, lo, hi, mode, lp);
}

CouplingReport couple(const trees::GenealogyTree& t, Increments inc, std::uint64_t seed,
                      std::uint64_t stream, CoupledFields* fields) {
    const auto hw = trees::highways(t);
    CouplingReport rep;
    rep.H = hw.rounds;
    rep.depth = t.depth();
    rep.leaves = t.leaves();
    rep.bound_proxy = rep.H * std::log(1.0 + rep.depth) + std::log(double(rep.leaves));
    rep.n_highways = static_cast<int>(hw.paths.size());

    Rng rng(seed, stream);
    std::vector<Vec4> S(t.size(), Vec4{}), B(t.size(), Vec4{});
    // attachment vertices belong to later rounds, so weld from the last round down
    std::vector<int> idx(hw.paths.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return hw.path_round[a] > hw.path_round[b]; });
    for (int k : idx) {
        const auto& path = hw.paths[k];
        const int m = static_cast<int>(path.size()) - 1;
        if (m == 0) continue;
        PathPiece piece = inc == Increments::GaussianSubordinated ? gaussian_piece(m, rng) : lattice_piece(m, rng);
        const Vec4 s0 = S[path[0]], b0 = B[path[0]];
        for (int j = 1; j <= m; ++j) {
            for (int i = 0; i < 4; ++i) {
                S[path[j]][i] = s0[i] + piece.S[j][i];
                B[path[j]][i] = b0[i] + piece.B[j][i];
            }
        }
    }
    for (int v = 0; v < t.size(); ++v) rep.sup_error = std::max(rep.sup_error, dist(S[v], B[v]));
    if (fields) {
        fields->S = std::move(S);
        fields->B = std::move(B);
    }
    return rep;
}

std::vector<CouplingTrendRow> coupling_trend(const std::vector<std::uint64_t>& sizes, int replicas,
                                             Increments inc, std::uint64_t seed) {
    std::vector<CouplingTrendRow> rows;
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    for (std::uint64_t n : sizes) {
        trees::SampleRequest req;
        req.condition = trees::Condition::Size;
        req.n = n;
        std::vector<double> sup(replicas), scaled(replicas), proxy(replicas);
        const double L = std::log(double(n));
        for (int r = 0; r < replicas; ++r) {
            auto t = trees::sample_bgw(req, seed, (n << 24) + std::uint64_t(r));
            auto rep = couple(t, inc, seed ^ 0xC0u, (n << 24) + std::uint64_t(r));
            sup[r] = rep.sup_error;
            scaled[r] = rep.sup_error / (L * L);
            proxy[r] = rep.bound_proxy;
        }
        rows.push_back({n, median(sup), median(scaled), median(proxy)});
    }
    return rows;
}

}  // namespace crit4::coupling
