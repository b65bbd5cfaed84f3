#include "crit4/branching.hpp"

#include "crit4/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace crit4::branching {

namespace {

constexpr std::uint64_t kBias = 1u << 15;

inline std::uint64_t pack(const int c[4]) {
    std::uint64_t k = 0;
    for (int i = 0; i < 4; ++i) k |= (static_cast<std::uint64_t>(c[i] + kBias) & 0xffff) << (16 * i);
    return k;
}

inline void unpack(std::uint64_t k, int c[4]) {
    for (int i = 0; i < 4; ++i) c[i] = static_cast<int>((k >> (16 * i)) & 0xffff) - int(kBias);
}

// one nearest-neighbour step; returns the new key and whether it stays in B(0,R)
inline std::uint64_t neighbour(std::uint64_t k, std::uint32_t dir) {
    int shift = 16 * static_cast<int>(dir >> 1);
    std::uint64_t one = std::uint64_t{1} << shift;
    return (dir & 1) ? k + one : k - one;
}

inline long norm2(std::uint64_t k) {
    int c[4];
    unpack(k, c);
    return long(c[0]) * c[0] + long(c[1]) * c[1] + long(c[2]) * c[2] + long(c[3]) * c[3];
}

}  // namespace

double thick_threshold(double a, double R) {
    const double m1 = 0.25;
    double L = std::log(R);
    return a * (16 * m1 / (M_PI * M_PI)) * L * L;
}

LocalTimeField run_brw_replica(int R, const std::vector<double>& a_list, std::uint64_t seed,
                               std::uint64_t replica, const BrwOptions& opt) {
    if (R < 2 || R > 10000) throw std::invalid_argument("R must lie in [2, 10000]");
    Rng rng(seed, replica);
    std::mt19937_64 ghost_rng(seed ^ (replica * 0x9E3779B97F4A7C15ull) ^ 0x62727721ull);
    const long R2 = long(R) * R;
    const std::uint64_t horizon = opt.condition_on_survival ? std::uint64_t(R2) : 0;
    const int zero[4] = {0, 0, 0, 0};
    const std::uint64_t origin = pack(zero);

    LocalTimeField out;
    std::vector<std::uint64_t> cur, next, visits;
    for (;;) {
        if (out.attempts >= opt.max_attempts)
            throw StatisticalFailure("survival conditioning exceeded the attempt budget");
        ++out.attempts;
        cur.assign(1, origin);
        visits.assign(1, origin);
        std::uint64_t ghosts = 0;  // genealogical vertices already killed outside B(0,R)
        std::uint64_t gen = 0;
        bool survived = horizon == 0;
        while (!cur.empty() || (gen < horizon && ghosts > 0)) {
            next.clear();
            std::uint64_t new_ghosts = 0;
            if (gen < horizon && ghosts > 0) {
                std::binomial_distribution<std::uint64_t> bin(ghosts, 0.5);
                new_ghosts = 2 * bin(ghost_rng);
            }
            for (std::uint64_t p : cur) {
                if (!rng.coin()) continue;
                for (int c = 0; c < 2; ++c) {
                    std::uint64_t q = neighbour(p, rng() & 7u);
                    if (norm2(q) < R2) {
                        next.push_back(q);
                        visits.push_back(q);
                    } else {
                        ++new_ghosts;
                    }
                }
            }
            cur.swap(next);
            ghosts = new_ghosts;
            ++gen;
            if (gen == horizon && (!cur.empty() || ghosts > 0)) survived = true;
            if (gen >= horizon) ghosts = 0;
        }
        if (!survived) {
            if (out.attempts == 100000)  // acceptance below 1e-4
                throw StatisticalFailure("survival acceptance below 1e-4");
            continue;
        }
        break;
    }
    std::sort(visits.begin(), visits.end());
    out.tree_size = visits.size();
    out.total_visits = visits.size();
    for (size_t i = 0; i < visits.size();) {
        size_t j = i;
        while (j < visits.size() && visits[j] == visits[i]) ++j;
        auto cnt = static_cast<std::uint32_t>(j - i);
        out.sites.emplace_back(visits[i], cnt);
        out.max_local_time = std::max(out.max_local_time, cnt);
        i = j;
    }
    out.thick_counts.assign(a_list.size(), 0);
    for (size_t t = 0; t < a_list.size(); ++t) {
        double thr = thick_threshold(a_list[t], R);
        for (const auto& s : out.sites)
            if (double(s.second) >= thr) ++out.thick_counts[t];
    }
    return out;
}

ThickPointSummary thick_point_slope(const std::vector<int>& R_list, double a, int replicas,
                                    std::uint64_t seed, int threads) {
    if (R_list.size() < 2) throw std::invalid_argument("need at least two radii");
    ThickPointSummary out;
    const int T = std::max(1, threads);
    for (int R : R_list) {
        std::vector<double> counts(replicas);
        auto work = [&](int t) {
            for (int i = t; i < replicas; i += T) {
                auto f = run_brw_replica(R, {a}, seed, std::uint64_t(R) * 1000000 + i, {});
                counts[i] = double(f.thick_counts[0]);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
        double s = 0, s2 = 0;
        for (double c : counts) {
            s += c;
            s2 += c * c;
        }
        double m = s / replicas;
        double var = replicas > 1 ? (s2 - replicas * m * m) / (replicas - 1) : 0;
        out.R.push_back(R);
        out.mean_count.push_back(m);
        out.count_stderr.push_back(std::sqrt(std::max(var, 0.0) / replicas));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(R_list.size());
    for (size_t i = 0; i < out.R.size(); ++i) {
        if (!(out.mean_count[i] > 0)) {
            out.slope = NAN;
            return out;
        }
        double x = std::log(double(out.R[i])), y = std::log(out.mean_count[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

}  // namespace crit4::branching
