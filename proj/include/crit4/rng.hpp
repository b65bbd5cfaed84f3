#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace crit4 {

// Philox4x32-10. The counter carries (draw index, stream), the key is the run
// seed, so every (seed, stream) pair addresses an independent sequence.
class Philox {
  public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t seed, std::uint64_t stream)
        : key0_(static_cast<std::uint32_t>(seed)), key1_(static_cast<std::uint32_t>(seed >> 32)),
          s0_(static_cast<std::uint32_t>(stream)), s1_(static_cast<std::uint32_t>(stream >> 32)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (idx_ == 4) {
            buf_ = block({static_cast<std::uint32_t>(ctr_), static_cast<std::uint32_t>(ctr_ >> 32), s0_, s1_},
                         key0_, key1_);
            ++ctr_;
            idx_ = 0;
        }
        return buf_[idx_++];
    }

    static Block block(Block c, std::uint32_t k0, std::uint32_t k1) {
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            Block n{static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
                    static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
            c = n;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

  private:
    std::uint32_t key0_, key1_, s0_, s1_;
    std::uint64_t ctr_ = 0;
    Block buf_ = {};
    int idx_ = 4;
};

// Per-replica generator: xoshiro256++ whose state is drawn from Philox(seed, stream).
class Rng {
  public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t stream) {
        Philox p(seed, stream);
        for (auto& w : s_) {
            std::uint64_t hi = p(), lo = p();
            w = (hi << 32) | lo;
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    // uniform in (0,1)
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential() { return boost::random::exponential_distribution<double>(1.0)(*this); }
    double normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(*this); }

    bool coin() {
        if (nbits_ == 0) {
            bits_ = (*this)();
            nbits_ = 64;
        }
        --nbits_;
        bool b = bits_ & 1u;
        bits_ >>= 1;
        return b;
    }

    // chi-square with k degrees of freedom, k small
    double chi2(int k) {
        double s = 0;
        for (int i = 0; i + 1 < k; i += 2) s += 2 * exponential();
        if (k % 2) {
            double g = normal();
            s += g * g;
        }
        return s;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    std::uint64_t bits_ = 0;
    int nbits_ = 0;
};

}  // namespace crit4
