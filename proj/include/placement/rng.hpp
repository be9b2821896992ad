#pragma once

#include <cmath>
#include <cstdint>

namespace placement::rng {

// splitmix64 finalizer; used both as a PRNG step and to derive substream
// seeds that are decorrelated from the master seed.
inline std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ 0x6a09e667f3bcc909ULL;
    (void)splitmix(s);
    s ^= tag * 0x2545f4914f6cdd1dULL;
    return splitmix(s);
}

// xoshiro256** -- small, fast, and fully under our control so that streams
// are bit-stable across platforms and standard-library versions.
class Stream {
public:
    explicit Stream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix(sm);
    }
    Stream(std::uint64_t seed, std::uint64_t tag) : Stream(substream_seed(seed, tag)) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0,1); both endpoints excluded so log/logit transforms are safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller (single variate; the pair is not cached to keep call sites
    // order-independent).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Standard logistic via inverse CDF.
    double logistic() {
        const double u = uniform();
        return std::log(u / (1.0 - u));
    }

    // Type-1 extreme value (Gumbel), location 0 scale 1.
    double gumbel() { return -std::log(-std::log(uniform())); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace placement::rng
