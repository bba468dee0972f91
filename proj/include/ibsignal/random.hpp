// Explicit, injectable random source (xoshiro256** seeded via splitmix64).
// No global RNG anywhere in the library: every stochastic routine takes a
// RandomSource so runs replay bit-identically from a seed. split() derives an
// independent stream, which keeps evaluation draws from perturbing training.
#pragma once

#include <cstdint>
#include <cmath>

namespace ibsignal {

class RandomSource {
public:
    explicit RandomSource(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {
        uint64_t x = mix(seed, stream);
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = splitmix_finalize(x);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    int uniform_int(int n) {
        const uint64_t bound = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<int>(x % bound);
    }

    bool bernoulli() { return (next_u64() & 1ULL) != 0; }

    // Independent stream derived from the original seed and a caller tag.
    RandomSource split(uint64_t tag) const { return RandomSource(seed_, mix(stream_ + 1, tag)); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix_finalize(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static uint64_t mix(uint64_t a, uint64_t b) {
        return splitmix_finalize(a * 0x9e3779b97f4a7c15ULL + splitmix_finalize(b + 0x2545f4914f6cdd1dULL));
    }

    uint64_t state_[4]{};
    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace ibsignal
