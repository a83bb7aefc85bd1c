#pragma once

#include <cstdint>

namespace arb {

// splitmix64 finalizer; used for seed mixing and substream derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/** Xoshiro256++ seeded via splitmix64. Deterministic across platforms. */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z += 0x9E3779B97F4A7C15ULL;
            std::uint64_t t = z;
            t = (t ^ (t >> 30)) * 0xBF58476D1CE4E5B9ULL;
            t = (t ^ (t >> 27)) * 0x94D049BB133111EBULL;
            w = t ^ (t >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) without modulo bias (bound > 0).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /** Independent substream for e.g. one trial or one bootstrap replicate. */
    static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(substream_seed(master_seed, index));
    }

    /// Derived seed for an independent child stream.
    static std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) {
        return mix64(master_seed ^ mix64(index + 1));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace arb
