// Deterministic 64-bit RNG used everywhere in the lab.
//
// The generator is SplitMix64 (Steele, Lea, Flood 2014): a counter walks by
// the golden-ratio increment and each output is a finalizer hash of the
// counter. Per-trial streams are derived by hashing (seed, stream index), so
// batches are reproducible and independent of execution order. Reference
// outputs are frozen in tests/test_rng.cpp and documented in the README.
#pragma once

#include <cstdint>

namespace sandlab {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    // Independent stream for trial `index` of a seeded batch.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(mix(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
    }

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Unbiased uniform integer in [0, bound), bound > 0. Rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t v = next();
            if (v >= threshold) return v % bound;
        }
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace sandlab
