#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace aci {

/// SplitMix64 (Steele, Lea & Flood). Used to expand a 64-bit seed into
/// generator state and to derive independent sub-stream seeds.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded from four SplitMix64
/// outputs. Normal deviates use the Box-Muller cosine branch and consume
/// exactly two uniforms each, so the draw index alone fixes the output.
class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed) noexcept {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    /// Seed for sub-stream `stream` of `seed`; streams are statistically independent.
    [[nodiscard]] static constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                                            std::uint64_t stream) noexcept {
        SplitMix64 sm(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
        return sm.next();
    }

    constexpr std::uint64_t next_u64() noexcept {
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

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double normal(double mean = 0.0, double stddev = 1.0) noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
};

}  // namespace aci
