#pragma once

#include <cstdint>

namespace erem {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter advanced by the golden
/// gamma 0x9E3779B97F4A7C15 and passed through a fixed avalanche mix. The output
/// sequence for a given seed is fully determined by the algorithm, so synthetic
/// fixtures are reproducible across compilers and languages. Normal variates use
/// the Box-Muller transform on two consecutive 53-bit uniforms.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept;

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() noexcept;
    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard normal via Box-Muller (cosine branch only, no caching).
    double gaussian() noexcept;

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace erem
