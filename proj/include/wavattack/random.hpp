#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "wavattack/units.hpp"

namespace wavattack {

/// Seeded, single-owner random stream.
///
/// Engine: std::mt19937_64 (bit-exact across standard libraries). Uniforms
/// take the top 53 bits of one engine output. Gaussians use the Box-Muller
/// transform; both outputs of a transform are consumed in order, the second
/// being cached for the next call. Together this makes a stream fully
/// determined by its seed on any conforming platform.
///
/// Parallel work must not share a source. `substream(seed, index)` seeds
/// the engine from std::seed_seq over the four 32-bit halves of
/// (seed, index), so a partitioned run reproduces the serial one exactly
/// as long as the partition into indices is fixed.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);

    static RandomSource substream(std::uint64_t seed, std::uint64_t index);

    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    /// Uniform on [0, 1).
    double uniform();

    /// Standard normal draw.
    double standard_normal();

    /// Normal(mean, variance). Throws DomainError for negative or
    /// non-finite variance. Zero variance returns `mean` without consuming
    /// randomness.
    double gaussian(double mean, double variance);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Independent x, p ~ Normal(0, variance).
QuadraturePair sample_gaussian_pair(RandomSource& rng, double variance);

}  // namespace wavattack
