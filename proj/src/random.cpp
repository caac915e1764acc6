#include "wavattack/random.hpp"

#include <cmath>
#include <numbers>

#include "wavattack/errors.hpp"

namespace wavattack {

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomSource RandomSource::substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    RandomSource src(seed);
    src.engine_.seed(seq);
    return src;
}

double RandomSource::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::standard_normal() {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return z;
    }
    // 1 - u lies in (0, 1], keeping the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

double RandomSource::gaussian(double mean, double variance) {
    if (!std::isfinite(variance) || variance < 0.0) {
        throw DomainError("gaussian variance must be finite and >= 0");
    }
    if (variance == 0.0) return mean;
    return mean + std::sqrt(variance) * standard_normal();
}

QuadraturePair sample_gaussian_pair(RandomSource& rng, double variance) {
    if (!std::isfinite(variance) || variance < 0.0) {
        throw DomainError("sample_gaussian_pair: variance must be finite and >= 0");
    }
    if (variance == 0.0) return {0.0, 0.0};
    const double x = rng.gaussian(0.0, variance);
    const double p = rng.gaussian(0.0, variance);
    return {x, p};
}

}  // namespace wavattack
