#include "wavattack/units.hpp"

#include <cmath>
#include <string>

#include "wavattack/errors.hpp"

namespace wavattack {

void ShotNoise::validate() const {
    if (!std::isfinite(n0) || n0 <= 0.0) {
        throw DomainError("shot-noise variance n0 must be finite and positive, got " + std::to_string(n0));
    }
}

bool QuadraturePair::finite() const { return std::isfinite(x) && std::isfinite(p); }

void ProtocolParams::validate() const {
    n0.validate();
    if (!std::isfinite(v_a) || v_a < 0.0) throw DomainError("v_a must be >= 0");
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) throw DomainError("eta must lie in [0, 1]");
    if (!std::isfinite(lo_intensity) || lo_intensity <= 0.0) throw DomainError("lo_intensity must be > 0");
    if (!std::isfinite(epsilon) || epsilon < 0.0) throw DomainError("epsilon must be >= 0");
}

double ProtocolParams::lo_amplitude() const { return std::sqrt(lo_intensity); }

}  // namespace wavattack
