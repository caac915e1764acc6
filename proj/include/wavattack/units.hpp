#pragma once

// Shared domain types. Every variance in the library is expressed as a
// multiple of the shot-noise variance N0; quadrature amplitudes are in
// units of sqrt(N0).

namespace wavattack {

struct ShotNoise {
    double n0 = 1.0;

    /// Throws DomainError unless n0 is finite and positive.
    void validate() const;
};

struct QuadraturePair {
    double x = 0.0;
    double p = 0.0;

    [[nodiscard]] bool finite() const;

    friend QuadraturePair operator+(QuadraturePair a, QuadraturePair b) { return {a.x + b.x, a.p + b.p}; }
    friend QuadraturePair operator*(double s, QuadraturePair a) { return {s * a.x, s * a.p}; }
    friend bool operator==(const QuadraturePair&, const QuadraturePair&) = default;
};

/// Session-level physics.
struct ProtocolParams {
    double v_a = 10.0;           ///< Alice's modulation variance, N0 units
    double eta = 0.6;            ///< channel transmission
    double lo_intensity = 1e8;   ///< |alpha_LO|^2, photon number
    double epsilon = 0.01;       ///< tolerated excess noise, N0 units
    ShotNoise n0{};

    void validate() const;

    [[nodiscard]] double lo_amplitude() const;

    friend bool operator==(const ProtocolParams& a, const ProtocolParams& b) {
        return a.v_a == b.v_a && a.eta == b.eta && a.lo_intensity == b.lo_intensity &&
               a.epsilon == b.epsilon && a.n0.n0 == b.n0.n0;
    }
};

}  // namespace wavattack
