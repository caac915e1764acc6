#pragma once

#include "wavattack/random.hpp"
#include "wavattack/units.hpp"

namespace wavattack {

// Homodyne detectors with a classical local oscillator. The LO enters as
// alpha_LO = |alpha_LO| e^{i theta}; the signal port carries a coherent
// amplitude plus a vacuum fluctuation of variance N0 per quadrature.

inline constexpr double kThetaX = 0.0;
inline constexpr double kThetaP = 1.5707963267948966;  // pi/2

struct DetectorSpec {
    double t = 0.5;      ///< beam-splitter transmittance
    double theta = 0.0;  ///< LO relative phase, radians
    double q = 1.0;      ///< photocurrent constant; fixed, it cancels after normalization

    void validate() const;
};

struct BeamState {
    double intensity = 0.0;           ///< |alpha|^2
    QuadraturePair mean_quadratures;  ///< classical part; zero for vacuum

    static BeamState vacuum() { return {}; }
};

struct PortIntensities {
    double i1 = 0.0;
    double i2 = 0.0;
};

struct UbhdOptions {
    /// Keep the (1 - 2T)|alpha_S|^2 self-intensity term evaluated on the
    /// fluctuating field instead of the classical intensity alone.
    bool exact_signal_intensity = false;
    /// signal/LO intensity ratio above which the linearization is flagged.
    double weak_signal_ratio = 1e-3;
};

struct UbhdReading {
    double photocurrent = 0.0;  ///< I1 - I2 in photon-number units
    double quadrature = 0.0;    ///< photocurrent / (2 |alpha_LO|), sqrt(N0) units
    bool weak_signal_violated = false;
};

/// Balanced two-port output 2|alpha_LO| (x cos(theta) + p sin(theta)).
double balanced_output(double lo_intensity, QuadraturePair in, double theta);

/// One pulse through a two-port unbalanced detector:
///   X = 2 sqrt(T(1-T)) x_theta - (1-2T)|alpha_LO|^2 + (1-2T)|alpha_S|^2
/// with x_theta built from the signal's classical mean plus freshly sampled
/// vacuum quadratures. At T = 1/2 this is the balanced output.
UbhdReading two_port_ubhd_output(const DetectorSpec& spec, const BeamState& signal, double lo_intensity,
                                 RandomSource& rng, const UbhdOptions& options = {}, ShotNoise n0 = {});

/// 4T(1-T) N0. Throws DomainError for t outside [0, 1].
double two_port_shot_noise_variance(double t, ShotNoise n0 = {});

/// One-port splitter fed by a bright beam on one input and vacuum on the
/// other. A single vacuum quadrature X_N drives both outputs with opposite
/// signs, so I1 + I2 = intensity for every draw.
PortIntensities one_port_ubhd_intensities(double t, double lo_intensity, RandomSource& rng, ShotNoise n0 = {});

/// The deterministic form of the above for a given vacuum sample.
PortIntensities one_port_split(double t, double intensity, double vacuum_quadrature);

}  // namespace wavattack
