#include "wavattack/homodyne.hpp"

#include <cmath>
#include <string>

#include "wavattack/errors.hpp"

namespace wavattack {

namespace {

void check_transmittance(double t, const char* what) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) throw DomainError(std::string(what) + ": transmittance must lie in [0, 1]");
}

}  // namespace

void DetectorSpec::validate() const {
    check_transmittance(t, "DetectorSpec");
    if (q != 1.0) throw DomainError("DetectorSpec: q is fixed to 1");
}

double balanced_output(double lo_intensity, QuadraturePair in, double theta) {
    if (!(lo_intensity > 0.0)) throw DomainError("balanced_output: lo_intensity must be > 0");
    return 2.0 * std::sqrt(lo_intensity) * (in.x * std::cos(theta) + in.p * std::sin(theta));
}

UbhdReading two_port_ubhd_output(const DetectorSpec& spec, const BeamState& signal, double lo_intensity,
                                 RandomSource& rng, const UbhdOptions& options, ShotNoise n0) {
    spec.validate();
    n0.validate();
    if (!(lo_intensity > 0.0)) throw DomainError("two_port_ubhd_output: lo_intensity must be > 0");
    if (signal.intensity < 0.0) throw DomainError("two_port_ubhd_output: signal intensity must be >= 0");

    const QuadraturePair field = signal.mean_quadratures + sample_gaussian_pair(rng, n0.n0);
    const double x_theta = balanced_output(lo_intensity, field, spec.theta);
    const double imbalance = 1.0 - 2.0 * spec.t;
    const double self_intensity =
        options.exact_signal_intensity ? field.x * field.x + field.p * field.p : signal.intensity;

    UbhdReading r;
    r.photocurrent = 2.0 * std::sqrt(spec.t * (1.0 - spec.t)) * x_theta - imbalance * lo_intensity +
                     imbalance * self_intensity;
    r.quadrature = r.photocurrent / (2.0 * std::sqrt(lo_intensity));
    r.weak_signal_violated = signal.intensity > options.weak_signal_ratio * lo_intensity;
    return r;
}

double two_port_shot_noise_variance(double t, ShotNoise n0) {
    check_transmittance(t, "two_port_shot_noise_variance");
    n0.validate();
    return 4.0 * t * (1.0 - t) * n0.n0;
}

PortIntensities one_port_split(double t, double intensity, double vacuum_quadrature) {
    const double fluctuation = 2.0 * std::sqrt(t * (1.0 - t) * intensity) * vacuum_quadrature;
    return {t * intensity + fluctuation, (1.0 - t) * intensity - fluctuation};
}

PortIntensities one_port_ubhd_intensities(double t, double lo_intensity, RandomSource& rng, ShotNoise n0) {
    check_transmittance(t, "one_port_ubhd_intensities");
    n0.validate();
    if (!(lo_intensity > 0.0)) throw DomainError("one_port_ubhd_intensities: lo_intensity must be > 0");
    return one_port_split(t, lo_intensity, rng.gaussian(0.0, n0.n0));
}

}  // namespace wavattack
