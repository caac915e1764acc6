#pragma once

#include <cstddef>
#include <vector>

namespace wavattack {

/// Fused-fiber coupler whose power transmittance depends on wavelength:
///
///     T(lambda) = F^2 sin^2(c w lambda^2.5 / F)
///
/// Wavelengths are in micrometers throughout; c and w are in whatever
/// units make the phase dimensionless for lambda in micrometers. Only the
/// product c*w enters the formula.
struct CouplerModel {
    double f = 1.0;  ///< maximal coupled-power amplitude, 0 < f <= 1
    double c = 1.0;  ///< coupling coefficient
    double w = 1.0;  ///< heat-source width

    /// f = 1 and c*w chosen so the phase at 1.55 um is pi/4 on a rising
    /// branch, i.e. a 50/50 splitter at the telecom wavelength.
    static CouplerModel calibrated_default();

    void validate() const;

    [[nodiscard]] double ceiling() const { return f * f; }
    [[nodiscard]] double phase(double lambda) const;

    friend bool operator==(const CouplerModel&, const CouplerModel&) = default;
};

inline constexpr double kTelecomWavelength = 1.55;  // micrometers

struct WavelengthBand {
    double lambda_min = 1.0;
    double lambda_max = 2.0;

    void validate() const;
    [[nodiscard]] bool contains(double lambda) const { return lambda >= lambda_min && lambda <= lambda_max; }

    friend bool operator==(const WavelengthBand&, const WavelengthBand&) = default;
};

struct InversionOptions {
    std::size_t grid_points = 10000;
    double lambda_tolerance = 1e-12;
    double transmittance_tolerance = 1e-9;
};

/// Throws DomainError for lambda <= 0.
double transmittance(const CouplerModel& model, double lambda);

/// All wavelengths in `band` at which the coupler transmits `target_t`,
/// ascending. Sign changes of T - target on the grid are bisected; grid-level
/// local extrema are refined on the sign of dT/dlambda so that tangential
/// solutions (target = F^2 at a peak, target = 0 at a null) are not missed.
/// Candidates failing |T - target| < transmittance_tolerance are dropped.
///
/// Throws NoSolutionError if target_t > F^2, DomainError if target_t < 0.
/// A feasible target with no solution inside the band yields an empty list.
std::vector<double> invert_transmittance(const CouplerModel& model, double target_t, const WavelengthBand& band,
                                         const InversionOptions& options = {});

}  // namespace wavattack
