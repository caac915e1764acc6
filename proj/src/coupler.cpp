#include "wavattack/coupler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wavattack/errors.hpp"
#include "wavattack/roots.hpp"

namespace wavattack {

namespace {

// Candidates closer than this are the same root seen twice (a tangency is
// reached both by the extremum refinement and, with rounding, a sign flip).
constexpr double kMergeRadius = 1e-7;

}  // namespace

CouplerModel CouplerModel::calibrated_default() {
    CouplerModel m;
    m.f = 1.0;
    m.c = (std::numbers::pi / 4.0) / std::pow(kTelecomWavelength, 2.5);
    m.w = 1.0;
    return m;
}

void CouplerModel::validate() const {
    if (!std::isfinite(f) || f <= 0.0 || f > 1.0) throw DomainError("coupler: require 0 < f <= 1");
    if (!std::isfinite(c) || c <= 0.0) throw DomainError("coupler: require c > 0");
    if (!std::isfinite(w) || w <= 0.0) throw DomainError("coupler: require w > 0");
}

double CouplerModel::phase(double lambda) const { return c * w * std::pow(lambda, 2.5) / f; }

void WavelengthBand::validate() const {
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) || lambda_min <= 0.0 || lambda_min >= lambda_max) {
        throw DomainError("wavelength band: require 0 < lambda_min < lambda_max");
    }
}

double transmittance(const CouplerModel& model, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("transmittance: wavelength must be > 0, got " + std::to_string(lambda));
    const double s = std::sin(model.phase(lambda));
    return model.f * model.f * s * s;
}

std::vector<double> invert_transmittance(const CouplerModel& model, double target_t, const WavelengthBand& band,
                                         const InversionOptions& options) {
    model.validate();
    band.validate();
    if (!std::isfinite(target_t) || target_t < 0.0) throw DomainError("invert_transmittance: target must be >= 0");
    if (target_t > model.ceiling()) {
        throw NoSolutionError("invert_transmittance: target " + std::to_string(target_t) + " exceeds coupler ceiling " +
                              std::to_string(model.ceiling()));
    }
    if (options.grid_points < 3) throw DomainError("invert_transmittance: grid needs at least 3 points");

    auto residual = [&](double lambda) { return transmittance(model, lambda) - target_t; };
    // dT/dlambda = F^2 sin(2 phase) phase'(lambda) with phase' > 0.
    auto slope_sign = [&](double lambda) { return std::sin(2.0 * model.phase(lambda)); };

    std::vector<double> candidates = roots::bracket_roots(residual, band.lambda_min, band.lambda_max,
                                                          options.grid_points, options.lambda_tolerance);

    const std::size_t n = options.grid_points;
    const double step = (band.lambda_max - band.lambda_min) / static_cast<double>(n - 1);
    auto node = [&](std::size_t i) { return i + 1 == n ? band.lambda_max : band.lambda_min + step * static_cast<double>(i); };
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double t_prev = transmittance(model, node(i - 1));
        const double t_here = transmittance(model, node(i));
        const double t_next = transmittance(model, node(i + 1));
        const bool is_max = t_here >= t_prev && t_here >= t_next;
        const bool is_min = t_here <= t_prev && t_here <= t_next;
        if (!is_max && !is_min) continue;
        const double lo = node(i - 1);
        const double hi = node(i + 1);
        if (std::signbit(slope_sign(lo)) == std::signbit(slope_sign(hi))) continue;
        candidates.push_back(roots::bisect(slope_sign, lo, hi, options.lambda_tolerance));
    }

    std::sort(candidates.begin(), candidates.end());
    std::vector<double> result;
    for (std::size_t i = 0; i < candidates.size();) {
        std::size_t j = i;
        double best = candidates[i];
        while (j < candidates.size() && candidates[j] - candidates[i] < kMergeRadius) {
            if (std::abs(residual(candidates[j])) < std::abs(residual(best))) best = candidates[j];
            ++j;
        }
        if (std::abs(residual(best)) < options.transmittance_tolerance) result.push_back(best);
        i = j;
    }
    return result;
}

}  // namespace wavattack
