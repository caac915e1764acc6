#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "wavattack/coupler.hpp"
#include "wavattack/units.hpp"

namespace wavattack {

/// Parameters of the two non-interfering beams Eve injects: a fake signal
/// seen by Bob's splitters at transmittance t1 and a fake LO seen at t2.
struct AttackSolution {
    double t1 = 0.5;
    double t2 = 0.5;
    double signal_intensity = 0.0;  ///< |alpha'_S|^2
    double lo_intensity = 1.0;      ///< |alpha'_LO|^2
    std::optional<double> lambda1;  ///< micrometers, once realized on a coupler
    std::optional<double> lambda2;

    friend bool operator==(const AttackSolution&, const AttackSolution&) = default;
};

struct Residuals {
    double x = 0.0;
    double p = 0.0;
};

inline constexpr double kResidualTolerance = 1e-9;

/// LHS - RHS of the attacking equations
///   (1-T1)(1-2T1)|a'_S|^2 - (1-T2)(1-2T2)|a'_LO|^2 = sqrt(eta) x_E |a_LO|
///   T1(1-2T1)|a'_S|^2     - T2(1-2T2)|a'_LO|^2     = sqrt(eta) p_E |a_LO|
Residuals attack_residuals(const AttackSolution& sol, QuadraturePair eve, double eta, double lo_amplitude);

/// Normalizer for residuals: sqrt(eta) |a_LO| max(|x_E|, |p_E|, 1). For
/// eta below 1e-6 the sqrt(eta) factor is floored at 1e-3 so that a zero
/// channel does not turn rounding noise into an infinite relative error.
double residual_scale(QuadraturePair eve, double eta, double lo_amplitude);

/// max(|r_x|, |r_p|) / residual_scale.
double relative_residual(const AttackSolution& sol, QuadraturePair eve, double eta, double lo_amplitude);

/// Closed form with the fake LO at t2 = 1/2:
///   T1 = p_E / (x_E + p_E),  |a'_S|^2 = sqrt(eta) p_E |a_LO| / (T1 (1 - 2 T1)).
///
/// Throws WrongBranchError when x_E p_E <= 0, when x_E = p_E (T1 = 1/2
/// annihilates both coefficients), and when the ratio lands on the side of
/// 1/2 that would demand a negative intensity (|p_E| > |x_E| for positive
/// outcomes, |p_E| < |x_E| for negative ones). All of these belong to
/// solve_general.
AttackSolution solve_same_sign(QuadraturePair eve, double eta, double lo_amplitude,
                               std::optional<double> forged_lo_intensity = std::nullopt);

/// Candidate set for t2. Candidates are ranked by distance from
/// `preferred`: the preferred value itself first, then the nodes of a
/// uniform grid on [lower, upper]. A non-empty `candidates` list replaces
/// the grid and is tried in the given order.
///
/// The grid is never walked node by node. The admissible t2 form a union
/// of intervals bounded by roots of quadratics, so only nodes inside those
/// intervals are evaluated, and a fine grid costs no more than a coarse one.
struct T2Search {
    double preferred = 0.5;
    double lower = 0.01;
    double upper = 0.99;
    /// Spacing 1e-6. Mixed-sign outcomes of ordinary size balance at
    /// |t2 - 1/2| ~ 1e-4 |x_E + p_E|, far below a coarse grid's spacing.
    std::size_t points = 980001;
    /// Passes in turn: the nearest t2 whose |a'_S|^2 stays below
    /// max_signal_fraction |a'_LO|^2, then the nearest below
    /// fallback_signal_fraction |a'_LO|^2, then the t2 of least |a'_S|^2
    /// anywhere in range. A cap ranks candidates and never makes an outcome
    /// infeasible. Outcomes with p_E > x_E need |a'_S|^2 > |a'_LO|^2 at
    /// every t2 and always skip the first pass; the fallback cap keeps them
    /// off the points where 1 - 2T1 vanishes and |a'_S|^2 is unbounded.
    std::optional<double> max_signal_fraction = 0.01;
    std::optional<double> fallback_signal_fraction = 2.0;
    /// Without the final pass an outcome that no capped pass can serve is
    /// infeasible for this search.
    bool least_signal_fallback = true;
    std::vector<double> candidates;

    /// Exactly the given t2.
    static T2Search forced(double t2);
    /// Grid of spacing `step` on [centre - half_width, centre + half_width]
    /// (clipped to the open unit interval), centre first.
    static T2Search local(double centre, double step = 1e-6, double half_width = 0.02);
};

/// Chooses t2 so that both right-hand sides
///   R_x = sqrt(eta) x_E |a_LO| + (1-T2)(1-2T2)|a'_LO|^2
///   R_p = sqrt(eta) p_E |a_LO| + T2(1-2T2)|a'_LO|^2
/// share a sign, then T1 = R_p / (R_x + R_p) and
/// |a'_S|^2 = (R_x + R_p) / (1 - 2 T1), which equals R_p / (T1 (1 - 2 T1))
/// whenever T1 != 0. A zero right-hand side yields the canonical
/// (T1 = 1/2, |a'_S|^2 = 0). Throws InfeasibleError naming the scanned
/// interval when no candidate is admissible.
AttackSolution solve_general(QuadraturePair eve, double eta, double lo_amplitude, double forged_lo_intensity,
                             const T2Search& search = {});

/// Fills lambda1 and lambda2 by inverting the coupler on `band`, picking
/// for each the solution nearest 1.55 um. Throws InfeasibleError naming
/// the transmittance(s) that cannot be realized.
AttackSolution realize_wavelengths(AttackSolution sol, const CouplerModel& model, const WavelengthBand& band,
                                   const InversionOptions& options = {});

}  // namespace wavattack
