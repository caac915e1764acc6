#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace wavattack {

struct SessionDataset;

/// Conditional variances of Bob's measurement, N0 units.
struct VarianceReport {
    double v_be = 0.0;         ///< V_B|E = first_term + second_term
    double v_ba = 0.0;         ///< V_B|A = eta + V_B|E
    double first_term = 0.0;   ///< 2 T2 (1-T2) (1-2T2)^2, one-port LO splitter
    double second_term = 0.0;  ///< 8 T2 (1-T2)^2, two-port shot noise of the fake LO
};

/// Closed form of V_B|E with a negligible fake signal and the fake LO as
/// bright as the genuine one. `eta` only feeds v_ba. Throws DomainError for
/// t2 outside [0, 1] or eta outside [0, 1].
VarianceReport v_be_closed_form(double t2, double eta = 0.0);

/// d V_B|E / d T2 of the closed form.
double v_be_slope(double t2);

/// V_B|E before dropping the fake-signal terms and before setting
/// I_LO = |alpha_LO|^2:
///   [ (1-2T1)^2 4T1(1-T1) I_S + (1-2T2)^2 4T2(1-T2) I_LO
///     + 4 (1-T1) I_S 4T1(1-T1) + 4 (1-T2) I_LO 4T2(1-T2) ] / (2 |alpha_LO|^2)
double v_be_general(double t2, double signal_intensity, double lo_intensity, double genuine_lo_intensity, double t1);

/// eta + V_B|E(t2).
double v_ba(double eta, double t2);

struct Extremum {
    double t2 = 0.0;
    double value = 0.0;
};

/// Maximum of the closed form over [0, 1], located by bisecting the sign
/// of its derivative.
Extremum v_be_max();

/// Every t2 in [0, 1] with V_B|E(t2) = (1 - eta) N0, ascending: brackets on
/// a `grid_points` grid then bisects to full double precision. A target
/// equal to the maximum returns the argmax. Throws InfeasibleError when
/// 1 - eta exceeds the maximum and DomainError for eta outside [0, 1].
std::vector<double> hiding_t2(double eta, std::size_t grid_points = 10000);

struct SweepRow {
    double t2 = 0.0;
    double first_term = 0.0;
    double second_term = 0.0;
    double v_be = 0.0;
};

/// `steps` uniformly spaced t2 values from t2_min to t2_max inclusive.
std::vector<SweepRow> sweep_v_be(double t2_min, double t2_max, std::size_t steps);

/// Header `t2,first_term,second_term,v_be`, 17 significant digits.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct EstimationOptions {
    /// Use x and p samples together instead of x alone.
    bool pool_quadratures = false;
};

/// Parameter-estimation summary of one dataset.
///
/// t_hat is the least-squares slope of Bob's quadrature on Alice's
/// modulation. v_ba_hat is the sample variance of x_B - sqrt(eta/2) x_A in
/// N0 units, and excess_hat = v_ba_hat - 1 compares it with the honest
/// heterodyne baseline V_B|A = N0. Standard errors: the usual OLS slope
/// error, and v_ba_hat sqrt(2 / (n - 1)) for a Gaussian sample variance.
struct EstimationReport {
    double t_hat = 0.0;
    double t_se = 0.0;
    double v_ba_hat = 0.0;
    double excess_hat = 0.0;
    double excess_se = 0.0;
    std::size_t n_rounds = 0;
    std::size_t n_samples = 0;
    bool attack_detected = false;  ///< excess_hat > epsilon
};

inline constexpr std::size_t kMinEstimationRounds = 100;

/// Throws InsufficientDataError below kMinEstimationRounds rounds.
EstimationReport estimate_parameters(const SessionDataset& dataset, const EstimationOptions& options = {});

}  // namespace wavattack
