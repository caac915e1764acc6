#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wavattack/attack.hpp"
#include "wavattack/errors.hpp"
#include "wavattack/random.hpp"
#include "wavattack/units.hpp"

namespace wavattack {

enum class T2Policy {
    fixed,           ///< one session-wide t2 given by the caller
    hiding,          ///< the hiding root of the closed-form variance nearest 1/2
    same_sign_only,  ///< t2 = 1/2 and the closed-form same-sign solver only
};

struct AttackConfig {
    T2Policy policy = T2Policy::hiding;
    double t2 = 0.5;  ///< used by T2Policy::fixed
    /// |alpha'_LO|^2; defaults to the genuine LO intensity.
    std::optional<double> forged_lo_intensity;
    /// Per-round search around the session t2 for rounds where that exact
    /// value cannot balance the attacking equations (e.g. mixed-sign
    /// outcomes at t2 = 1/2).
    double search_step = 1e-6;
    double search_half_width = 0.02;

    friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

/// Which vacuum contributions are sampled. All on is the physical model;
/// switching them off isolates deterministic parts in tests.
struct NoiseSwitches {
    bool alice_vacuum = true;
    bool eve_heterodyne = true;
    bool bob = true;

    static NoiseSwitches none() { return {false, false, false}; }
};

struct RoundRecord {
    QuadraturePair alice;  ///< classical modulation (x_A, p_A)
    QuadraturePair eve;    ///< heterodyne outcome (x_E, p_E)
    QuadraturePair bob;    ///< Bob's normalized measurement (x_B, p_B)
    AttackSolution solution;
};

struct SessionDataset {
    ProtocolParams params;
    AttackConfig attack;
    NoiseSwitches noise;
    std::uint64_t seed = 0;
    double session_t2 = 0.5;
    std::vector<RoundRecord> records;
};

/// Solver failure inside a session, tagged with the round that failed.
class RoundInfeasibleError : public InfeasibleError {
public:
    RoundInfeasibleError(std::size_t round, const std::string& what);
    [[nodiscard]] std::size_t round() const { return round_; }

private:
    std::size_t round_;
};

/// Rounds per RNG substream. Round k draws from
/// RandomSource::substream(seed, k / kRoundsPerStream), continuing the
/// stream of round k - 1 when both share a block.
inline constexpr std::size_t kRoundsPerStream = 1024;

/// Eve's heterodyne on Alice's coherent state: x_E = x_A + n_A + n_E with
/// n_A the coherent state's own vacuum noise and n_E the extra unit of
/// heterodyne noise, each Normal(0, N0); likewise for p. Draw order is
/// n_A(x), n_E(x), n_A(p), n_E(p).
QuadraturePair eve_heterodyne(QuadraturePair alice_means, RandomSource& rng, ShotNoise n0 = {},
                              bool alice_vacuum = true, bool eve_noise = true);

/// Fluctuating part (x_B|E, p_B|E) of Bob's measurement.
///
/// Per pulse six independent draws: X_N at the fake signal's one-port
/// splitter and X_N at the fake LO's one-port splitter, each shared between
/// the reflected (x) and transmitted (p) ports with opposite sign; then the
/// two-port shot noise of signal and LO at the x detector and at the p
/// detector, with variances 4T(1-T) N0. Shot-noise weights use the
/// deterministic port intensities: (1-T) I for x, T I for p. Everything is
/// divided by sqrt(2) |alpha_LO| of the genuine LO.
QuadraturePair bob_noise(const AttackSolution& sol, double genuine_lo_intensity, RandomSource& rng,
                         ShotNoise n0 = {});

/// Deterministic part of Bob's photocurrent difference, normalized:
/// [(1-2T1) I_S^r - (1-2T2) I_LO^r] / (sqrt(2)|alpha_LO|) and the
/// transmitted-port analogue. Equals sqrt(eta/2) (x_E, p_E) exactly when
/// the attacking equations hold.
QuadraturePair bob_deterministic(const AttackSolution& sol, double genuine_lo_intensity);

/// sqrt(eta/2) (x_E, p_E) + (x_B|E, p_B|E). Throws ContractViolation if
/// `sol` does not satisfy the attacking equations for `eve`.
QuadraturePair bob_measure(const AttackSolution& sol, QuadraturePair eve, const ProtocolParams& params,
                           RandomSource& rng, bool noise = true);

/// The t2 a session runs at under `attack`.
double session_t2(const ProtocolParams& params, const AttackConfig& attack);

/// Solves the attacking equations for one round under `attack`: the
/// capped passes of a fine local search around `t2`, then the full default
/// search (nearest `t2` first) if the window holds no t2 with a bounded
/// fake signal.
AttackSolution solve_round(QuadraturePair eve, const ProtocolParams& params, const AttackConfig& attack,
                           double t2);

SessionDataset run_session(const ProtocolParams& params, const AttackConfig& attack, std::size_t n_rounds,
                           std::uint64_t seed, NoiseSwitches noise = {});

/// One line per round: round,x_A,p_A,x_E,p_E,x_B,p_B,T1,T2,signal_intensity
/// with a header line and 17 significant digits.
void write_dataset_csv(const SessionDataset& dataset, std::ostream& out);
/// The same columns as JSON objects, one per line.
void write_dataset_jsonl(const SessionDataset& dataset, std::ostream& out);
/// Parses the CSV written above. Throws std::runtime_error on malformed input.
std::vector<RoundRecord> read_dataset_csv(std::istream& in);

}  // namespace wavattack
