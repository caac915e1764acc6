#include "wavattack/session.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "wavattack/analysis.hpp"

namespace wavattack {

namespace {

// Outcomes this close to the origin are treated as exactly zero.
constexpr double kDegenerateOutcome = 1e-12;

double forged_lo(const ProtocolParams& params, const AttackConfig& attack) {
    const double lo = attack.forged_lo_intensity.value_or(params.lo_intensity);
    if (!std::isfinite(lo) || lo <= 0.0) throw DomainError("forged LO intensity must be > 0");
    return lo;
}

}  // namespace

RoundInfeasibleError::RoundInfeasibleError(std::size_t round, const std::string& what)
    : InfeasibleError(fmt::format("round {}: {}", round, what)), round_(round) {}

QuadraturePair eve_heterodyne(QuadraturePair alice_means, RandomSource& rng, ShotNoise n0, bool alice_vacuum,
                              bool eve_noise) {
    const double v_alice = alice_vacuum ? n0.n0 : 0.0;
    const double v_eve = eve_noise ? n0.n0 : 0.0;
    const double nx_a = rng.gaussian(0.0, v_alice);
    const double nx_e = rng.gaussian(0.0, v_eve);
    const double np_a = rng.gaussian(0.0, v_alice);
    const double np_e = rng.gaussian(0.0, v_eve);
    return {alice_means.x + nx_a + nx_e, alice_means.p + np_a + np_e};
}

QuadraturePair bob_noise(const AttackSolution& sol, double genuine_lo_intensity, RandomSource& rng, ShotNoise n0) {
    const double t1 = sol.t1;
    const double t2 = sol.t2;
    const double i_s = sol.signal_intensity;
    const double i_lo = sol.lo_intensity;

    const double xn_signal = rng.gaussian(0.0, n0.n0);
    const double xn_lo = rng.gaussian(0.0, n0.n0);
    const double dx_s = rng.gaussian(0.0, 4.0 * t1 * (1.0 - t1) * n0.n0);
    const double dx_lo = rng.gaussian(0.0, 4.0 * t2 * (1.0 - t2) * n0.n0);
    const double dp_s = rng.gaussian(0.0, 4.0 * t1 * (1.0 - t1) * n0.n0);
    const double dp_lo = rng.gaussian(0.0, 4.0 * t2 * (1.0 - t2) * n0.n0);

    // One-port splitter fluctuations: minus on the reflected port, plus on
    // the transmitted one.
    const double f_s = 2.0 * std::sqrt(t1 * (1.0 - t1) * i_s) * xn_signal;
    const double f_lo = 2.0 * std::sqrt(t2 * (1.0 - t2) * i_lo) * xn_lo;

    const double x_num = (1.0 - 2.0 * t1) * (-f_s) - (1.0 - 2.0 * t2) * (-f_lo) +
                         2.0 * std::sqrt((1.0 - t1) * i_s) * dx_s + 2.0 * std::sqrt((1.0 - t2) * i_lo) * dx_lo;
    const double p_num = (1.0 - 2.0 * t1) * f_s - (1.0 - 2.0 * t2) * f_lo + 2.0 * std::sqrt(t1 * i_s) * dp_s +
                         2.0 * std::sqrt(t2 * i_lo) * dp_lo;
    const double scale = std::sqrt(2.0 * genuine_lo_intensity);
    return {x_num / scale, p_num / scale};
}

QuadraturePair bob_deterministic(const AttackSolution& sol, double genuine_lo_intensity) {
    const double t1 = sol.t1;
    const double t2 = sol.t2;
    const double scale = std::sqrt(2.0 * genuine_lo_intensity);
    const double x = (1.0 - 2.0 * t1) * (1.0 - t1) * sol.signal_intensity - (1.0 - 2.0 * t2) * (1.0 - t2) * sol.lo_intensity;
    const double p = (1.0 - 2.0 * t1) * t1 * sol.signal_intensity - (1.0 - 2.0 * t2) * t2 * sol.lo_intensity;
    return {x / scale, p / scale};
}

QuadraturePair bob_measure(const AttackSolution& sol, QuadraturePair eve, const ProtocolParams& params,
                           RandomSource& rng, bool noise) {
    const double rel = relative_residual(sol, eve, params.eta, params.lo_amplitude());
    if (!(rel < kResidualTolerance)) {
        throw ContractViolation(
            fmt::format("bob_measure: attack solution misses the attacking equations (relative residual {:.3g})", rel));
    }
    const QuadraturePair signal = std::sqrt(params.eta / 2.0) * eve;
    if (!noise) return signal;
    return signal + bob_noise(sol, params.lo_intensity, rng, params.n0);
}

double session_t2(const ProtocolParams& params, const AttackConfig& attack) {
    switch (attack.policy) {
        case T2Policy::fixed:
            if (!(attack.t2 > 0.0 && attack.t2 < 1.0)) throw DomainError("fixed t2 must lie in (0, 1)");
            return attack.t2;
        case T2Policy::same_sign_only:
            return 0.5;
        case T2Policy::hiding: {
            const std::vector<double> roots = hiding_t2(params.eta);
            return *std::min_element(roots.begin(), roots.end(),
                                     [](double a, double b) { return std::abs(a - 0.5) < std::abs(b - 0.5); });
        }
    }
    throw DomainError("unknown t2 policy");
}

AttackSolution solve_round(QuadraturePair eve, const ProtocolParams& params, const AttackConfig& attack, double t2) {
    if (std::abs(eve.x) <= kDegenerateOutcome && std::abs(eve.p) <= kDegenerateOutcome) eve = {0.0, 0.0};
    const double lo = forged_lo(params, attack);
    if (attack.policy == T2Policy::same_sign_only) {
        if (eve.x == 0.0 && eve.p == 0.0) return solve_general(eve, params.eta, params.lo_amplitude(), lo, T2Search::forced(0.5));
        return solve_same_sign(eve, params.eta, params.lo_amplitude(), lo);
    }
    T2Search local = T2Search::local(t2, attack.search_step, attack.search_half_width);
    local.least_signal_fallback = false;
    try {
        return solve_general(eve, params.eta, params.lo_amplitude(), lo, local);
    } catch (const InfeasibleError&) {
        // Large p_E - x_E can push every t2 with a bounded fake signal
        // outside the local window; widen to the full grid, nearest t2 first.
        T2Search wide;
        wide.preferred = t2;
        return solve_general(eve, params.eta, params.lo_amplitude(), lo, wide);
    }
}

SessionDataset run_session(const ProtocolParams& params, const AttackConfig& attack, std::size_t n_rounds,
                           std::uint64_t seed, NoiseSwitches noise) {
    params.validate();
    if (n_rounds < 1) throw DomainError("run_session: n_rounds must be >= 1");

    SessionDataset ds;
    ds.params = params;
    ds.attack = attack;
    ds.noise = noise;
    ds.seed = seed;
    ds.session_t2 = session_t2(params, attack);
    ds.records.reserve(n_rounds);

    const double alice_variance = params.v_a * params.n0.n0;
    std::optional<RandomSource> rng;
    for (std::size_t k = 0; k < n_rounds; ++k) {
        if (k % kRoundsPerStream == 0) rng = RandomSource::substream(seed, k / kRoundsPerStream);

        RoundRecord rec;
        rec.alice = sample_gaussian_pair(*rng, alice_variance);
        rec.eve = eve_heterodyne(rec.alice, *rng, params.n0, noise.alice_vacuum, noise.eve_heterodyne);
        try {
            rec.solution = solve_round(rec.eve, params, attack, ds.session_t2);
        } catch (const InfeasibleError& e) {
            throw RoundInfeasibleError(k, e.what());
        }
        rec.bob = bob_measure(rec.solution, rec.eve, params, *rng, noise.bob);
        ds.records.push_back(rec);
    }
    return ds;
}

void write_dataset_csv(const SessionDataset& dataset, std::ostream& out) {
    out << "round,x_A,p_A,x_E,p_E,x_B,p_B,T1,T2,signal_intensity\n";
    for (std::size_t k = 0; k < dataset.records.size(); ++k) {
        const RoundRecord& r = dataset.records[k];
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k,
                           r.alice.x, r.alice.p, r.eve.x, r.eve.p, r.bob.x, r.bob.p, r.solution.t1, r.solution.t2,
                           r.solution.signal_intensity);
    }
}

void write_dataset_jsonl(const SessionDataset& dataset, std::ostream& out) {
    for (std::size_t k = 0; k < dataset.records.size(); ++k) {
        const RoundRecord& r = dataset.records[k];
        nlohmann::ordered_json row;
        row["round"] = k;
        row["x_A"] = r.alice.x;
        row["p_A"] = r.alice.p;
        row["x_E"] = r.eve.x;
        row["p_E"] = r.eve.p;
        row["x_B"] = r.bob.x;
        row["p_B"] = r.bob.p;
        row["T1"] = r.solution.t1;
        row["T2"] = r.solution.t2;
        row["signal_intensity"] = r.solution.signal_intensity;
        out << row.dump() << '\n';
    }
}

std::vector<RoundRecord> read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "round,x_A,p_A,x_E,p_E,x_B,p_B,T1,T2,signal_intensity") {
        throw std::runtime_error("dataset csv: missing or unexpected header");
    }
    std::vector<RoundRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                cols.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error(fmt::format("dataset csv line {}: bad number '{}'", line_no, cell));
            }
        }
        if (cols.size() != 10) throw std::runtime_error(fmt::format("dataset csv line {}: expected 10 columns", line_no));
        RoundRecord r;
        r.alice = {cols[1], cols[2]};
        r.eve = {cols[3], cols[4]};
        r.bob = {cols[5], cols[6]};
        r.solution.t1 = cols[7];
        r.solution.t2 = cols[8];
        r.solution.signal_intensity = cols[9];
        out.push_back(r);
    }
    return out;
}

}  // namespace wavattack
