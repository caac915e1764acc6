#include "wavattack/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "wavattack/errors.hpp"
#include "wavattack/roots.hpp"
#include "wavattack/session.hpp"

namespace wavattack {

namespace {

void check_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw DomainError(fmt::format("{} must lie in [0, 1], got {}", what, v));
}

double first_term(double t) { return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t) * (1.0 - 2.0 * t); }
double second_term(double t) { return 8.0 * t * (1.0 - t) * (1.0 - t); }

}  // namespace

VarianceReport v_be_closed_form(double t2, double eta) {
    check_unit(t2, "t2");
    check_unit(eta, "eta");
    VarianceReport r;
    r.first_term = first_term(t2);
    r.second_term = second_term(t2);
    r.v_be = r.first_term + r.second_term;
    r.v_ba = eta + r.v_be;
    return r;
}

double v_be_slope(double t) {
    // d/dt [2 t (1-t) (1-2t)^2] = 2 (1-2t)^3 - 8 t (1-t)(1-2t)
    // d/dt [8 t (1-t)^2]       = 8 (1-t)^2 - 16 t (1-t)
    const double u = 1.0 - 2.0 * t;
    return 2.0 * u * u * u - 8.0 * t * (1.0 - t) * u + 8.0 * (1.0 - t) * (1.0 - t) - 16.0 * t * (1.0 - t);
}

double v_be_general(double t2, double signal_intensity, double lo_intensity, double genuine_lo_intensity, double t1) {
    check_unit(t1, "t1");
    check_unit(t2, "t2");
    if (signal_intensity < 0.0 || lo_intensity < 0.0) throw DomainError("v_be_general: intensities must be >= 0");
    if (!(genuine_lo_intensity > 0.0)) throw DomainError("v_be_general: genuine LO intensity must be > 0");
    const double s1 = 4.0 * t1 * (1.0 - t1);
    const double s2 = 4.0 * t2 * (1.0 - t2);
    const double u1 = 1.0 - 2.0 * t1;
    const double u2 = 1.0 - 2.0 * t2;
    const double numerator = u1 * u1 * s1 * signal_intensity + u2 * u2 * s2 * lo_intensity +
                             4.0 * (1.0 - t1) * signal_intensity * s1 + 4.0 * (1.0 - t2) * lo_intensity * s2;
    return numerator / (2.0 * genuine_lo_intensity);
}

double v_ba(double eta, double t2) { return v_be_closed_form(t2, eta).v_ba; }

Extremum v_be_max() {
    // The slope is +10 at 0 and -2 at 1 with a single real root between.
    const double t = roots::bisect(v_be_slope, 0.0, 1.0);
    return {t, v_be_closed_form(t).v_be};
}

std::vector<double> hiding_t2(double eta, std::size_t grid_points) {
    check_unit(eta, "eta");
    const double target = 1.0 - eta;
    const Extremum peak = v_be_max();
    if (target > peak.value) {
        // Within rounding of the peak the two branches meet at the argmax.
        if (target - peak.value <= 1e-15) return {peak.t2};
        throw InfeasibleError(fmt::format("hiding_t2: target {:.17g} exceeds the maximum {:.17g} of V_B|E", target,
                                          peak.value));
    }
    auto residual = [target](double t) { return first_term(t) + second_term(t) - target; };
    std::vector<double> r = roots::bracket_roots(residual, 0.0, 1.0, grid_points);
    if (r.empty()) return {peak.t2};
    return r;
}

std::vector<SweepRow> sweep_v_be(double t2_min, double t2_max, std::size_t steps) {
    check_unit(t2_min, "t2_min");
    check_unit(t2_max, "t2_max");
    if (!(t2_min < t2_max)) throw DomainError("sweep_v_be: require t2_min < t2_max");
    if (steps < 2) throw DomainError("sweep_v_be: require steps >= 2");
    std::vector<SweepRow> rows;
    rows.reserve(steps);
    const double h = (t2_max - t2_min) / static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = i + 1 == steps ? t2_max : t2_min + h * static_cast<double>(i);
        const VarianceReport v = v_be_closed_form(t);
        rows.push_back({t, v.first_term, v.second_term, v.v_be});
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "t2,first_term,second_term,v_be\n";
    for (const SweepRow& r : rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t2, r.first_term, r.second_term, r.v_be);
    }
}

EstimationReport estimate_parameters(const SessionDataset& dataset, const EstimationOptions& options) {
    const std::size_t n = dataset.records.size();
    if (n < kMinEstimationRounds) {
        throw InsufficientDataError(
            fmt::format("estimate_parameters: {} round(s), at least {} required", n, kMinEstimationRounds));
    }
    const double gain = std::sqrt(dataset.params.eta / 2.0);
    const double n0 = dataset.params.n0.n0;

    // Welford accumulation of means and co-moments.
    double m = 0.0, mean_a = 0.0, mean_b = 0.0, mean_r = 0.0;
    double caa = 0.0, cab = 0.0, cbb = 0.0, crr = 0.0;
    auto add = [&](double a, double b) {
        m += 1.0;
        const double r = b - gain * a;
        const double da = a - mean_a;
        const double db = b - mean_b;
        const double dr = r - mean_r;
        mean_a += da / m;
        mean_b += db / m;
        mean_r += dr / m;
        caa += da * (a - mean_a);
        cab += da * (b - mean_b);
        cbb += db * (b - mean_b);
        crr += dr * (r - mean_r);
    };
    for (const RoundRecord& rec : dataset.records) {
        add(rec.alice.x, rec.bob.x);
        if (options.pool_quadratures) add(rec.alice.p, rec.bob.p);
    }

    EstimationReport rep;
    rep.n_rounds = n;
    rep.n_samples = static_cast<std::size_t>(m);
    if (caa > 0.0) {
        rep.t_hat = cab / caa;
        const double ssr = std::max(cbb - rep.t_hat * cab, 0.0);
        rep.t_se = std::sqrt(ssr / (m - 2.0) / caa);
    }
    rep.v_ba_hat = crr / (m - 1.0) / n0;
    rep.excess_hat = rep.v_ba_hat - 1.0;
    rep.excess_se = rep.v_ba_hat * std::sqrt(2.0 / (m - 1.0));
    rep.attack_detected = rep.excess_hat > dataset.params.epsilon;
    return rep;
}

}  // namespace wavattack
