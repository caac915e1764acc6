#include "wavattack/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/core.h>

#include "wavattack/errors.hpp"

namespace wavattack {

namespace {

void check_inputs(QuadraturePair eve, double eta, double lo_amplitude) {
    if (!eve.finite()) throw DomainError("attack solver: Eve's outcome must be finite");
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) throw DomainError("attack solver: eta must lie in [0, 1]");
    if (!std::isfinite(lo_amplitude) || lo_amplitude <= 0.0) throw DomainError("attack solver: |alpha_LO| must be > 0");
}

// Smallest |1 - 2 T1| accepted before the solution is treated as singular.
constexpr double kMinImbalance = 1e-12;

struct Candidate {
    bool admissible = false;
    AttackSolution sol;
};

Candidate try_t2(double t2, QuadraturePair eve, double eta, double lo_amplitude, double forged_lo,
                 std::optional<double> max_signal_fraction) {
    Candidate c;
    if (!(t2 >= 0.0 && t2 <= 1.0)) return c;
    const double drive = std::sqrt(eta) * lo_amplitude;
    const double r_x = drive * eve.x + (1.0 - t2) * (1.0 - 2.0 * t2) * forged_lo;
    const double r_p = drive * eve.p + t2 * (1.0 - 2.0 * t2) * forged_lo;

    c.sol.t2 = t2;
    c.sol.lo_intensity = forged_lo;
    if (r_x == 0.0 && r_p == 0.0) {
        c.sol.t1 = 0.5;
        c.sol.signal_intensity = 0.0;
        c.admissible = true;
        return c;
    }
    const double sum = r_x + r_p;
    if (sum == 0.0) return c;
    const double t1 = r_p / sum;
    if (!(t1 >= 0.0 && t1 <= 1.0)) return c;
    const double imbalance = 1.0 - 2.0 * t1;
    if (std::abs(imbalance) < kMinImbalance) return c;
    const double signal = sum / imbalance;
    if (!std::isfinite(signal) || signal < 0.0) return c;
    if (max_signal_fraction && signal > *max_signal_fraction * forged_lo) return c;

    c.sol.t1 = t1;
    c.sol.signal_intensity = signal;
    c.admissible = relative_residual(c.sol, eve, eta, lo_amplitude) < kResidualTolerance;
    return c;
}

// Real roots of a t^2 + b t + c, computed without cancellation.
std::vector<double> quadratic_roots(double a, double b, double c) {
    std::vector<double> r;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return r;
    if (std::abs(a) <= 1e-14 * scale) {
        if (b != 0.0) r.push_back(-c / b);
        return r;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return r;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
        r.push_back(q / a);
        r.push_back(c / q);
    } else {
        r.push_back(0.0);
    }
    return r;
}

// The attacking equations at fixed eve as functions of t2. Every
// admissibility condition (R_x, R_p of one strict sign, R_x - R_p > 0 so
// that |a'_S|^2 = (R_x + R_p)^2 / (R_x - R_p) >= 0, and the optional cap
// on |a'_S|^2) is a quadratic inequality in t2, so the admissible set is a
// union of intervals whose ends are the roots below.
struct Problem {
    QuadraturePair eve;
    double eta;
    double lo_amplitude;
    double forged_lo;
    std::optional<double> cap;

    [[nodiscard]] double drive() const { return std::sqrt(eta) * lo_amplitude; }

    [[nodiscard]] bool admissible_interior(double t2) const {
        const double d = drive();
        const double r_x = d * eve.x + (1.0 - t2) * (1.0 - 2.0 * t2) * forged_lo;
        const double r_p = d * eve.p + t2 * (1.0 - 2.0 * t2) * forged_lo;
        if (!(r_x * r_p > 0.0)) return false;
        const double diff = r_x - r_p;
        if (!(diff > 0.0)) return false;
        const double sum = r_x + r_p;
        return !cap || sum * sum <= *cap * forged_lo * diff;
    }

    [[nodiscard]] std::vector<double> breakpoints() const {
        const double d = drive();
        const double l = forged_lo;
        std::vector<double> out;
        auto add = [&](double a, double b, double c) {
            for (double r : quadratic_roots(a, b, c)) out.push_back(r);
        };
        add(2.0 * l, -3.0 * l, l + d * eve.x);            // R_x = 0
        add(-2.0 * l, l, d * eve.p);                      // R_p = 0
        add(4.0 * l, -4.0 * l, l + d * (eve.x - eve.p));  // R_x - R_p = 0
        if (cap) {
            // (R_x + R_p)^2 = cap * l * (R_x - R_p)
            const double a0 = d * (eve.x + eve.p) + l;
            const double a1 = -2.0 * l;
            const double k = *cap * l;
            add(a1 * a1 - 4.0 * k * l, 2.0 * a0 * a1 + 4.0 * k * l, a0 * a0 - k * (l + d * (eve.x - eve.p)));
        }
        return out;
    }
};

struct Hit {
    bool found = false;
    double distance = 0.0;
    Candidate candidate;
};

// Nearest-first search of the uniform grid, visiting only nodes in (or
// one node beyond) the admissible intervals.
Candidate scan_grid(const T2Search& search, const Problem& pr, bool least_signal) {
    const double pref = search.preferred;
    const bool pref_in_range = pref >= search.lower && pref <= search.upper;
    if (pref_in_range && !least_signal) {
        Candidate c = try_t2(pref, pr.eve, pr.eta, pr.lo_amplitude, pr.forged_lo, pr.cap);
        if (c.admissible) return c;
    }
    if (search.points < 2) return {};

    const auto last = static_cast<std::ptrdiff_t>(search.points - 1);
    const double h = (search.upper - search.lower) / static_cast<double>(last);
    auto node = [&](std::ptrdiff_t i) {
        return i == last ? search.upper : search.lower + h * static_cast<double>(i);
    };

    std::vector<double> cuts{search.lower, search.upper};
    for (double b : pr.breakpoints()) {
        if (b > search.lower && b < search.upper) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());

    Hit best;
    auto better = [&](const Candidate& c, double dist) {
        if (!best.found) return true;
        if (least_signal && c.sol.signal_intensity != best.candidate.sol.signal_intensity) {
            return c.sol.signal_intensity < best.candidate.sol.signal_intensity;
        }
        return dist < best.distance || (dist == best.distance && c.sol.t2 < best.candidate.sol.t2);
    };
    auto consider = [&](std::ptrdiff_t i) {
        const double t2 = node(i);
        if (pref_in_range && t2 == pref && !least_signal) return false;
        Candidate c = try_t2(t2, pr.eve, pr.eta, pr.lo_amplitude, pr.forged_lo, pr.cap);
        if (!c.admissible) return false;
        const double dist = std::abs(t2 - pref);
        if (better(c, dist)) best = {true, dist, c};
        return true;
    };

    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        if (!(b > a) || !pr.admissible_interior(0.5 * (a + b))) continue;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::ceil((a - search.lower) / h)) - 1, 0);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor((b - search.lower) / h)) + 1, last);
        if (lo > hi) continue;
        if (least_signal) {
            // |a'_S|^2 = (R_x + R_p)^2 / (R_x - R_p) is monotone on an
            // admissible interval (its stationary points are where the sum
            // vanishes, which is not admissible, and u = C / B, which is a
            // maximum), so the least value sits at one of the ends.
            for (std::ptrdiff_t i = lo; i <= hi; ++i) {
                if (consider(i)) break;
            }
            for (std::ptrdiff_t i = hi; i >= lo; --i) {
                if (consider(i)) break;
            }
            continue;
        }
        // Walk away from pref inside [lo, hi]; the first admissible node on
        // each side is that side's nearest.
        const double pos = (pref - search.lower) / h;
        if (pos <= static_cast<double>(lo)) {
            for (std::ptrdiff_t i = lo; i <= hi; ++i) {
                if (consider(i)) break;
            }
        } else if (pos >= static_cast<double>(hi)) {
            for (std::ptrdiff_t i = hi; i >= lo; --i) {
                if (consider(i)) break;
            }
        } else {
            const auto mid = static_cast<std::ptrdiff_t>(std::floor(pos));
            for (std::ptrdiff_t i = mid; i >= lo; --i) {
                if (consider(i)) break;
            }
            for (std::ptrdiff_t i = mid + 1; i <= hi; ++i) {
                if (consider(i)) break;
            }
        }
    }
    return best.found ? best.candidate : Candidate{};
}

Candidate scan_list(const T2Search& search, const Problem& pr) {
    for (double t2 : search.candidates) {
        Candidate c = try_t2(t2, pr.eve, pr.eta, pr.lo_amplitude, pr.forged_lo, pr.cap);
        if (c.admissible) return c;
    }
    return {};
}

}  // namespace

Residuals attack_residuals(const AttackSolution& sol, QuadraturePair eve, double eta, double lo_amplitude) {
    const double drive = std::sqrt(eta) * lo_amplitude;
    const double t1 = sol.t1;
    const double t2 = sol.t2;
    Residuals r;
    r.x = (1.0 - t1) * (1.0 - 2.0 * t1) * sol.signal_intensity - (1.0 - t2) * (1.0 - 2.0 * t2) * sol.lo_intensity -
          drive * eve.x;
    r.p = t1 * (1.0 - 2.0 * t1) * sol.signal_intensity - t2 * (1.0 - 2.0 * t2) * sol.lo_intensity - drive * eve.p;
    return r;
}

double residual_scale(QuadraturePair eve, double eta, double lo_amplitude) {
    const double root_eta = std::max(std::sqrt(eta), 1e-3);
    return root_eta * lo_amplitude * std::max({std::abs(eve.x), std::abs(eve.p), 1.0});
}

double relative_residual(const AttackSolution& sol, QuadraturePair eve, double eta, double lo_amplitude) {
    const Residuals r = attack_residuals(sol, eve, eta, lo_amplitude);
    return std::max(std::abs(r.x), std::abs(r.p)) / residual_scale(eve, eta, lo_amplitude);
}

AttackSolution solve_same_sign(QuadraturePair eve, double eta, double lo_amplitude,
                               std::optional<double> forged_lo_intensity) {
    check_inputs(eve, eta, lo_amplitude);
    if (!(eve.x * eve.p > 0.0)) {
        throw WrongBranchError("solve_same_sign: x_E and p_E must share a strict sign; use solve_general");
    }
    if (eve.x == eve.p) {
        throw WrongBranchError("solve_same_sign: x_E = p_E puts T1 at 1/2, where the reduced equations are singular; "
                               "use solve_general");
    }
    AttackSolution sol;
    sol.t2 = 0.5;
    sol.lo_intensity = forged_lo_intensity.value_or(lo_amplitude * lo_amplitude);
    if (!(sol.lo_intensity > 0.0)) throw DomainError("solve_same_sign: forged LO intensity must be > 0");
    sol.t1 = eve.p / (eve.x + eve.p);
    sol.signal_intensity = std::sqrt(eta) * eve.p * lo_amplitude / (sol.t1 * (1.0 - 2.0 * sol.t1));
    if (sol.signal_intensity < 0.0) {
        throw WrongBranchError(fmt::format(
            "solve_same_sign: T1 = {:.17g} requires a negative signal intensity at T2 = 1/2; use solve_general", sol.t1));
    }
    return sol;
}

T2Search T2Search::forced(double t2) {
    T2Search s;
    s.preferred = t2;
    s.candidates = {t2};
    s.max_signal_fraction.reset();
    s.fallback_signal_fraction.reset();
    return s;
}

T2Search T2Search::local(double centre, double step, double half_width) {
    if (!(step > 0.0) || !(half_width > 0.0)) throw DomainError("T2Search::local: step and half_width must be > 0");
    T2Search s;
    s.preferred = centre;
    s.lower = std::max(centre - half_width, step);
    s.upper = std::min(centre + half_width, 1.0 - step);
    s.points = s.upper > s.lower ? static_cast<std::size_t>(std::llround((s.upper - s.lower) / step)) + 1 : 1;
    return s;
}

AttackSolution solve_general(QuadraturePair eve, double eta, double lo_amplitude, double forged_lo_intensity,
                             const T2Search& search) {
    check_inputs(eve, eta, lo_amplitude);
    if (!std::isfinite(forged_lo_intensity) || forged_lo_intensity <= 0.0) {
        throw DomainError("solve_general: forged LO intensity must be > 0");
    }
    // Passes in turn: nearest t2 under each signal cap, then the least
    // signal anywhere in range. The caps rank candidates and never make an
    // outcome infeasible. Outcomes with p_E > x_E need |a'_S|^2 > |a'_LO|^2
    // at every t2 and always reach a later pass.
    struct Pass {
        std::optional<double> cap;
        bool least_signal;
    };
    std::vector<Pass> passes;
    if (search.max_signal_fraction) passes.push_back({search.max_signal_fraction, false});
    if (search.fallback_signal_fraction) passes.push_back({search.fallback_signal_fraction, false});
    if (search.least_signal_fallback) passes.push_back({std::nullopt, true});

    Candidate found;
    for (const Pass& pass : passes) {
        const Problem pr{eve, eta, lo_amplitude, forged_lo_intensity, pass.cap};
        found = search.candidates.empty() ? scan_grid(search, pr, pass.least_signal) : scan_list(search, pr);
        if (found.admissible) break;
    }
    if (!found.admissible) {
        if (!search.candidates.empty()) {
            throw InfeasibleError(fmt::format("solve_general: no admissible T2 among {} given candidate(s) for "
                                              "(x_E, p_E) = ({:.17g}, {:.17g})",
                                              search.candidates.size(), eve.x, eve.p));
        }
        throw InfeasibleError(fmt::format("solve_general: no admissible T2 in [{:.17g}, {:.17g}] ({} points) for "
                                          "(x_E, p_E) = ({:.17g}, {:.17g})",
                                          search.lower, search.upper, search.points, eve.x, eve.p));
    }
    return found.sol;
}

AttackSolution realize_wavelengths(AttackSolution sol, const CouplerModel& model, const WavelengthBand& band,
                                   const InversionOptions& options) {
    auto nearest_telecom = [&](double t) -> std::optional<double> {
        std::vector<double> lambdas;
        try {
            lambdas = invert_transmittance(model, t, band, options);
        } catch (const NoSolutionError&) {
            return std::nullopt;
        }
        if (lambdas.empty()) return std::nullopt;
        return *std::min_element(lambdas.begin(), lambdas.end(), [](double a, double b) {
            return std::abs(a - kTelecomWavelength) < std::abs(b - kTelecomWavelength);
        });
    };
    const auto l1 = nearest_telecom(sol.t1);
    const auto l2 = nearest_telecom(sol.t2);
    if (!l1 || !l2) {
        std::string which;
        if (!l1) which += fmt::format("t1 = {:.17g}", sol.t1);
        if (!l2) which += fmt::format("{}t2 = {:.17g}", which.empty() ? "" : ", ", sol.t2);
        throw InfeasibleError(fmt::format("realize_wavelengths: no wavelength in [{:.17g}, {:.17g}] um realizes {}",
                                          band.lambda_min, band.lambda_max, which));
    }
    sol.lambda1 = l1;
    sol.lambda2 = l2;
    return sol;
}

}  // namespace wavattack
