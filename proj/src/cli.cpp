#include "wavattack/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "wavattack/analysis.hpp"
#include "wavattack/attack.hpp"
#include "wavattack/config.hpp"
#include "wavattack/coupler.hpp"
#include "wavattack/errors.hpp"
#include "wavattack/session.hpp"

namespace wavattack::cli {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Opens `path` for writing ("-" means `fallback`) and hands the stream to `write`.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
    if (path == "-") {
        write(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(fmt::format("cannot open '{}' for writing", path));
    write(file);
    file.flush();
    if (!file) throw IoError(fmt::format("write to '{}' failed", path));
}

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_path;
    bool echo_config = false;
};

RunConfig resolve_config(const GlobalOptions& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) c.simulation.seed = *o.seed;
    if (o.out_path) c.output.path = *o.out_path;
    c.validate();
    return c;
}

InversionOptions inversion(const RunConfig& c) {
    InversionOptions opt;
    opt.grid_points = c.coupler_grid_points;
    return opt;
}

std::string band_text(const WavelengthBand& b) { return fmt::format("[{}, {}]", num(b.lambda_min), num(b.lambda_max)); }

// Hiding root whose fake-LO wavelength is realizable in the band and
// closest to 1.55 um.
double choose_hiding_t2(const RunConfig& c) {
    const std::vector<double> roots = hiding_t2(c.protocol.eta);
    std::optional<double> best_t2;
    double best_distance = 0.0;
    for (double t2 : roots) {
        if (t2 <= 0.0 || t2 >= 1.0) continue;
        std::vector<double> lambdas;
        try {
            lambdas = invert_transmittance(c.coupler, t2, c.band, inversion(c));
        } catch (const NoSolutionError&) {
            continue;
        }
        for (double l : lambdas) {
            const double d = std::abs(l - kTelecomWavelength);
            if (!best_t2 || d < best_distance) {
                best_t2 = t2;
                best_distance = d;
            }
        }
    }
    if (!best_t2) {
        throw InfeasibleError(fmt::format("no hiding T2 for eta = {} is realizable by the coupler in {} um",
                                          num(c.protocol.eta), band_text(c.band)));
    }
    return *best_t2;
}

int cmd_sweep(const RunConfig& c, std::optional<std::size_t> steps, std::optional<double> t2_min,
              std::optional<double> t2_max, std::ostream& out) {
    SweepConfig s = c.sweep;
    if (steps) s.steps = *steps;
    if (t2_min) s.t2_min = *t2_min;
    if (t2_max) s.t2_max = *t2_max;
    const auto rows = sweep_v_be(s.t2_min, s.t2_max, s.steps);
    with_output(c.output.path, out, [&](std::ostream& os) { write_sweep_csv(rows, os); });
    return kSuccess;
}

int cmd_solve(const RunConfig& c, QuadraturePair eve, std::optional<double> forced_t2, std::ostream& out) {
    const ProtocolParams& p = c.protocol;
    const double forged_lo = c.attack.forged_lo_intensity.value_or(p.lo_intensity);
    AttackSolution sol;
    std::string branch;
    if (c.attack.policy == T2Policy::same_sign_only && !forced_t2) {
        sol = solve_same_sign(eve, p.eta, p.lo_amplitude(), forged_lo);
        branch = "same-sign";
    } else if (forced_t2) {
        sol = solve_general(eve, p.eta, p.lo_amplitude(), forged_lo,
                            T2Search::local(*forced_t2, c.attack.search_step, c.attack.search_half_width));
        branch = "general";
    } else {
        sol = solve_general(eve, p.eta, p.lo_amplitude(), forged_lo);
        branch = (eve.x * eve.p > 0.0 && sol.t2 == 0.5) ? "same-sign" : "general";
    }
    std::string lambda1 = "unrealizable";
    std::string lambda2 = "unrealizable";
    try {
        const AttackSolution realized = realize_wavelengths(sol, c.coupler, c.band, inversion(c));
        lambda1 = num(*realized.lambda1);
        lambda2 = num(*realized.lambda2);
    } catch (const InfeasibleError&) {
        // Partial realization is still worth reporting.
        for (auto [t, slot] : {std::pair{sol.t1, &lambda1}, std::pair{sol.t2, &lambda2}}) {
            try {
                const auto ls = invert_transmittance(c.coupler, t, c.band, inversion(c));
                if (!ls.empty()) {
                    *slot = num(*std::min_element(ls.begin(), ls.end(), [](double a, double b) {
                        return std::abs(a - kTelecomWavelength) < std::abs(b - kTelecomWavelength);
                    }));
                }
            } catch (const NoSolutionError&) {
            }
        }
    }
    const Residuals r = attack_residuals(sol, eve, p.eta, p.lo_amplitude());
    out << "x_E = " << num(eve.x) << '\n';
    out << "p_E = " << num(eve.p) << '\n';
    out << "branch = " << branch << '\n';
    out << "T1 = " << num(sol.t1) << '\n';
    out << "T2 = " << num(sol.t2) << '\n';
    out << "signal_intensity = " << num(sol.signal_intensity) << '\n';
    out << "lo_intensity = " << num(sol.lo_intensity) << '\n';
    out << "lambda1 = " << lambda1 << '\n';
    out << "lambda2 = " << lambda2 << '\n';
    out << "residual_x = " << num(r.x) << '\n';
    out << "residual_p = " << num(r.p) << '\n';
    out << "relative_residual = " << num(relative_residual(sol, eve, p.eta, p.lo_amplitude())) << '\n';
    return kSuccess;
}

int cmd_simulate(const RunConfig& c, std::optional<std::size_t> rounds, std::ostream& out, std::ostream& err) {
    AttackConfig attack = c.attack;
    if (attack.policy == T2Policy::hiding) {
        attack.t2 = choose_hiding_t2(c);
        attack.policy = T2Policy::fixed;
    }
    const std::size_t n = rounds.value_or(c.simulation.n_rounds);
    const SessionDataset ds = run_session(c.protocol, attack, n, c.simulation.seed);
    with_output(c.output.path, out, [&](std::ostream& os) {
        if (c.output.format == OutputFormat::csv) {
            write_dataset_csv(ds, os);
        } else {
            write_dataset_jsonl(ds, os);
        }
    });

    // The dataset owns stdout when written there.
    std::ostream& report = c.output.path == "-" ? err : out;
    report << "rounds = " << n << '\n';
    report << "seed = " << c.simulation.seed << '\n';
    report << "t2 = " << num(ds.session_t2) << '\n';
    report << "dataset = " << c.output.path << '\n';
    report << "predicted_v_ba_closed_form = " << num(v_ba(c.protocol.eta, ds.session_t2)) << '\n';
    try {
        const EstimationReport e = estimate_parameters(ds);
        report << "t_hat = " << num(e.t_hat) << '\n';
        report << "t_se = " << num(e.t_se) << '\n';
        report << "v_ba_hat = " << num(e.v_ba_hat) << '\n';
        report << "excess_hat = " << num(e.excess_hat) << '\n';
        report << "excess_se = " << num(e.excess_se) << '\n';
        report << "epsilon = " << num(c.protocol.epsilon) << '\n';
        report << "attack_detected = " << (e.attack_detected ? "true" : "false") << '\n';
    } catch (const InsufficientDataError& e) {
        report << "estimation = refused: " << e.what() << '\n';
    }
    return kSuccess;
}

int cmd_coupler(const RunConfig& c, std::optional<double> lambda, std::optional<double> target, std::ostream& out) {
    if (lambda) {
        out << "lambda = " << num(*lambda) << '\n';
        out << "transmittance = " << num(transmittance(c.coupler, *lambda)) << '\n';
        return kSuccess;
    }
    const std::vector<double> ls = invert_transmittance(c.coupler, *target, c.band, inversion(c));
    out << "transmittance = " << num(*target) << '\n';
    out << "band = " << band_text(c.band) << '\n';
    out << "count = " << ls.size() << '\n';
    for (std::size_t i = 0; i < ls.size(); ++i) out << "lambda[" << i << "] = " << num(ls[i]) << '\n';
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wavelength-attack simulator for heterodyne CV-QKD", "wavattack"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Override simulation.seed");
    app.add_option("--out", g.out_path, "Override output.path ('-' for stdout)");
    app.add_flag("--echo-config", g.echo_config, "Print the resolved config and exit");

    std::optional<std::size_t> steps;
    std::optional<double> t2_min, t2_max;
    CLI::App* sweep = app.add_subcommand("sweep", "Tabulate V_B|E and its two terms over T2");
    sweep->add_option("--steps", steps, "Number of grid points");
    sweep->add_option("--t2-min", t2_min);
    sweep->add_option("--t2-max", t2_max);

    double xe = 0.0, pe = 0.0;
    std::optional<double> solve_t2;
    CLI::App* solve = app.add_subcommand("solve", "Solve the attacking equations for one outcome");
    solve->add_option("--xe", xe, "Eve's x quadrature")->required();
    solve->add_option("--pe", pe, "Eve's p quadrature")->required();
    solve->add_option("--t2", solve_t2, "Search T2 near this value instead of near 1/2");

    std::optional<std::size_t> rounds;
    CLI::App* simulate = app.add_subcommand("simulate", "Run a seeded session and estimate parameters");
    simulate->add_option("--rounds", rounds, "Override simulation.n_rounds");

    std::optional<double> lambda, target;
    CLI::App* coupler = app.add_subcommand("coupler", "Evaluate or invert the coupler transmittance");
    auto* lambda_opt = coupler->add_option("--lambda", lambda, "Wavelength in micrometers");
    auto* target_opt = coupler->add_option("--transmittance", target, "Target transmittance");
    lambda_opt->excludes(target_opt);
    coupler->require_option(1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigOrIo;
    }

    RunConfig config;
    try {
        config = resolve_config(g);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigOrIo;
    }
    if (g.echo_config) {
        out << dump_config(config);
        return kSuccess;
    }

    try {
        if (*sweep) return cmd_sweep(config, steps, t2_min, t2_max, out);
        if (*solve) return cmd_solve(config, {xe, pe}, solve_t2, out);
        if (*simulate) return cmd_simulate(config, rounds, out, err);
        if (*coupler) return cmd_coupler(config, lambda, target, out);
        err << "error: a subcommand is required (sweep, solve, simulate, coupler)\n";
        return kConfigOrIo;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigOrIo;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kInfeasible;
    }
}

}  // namespace wavattack::cli
