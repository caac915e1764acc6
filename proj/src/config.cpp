#include "wavattack/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "wavattack/errors.hpp"

namespace wavattack {

using nlohmann::json;

namespace {

class Section {
public:
    Section(const json& node, std::string path, std::set<std::string> allowed) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", path_));
        for (const auto& [key, value] : node_.items()) {
            if (!allowed.contains(key)) throw ConfigError(fmt::format("config: unknown key '{}'", where(key)));
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

    void read(const std::string& key, double& out) const {
        if (!has(key)) return;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(fmt::format("config: '{}' must be a number", where(key)));
        out = v.get<double>();
    }

    template <class Unsigned>
    void read_unsigned(const std::string& key, Unsigned& out) const {
        if (!has(key)) return;
        const json& v = node_.at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError(fmt::format("config: '{}' must be a non-negative integer", where(key)));
        }
        out = v.get<Unsigned>();
    }

    void read(const std::string& key, std::string& out) const {
        if (!has(key)) return;
        const json& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(fmt::format("config: '{}' must be a string", where(key)));
        out = v.get<std::string>();
    }

    [[nodiscard]] const json& at(const std::string& key) const { return node_.at(key); }
    [[nodiscard]] std::string where(const std::string& key) const { return path_ + "." + key; }

private:
    const json& node_;
    std::string path_;
};

std::string policy_name(T2Policy p) {
    switch (p) {
        case T2Policy::fixed: return "fixed";
        case T2Policy::hiding: return "hiding";
        case T2Policy::same_sign_only: return "same_sign_only";
    }
    return "?";
}

std::string format_name(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json-lines"; }

}  // namespace

void RunConfig::validate() const {
    auto guard = [](const char* section, auto&& check) {
        try {
            check();
        } catch (const DomainError& e) {
            throw ConfigError(fmt::format("config: invalid '{}': {}", section, e.what()));
        }
    };
    guard("protocol", [&] { protocol.validate(); });
    guard("coupler", [&] {
        coupler.validate();
        band.validate();
        if (coupler_grid_points < 3) throw DomainError("grid_points must be >= 3");
    });
    guard("attack", [&] {
        if (attack.policy == T2Policy::fixed && !(attack.t2 > 0.0 && attack.t2 < 1.0)) {
            throw DomainError("t2 must lie in (0, 1)");
        }
        if (attack.forged_lo_intensity && !(*attack.forged_lo_intensity > 0.0)) {
            throw DomainError("forged_lo_intensity must be > 0");
        }
        if (!(attack.search_step > 0.0) || !(attack.search_half_width > 0.0)) {
            throw DomainError("search_step and search_half_width must be > 0");
        }
    });
    guard("simulation", [&] {
        if (simulation.n_rounds < 1) throw DomainError("n_rounds must be >= 1");
    });
    guard("sweep", [&] {
        if (!(sweep.t2_min >= 0.0 && sweep.t2_min < sweep.t2_max && sweep.t2_max <= 1.0)) {
            throw DomainError("require 0 <= t2_min < t2_max <= 1");
        }
        if (sweep.steps < 2) throw DomainError("steps must be >= 2");
    });
    guard("output", [&] {
        if (output.path.empty()) throw DomainError("path must not be empty");
    });
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config: not valid JSON: {}", e.what()));
    }
    RunConfig c;
    const Section top(root, "config", {"protocol", "coupler", "attack", "simulation", "sweep", "output"});

    if (top.has("protocol")) {
        const Section s(top.at("protocol"), "protocol", {"v_a", "eta", "lo_intensity", "epsilon", "n0"});
        s.read("v_a", c.protocol.v_a);
        s.read("eta", c.protocol.eta);
        s.read("lo_intensity", c.protocol.lo_intensity);
        s.read("epsilon", c.protocol.epsilon);
        s.read("n0", c.protocol.n0.n0);
    }
    if (top.has("coupler")) {
        const Section s(top.at("coupler"), "coupler", {"f", "c", "w", "lambda_min", "lambda_max", "grid_points"});
        s.read("f", c.coupler.f);
        s.read("c", c.coupler.c);
        s.read("w", c.coupler.w);
        s.read("lambda_min", c.band.lambda_min);
        s.read("lambda_max", c.band.lambda_max);
        s.read_unsigned("grid_points", c.coupler_grid_points);
    }
    if (top.has("attack")) {
        const Section s(top.at("attack"), "attack",
                        {"t2_policy", "t2", "forged_lo_intensity", "search_step", "search_half_width"});
        std::string policy = policy_name(c.attack.policy);
        s.read("t2_policy", policy);
        if (policy == "fixed") {
            c.attack.policy = T2Policy::fixed;
        } else if (policy == "hiding") {
            c.attack.policy = T2Policy::hiding;
        } else if (policy == "same_sign_only") {
            c.attack.policy = T2Policy::same_sign_only;
        } else {
            throw ConfigError(fmt::format("config: '{}' must be fixed, hiding or same_sign_only", s.where("t2_policy")));
        }
        s.read("t2", c.attack.t2);
        if (s.has("forged_lo_intensity")) {
            double lo = 0.0;
            s.read("forged_lo_intensity", lo);
            c.attack.forged_lo_intensity = lo;
        }
        s.read("search_step", c.attack.search_step);
        s.read("search_half_width", c.attack.search_half_width);
    }
    if (top.has("simulation")) {
        const Section s(top.at("simulation"), "simulation", {"n_rounds", "seed"});
        s.read_unsigned("n_rounds", c.simulation.n_rounds);
        s.read_unsigned("seed", c.simulation.seed);
    }
    if (top.has("sweep")) {
        const Section s(top.at("sweep"), "sweep", {"t2_min", "t2_max", "steps"});
        s.read("t2_min", c.sweep.t2_min);
        s.read("t2_max", c.sweep.t2_max);
        s.read_unsigned("steps", c.sweep.steps);
    }
    if (top.has("output")) {
        const Section s(top.at("output"), "output", {"path", "format"});
        s.read("path", c.output.path);
        std::string format = format_name(c.output.format);
        s.read("format", format);
        if (format == "csv") {
            c.output.format = OutputFormat::csv;
        } else if (format == "json-lines") {
            c.output.format = OutputFormat::json_lines;
        } else {
            throw ConfigError(fmt::format("config: '{}' must be csv or json-lines", s.where("format")));
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("config: cannot read '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["protocol"] = {{"v_a", c.protocol.v_a},
                     {"eta", c.protocol.eta},
                     {"lo_intensity", c.protocol.lo_intensity},
                     {"epsilon", c.protocol.epsilon},
                     {"n0", c.protocol.n0.n0}};
    j["coupler"] = {{"f", c.coupler.f},
                    {"c", c.coupler.c},
                    {"w", c.coupler.w},
                    {"lambda_min", c.band.lambda_min},
                    {"lambda_max", c.band.lambda_max},
                    {"grid_points", c.coupler_grid_points}};
    nlohmann::ordered_json attack = {{"t2_policy", policy_name(c.attack.policy)}, {"t2", c.attack.t2}};
    attack["forged_lo_intensity"] =
        c.attack.forged_lo_intensity ? nlohmann::ordered_json(*c.attack.forged_lo_intensity) : nlohmann::ordered_json();
    attack["search_step"] = c.attack.search_step;
    attack["search_half_width"] = c.attack.search_half_width;
    j["attack"] = attack;
    j["simulation"] = {{"n_rounds", c.simulation.n_rounds}, {"seed", c.simulation.seed}};
    j["sweep"] = {{"t2_min", c.sweep.t2_min}, {"t2_max", c.sweep.t2_max}, {"steps", c.sweep.steps}};
    j["output"] = {{"path", c.output.path}, {"format", format_name(c.output.format)}};
    return j.dump(2) + "\n";
}

}  // namespace wavattack
