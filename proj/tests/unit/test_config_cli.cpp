#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wavattack/analysis.hpp"
#include "wavattack/cli.hpp"
#include "wavattack/config.hpp"
#include "wavattack/session.hpp"

using namespace wavattack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "wavattack_unit";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch(name);
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

// "key = value" report lines.
std::map<std::string, std::string> report(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
    CHECK(parse_config("{}") == RunConfig{});
    CHECK(parse_config("// nothing\n{ /* here */ }") == RunConfig{});
}

TEST_CASE("unknown keys are rejected by dotted path") {
    try {
        (void)parse_config(R"({"attack": {"t3": 0.5}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("attack.t3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"protocl": {}})"), ConfigError);
}

TEST_CASE("bad values are config errors") {
    CHECK_THROWS_AS(parse_config(R"({"protocol": {"eta": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"protocol": {"eta": "high"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"simulation": {"n_rounds": -3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"attack": {"t2_policy": "sometimes"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"output": {"format": "xml"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
}

TEST_CASE("dump and parse round-trip") {
    RunConfig c;
    c.protocol.eta = 0.25;
    c.protocol.v_a = 4.5;
    c.coupler = {0.9, 0.31, 1.7};
    c.band = {1.1, 1.8};
    c.attack.policy = T2Policy::fixed;
    c.attack.t2 = 0.3;
    c.attack.forged_lo_intensity = 2e8;
    c.simulation = {1234, 99};
    c.sweep = {0.1, 0.9, 17};
    c.output = {"out.jsonl", OutputFormat::json_lines};
    CHECK(parse_config(dump_config(c)) == c);
    CHECK(parse_config(dump_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("echo-config prints a config that parses back") {
    const fs::path cfg = write_file("echo.json", R"({"protocol": {"eta": 0.4}, "simulation": {"seed": 7}})");
    const Outcome o = run({"--config", cfg.string(), "--echo-config"});
    CHECK(o.code == 0);
    const RunConfig back = parse_config(o.out);
    CHECK(back.protocol.eta == 0.4);
    CHECK(back.simulation.seed == 7);
}

TEST_CASE("sweep writes the table") {
    const Outcome o = run({"sweep"});
    CHECK(o.code == 0);
    CHECK(line_count(o.out) == 1002);
    const Outcome two = run({"sweep", "--steps", "2"});
    CHECK(line_count(two.out) == 3);
    CHECK(run({"sweep"}).out == o.out);
}

TEST_CASE("sweep peak from the CLI table") {
    const Outcome o = run({"sweep"});
    std::istringstream in(o.out);
    std::string line;
    std::getline(in, line);
    double best_t = 0, best_v = -1;
    while (std::getline(in, line)) {
        double t, f, s, v;
        char c;
        std::istringstream row(line);
        row >> t >> c >> f >> c >> s >> c >> v;
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    CHECK(std::abs(best_t - 0.3) <= 0.001 + 1e-12);
    CHECK(std::abs(best_v - 1.2432) <= 1e-4);
}

TEST_CASE("solve reports the closed-form branch") {
    const fs::path cfg = write_file("eta1.json", R"({"protocol": {"eta": 1.0}})");
    const Outcome o = run({"--config", cfg.string(), "solve", "--xe", "3", "--pe", "1"});
    REQUIRE(o.code == 0);
    const auto kv = report(o.out);
    CHECK(kv.at("T1") == "0.25");
    CHECK(kv.at("T2") == "0.5");
    CHECK(std::stod(kv.at("signal_intensity")) == doctest::Approx(8e4).epsilon(1e-15));
    CHECK(kv.at("branch") == "same-sign");
    CHECK(std::abs(std::stod(kv.at("lambda2")) - 1.55) < 1e-6);
}

TEST_CASE("solve handles mixed signs and zero") {
    const auto mixed = report(run({"solve", "--xe", "2", "--pe", "-1"}).out);
    CHECK(std::stod(mixed.at("relative_residual")) < 1e-9);
    CHECK(std::stod(mixed.at("T2")) < 0.5);
    const auto zero = report(run({"solve", "--xe", "0", "--pe", "0"}).out);
    CHECK(zero.at("T1") == "0.5");
    CHECK(zero.at("signal_intensity") == "0");
    const auto forced = report(run({"solve", "--xe", "2", "--pe", "-1", "--t2", "0.3"}).out);
    CHECK(std::abs(std::stod(forced.at("T2")) - 0.3) <= 0.02);
}

TEST_CASE("coupler subcommand") {
    const auto fwd = report(run({"coupler", "--lambda", "1.55"}).out);
    CHECK(std::abs(std::stod(fwd.at("transmittance")) - 0.5) < 1e-15);
    const Outcome inv = run({"coupler", "--transmittance", "0.5"});
    CHECK(inv.code == 0);
    const auto kv = report(inv.out);
    bool found = false;
    for (int i = 0; i < std::stoi(kv.at("count")); ++i) {
        found |= std::abs(std::stod(kv.at("lambda[" + std::to_string(i) + "]")) - 1.55) < 1e-9;
    }
    CHECK(found);
    CHECK(run({"coupler", "--transmittance", "1.1"}).code == cli::kInfeasible);
    CHECK(run({"coupler", "--lambda", "-1"}).code == cli::kInfeasible);
    CHECK(run({"coupler"}).code == cli::kConfigOrIo);
}

TEST_CASE("simulate writes a reproducible dataset") {
    const fs::path a = scratch("sim_a.csv");
    const fs::path b = scratch("sim_b.csv");
    const Outcome oa = run({"--seed", "11", "--out", a.string(), "simulate", "--rounds", "2000"});
    const Outcome ob = run({"--seed", "11", "--out", b.string(), "simulate", "--rounds", "2000"});
    REQUIRE(oa.code == 0);
    REQUIRE(ob.code == 0);
    CHECK(slurp(a) == slurp(b));
    auto ra = report(oa.out);
    auto rb = report(ob.out);
    ra.erase("dataset");
    rb.erase("dataset");
    CHECK(ra == rb);
    CHECK(line_count(slurp(a)) == 2001);
    CHECK(report(oa.out).count("excess_hat") == 1);
}

TEST_CASE("simulate to stdout keeps the report on stderr") {
    const Outcome o = run({"simulate", "--rounds", "200"});
    REQUIRE(o.code == 0);
    CHECK(line_count(o.out) == 201);
    CHECK(report(o.err).count("t_hat") == 1);
}

TEST_CASE("a single round is written but not estimated") {
    const fs::path p = scratch("one.csv");
    const Outcome o = run({"--out", p.string(), "simulate", "--rounds", "1"});
    CHECK(o.code == 0);
    CHECK(line_count(slurp(p)) == 2);
    CHECK(report(o.out).at("estimation").rfind("refused", 0) == 0);
}

TEST_CASE("hiding session excess matches the exact per-round prediction") {
    const fs::path p = scratch("hiding.csv");
    const Outcome o = run({"--out", p.string(), "simulate", "--rounds", "100000"});
    REQUIRE(o.code == 0);
    const auto kv = report(o.out);
    std::ifstream in(p);
    const auto records = read_dataset_csv(in);
    long double v = 0.0L;
    for (const auto& r : records) {
        v += v_be_general(r.solution.t2, r.solution.signal_intensity, 1e8, 1e8, r.solution.t1);
    }
    const double predicted_excess = 0.6 + static_cast<double>(v / records.size()) - 1.0;
    CHECK(std::abs(std::stod(kv.at("excess_hat")) - predicted_excess) < 3 * std::stod(kv.at("excess_se")));
}

TEST_CASE("exit codes for bad input") {
    CHECK(run({"--config", "/nonexistent/cfg.json", "sweep"}).code == cli::kConfigOrIo);
    CHECK(run({"frobnicate"}).code == cli::kConfigOrIo);
    CHECK(run({"solve", "--xe", "1"}).code == cli::kConfigOrIo);
    const fs::path bad = write_file("bad.json", R"({"attack": {"t3": 1}})");
    const Outcome o = run({"--config", bad.string(), "sweep"});
    CHECK(o.code == cli::kConfigOrIo);
    CHECK(o.err.find("attack.t3") != std::string::npos);
    CHECK(run({"--out", "/nonexistent/dir/out.csv", "sweep"}).code == cli::kConfigOrIo);
    CHECK(run({}).code == cli::kConfigOrIo);
}

TEST_CASE("an infeasible session exits with 3") {
    const fs::path cfg = write_file("samesign.json", R"({"attack": {"t2_policy": "same_sign_only"}})");
    const Outcome o = run({"--config", cfg.string(), "--out", scratch("ss.csv").string(), "simulate", "--rounds", "1000"});
    CHECK(o.code == cli::kInfeasible);
    CHECK(o.err.find("round") != std::string::npos);
}
