#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "wavattack/coupler.hpp"
#include "wavattack/session.hpp"
#include "wavattack/units.hpp"

namespace wavattack {

/// Bad or unreadable configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json_lines };

struct SimulationConfig {
    std::size_t n_rounds = 100000;
    std::uint64_t seed = 42;

    friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct SweepConfig {
    double t2_min = 0.0;
    double t2_max = 1.0;
    std::size_t steps = 1001;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct OutputConfig {
    std::string path = "-";  ///< "-" is standard output
    OutputFormat format = OutputFormat::csv;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
    ProtocolParams protocol;
    CouplerModel coupler = CouplerModel::calibrated_default();
    WavelengthBand band;
    std::size_t coupler_grid_points = 10000;
    AttackConfig attack;
    SimulationConfig simulation;
    SweepConfig sweep;
    OutputConfig output;

    /// Nested invariants; throws ConfigError naming the section.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the JSON config (// and /* */ comments allowed). Every key is
/// optional and defaults as in RunConfig; unknown keys are rejected with
/// their dotted path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON rendering. parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

}  // namespace wavattack
