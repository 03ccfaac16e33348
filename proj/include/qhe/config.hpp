// config.hpp: Run configuration: JSON schema, defaults, named presets.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhe/thermodynamics.hpp"

namespace qhe {

/// Bad input: unparseable JSON, unknown or mistyped fields, invalid values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
    std::vector<EngineType> engine_types;
    double m{1.0};                  // tau_cyc = 6 m tau_d unless tau_cyc is set
    std::optional<double> tau_cyc;
    std::size_t n_cycles{10};

    friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct ExperimentConfig {
    Dephasing::Mode dephasing{Dephasing::Mode::none};  // steady, transient, sweep
    std::optional<double> dephasing_rate;              // default 1 / (100 tau_d)
    std::string axis{"action"};                        // sweep: action | gamma
    std::vector<double> actions;
    std::vector<double> gammas;
    std::vector<double> m_values;                      // signature tau grid
    std::string initial_state{"excited"};              // excited | ground | mixed | steady
    std::uint64_t seed{20240601};
    std::size_t permutations{20};
    std::string inject_fault{"none"};                  // verify: none | trace_violation

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct OutputConfig {
    std::optional<std::string> format;  // csv | json; per-command default when unset
    std::optional<std::string> directory;
    int jobs{1};

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
    std::optional<std::string> preset;
    EngineModel model;
    ScheduleConfig schedule;
    ExperimentConfig experiment;
    OutputConfig output;

    double tau() const;
    double dephasing_rate() const;
    Dephasing dephasing() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Default configuration as JSON.
nlohmann::json default_config_json();

const std::vector<std::string>& preset_names();
/// Patch applied over the defaults; throws ConfigError for unknown names.
nlohmann::json preset_patch(const std::string& name);

/// Parses text, reporting line and column of syntax errors.
nlohmann::json parse_config_text(const std::string& text, const std::string& source);

/// JSON merge patch that also keeps the model block's two spellings (explicit
/// levels or the delta_e_hot/delta_e_cold shorthand) from colliding.
void apply_patch(nlohmann::json& base, const nlohmann::json& patch);

/// Strict conversion: unknown keys, wrong types and invalid values throw
/// ConfigError naming the JSON path.
RunConfig config_from_json(const nlohmann::json& j);

/// Fully explicit form; config_from_json(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& c);

/// Defaults, then the preset, then the file, each as a merge patch.
RunConfig load_config(const std::optional<std::string>& preset,
                      const std::optional<std::string>& path);

}  // namespace qhe
