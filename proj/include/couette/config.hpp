#pragma once

#include "couette/ledger.hpp"
#include "couette/linear_lab.hpp"
#include "couette/multipliers.hpp"
#include "couette/simulation.hpp"
#include "couette/threshold.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace couette {

/// Flat key = value pairs. Blank lines and lines starting with '#' are skipped.
using ConfigMap = std::map<std::string, std::string>;

/// Throws ValidationError on malformed lines and duplicate keys.
ConfigMap parse_config(std::string_view text);
ConfigMap read_config_file(const std::string& path);

struct LinearRequest {
    LinearParams params{0.0, 1.0};
    int k = 1;
    double eta = 0.0;
    double t_end = 100.0;
    double dt = 0.1;
    double c = 1.0 / 12.0;
    double f0 = 1.0;
    double theta0 = 0.0;
};

enum class ConfigTarget { simulation, linear, toy, multipliers };

const std::set<std::string>& allowed_keys(ConfigTarget target);

/// Each loader rejects keys outside its schema, fills documented defaults,
/// and enforces the type's constraints.
SimConfig load_sim_config(const ConfigMap& map);
LinearRequest load_linear_config(const ConfigMap& map);
ToyConfig load_toy_config(const ConfigMap& map);
MultiplierParams load_multiplier_params(const ConfigMap& map);

using AnyConfig = std::variant<SimConfig, LinearRequest, ToyConfig, MultiplierParams>;
AnyConfig load_config(const std::string& path, ConfigTarget target);

/// Canonical key = value text for a simulation config (manifest snapshot).
ConfigMap to_map(const SimConfig& config);

/// 17 significant digits.
std::string format_double(double v);

extern const char* const kTimeseriesHeader;

void write_timeseries(const std::vector<EnergyLedger>& ledgers, const std::string& path);
std::vector<EnergyLedger> read_timeseries(const std::string& path);

struct RunManifest {
    std::string command;
    ConfigMap config;
    std::string code_version;
    std::uint64_t seed = 0;
    std::string start_time;
    std::string end_time;
    std::vector<std::string> outputs;
    int exit_status = 0;
    std::string note;
};

std::string utc_timestamp();
/// Appends one JSON line; existing lines are never rewritten.
void append_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace couette
