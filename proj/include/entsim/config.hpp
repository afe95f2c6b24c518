#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "entsim/engine.hpp"

namespace entsim {

using ordered_json = nlohmann::ordered_json;

// Sweep-specific knobs (the CLI's fidelity-curve / buffer-sweep / rate-sweep
// subcommands read these; plain `run` ignores them).
struct SweepSpec {
    std::vector<double> latencies_s;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<double> fidelity_thresholds;
    std::vector<double> time_grid_s;
    std::vector<std::string> technologies;
};

struct LoadedConfig {
    RunConfig run;
    SweepSpec sweep;
    ordered_json echo;  // normalized effective config; reloading it reproduces the run
};

// Strict loader: unknown keys are config errors (keys starting with '_' are
// comments and ignored). Every default the loader fills in appears in `echo`.
// A relative latency samples_file is resolved against base_dir (empty: the
// working directory); load_config_file passes the config file's directory.
LoadedConfig load_config(const ordered_json& j, const std::string& base_dir = "");
LoadedConfig load_config_text(const std::string& text, const std::string& base_dir = "");
LoadedConfig load_config_file(const std::string& path);

const std::vector<std::string>& preset_names();
const std::string& preset_text(const std::string& name);  // config_error if unknown

} // namespace entsim
