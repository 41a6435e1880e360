#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hystrelax/optimizer.hpp"

namespace hystrelax {

/// Config parsing failure; the message is path-qualified ("solver.dt: ...").
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a run needs, built from one JSON document.
struct LoadedConfig {
    Scenario scenario;
    SolverConfig solver;
    OptimizerConfig optimizer;
    Control control;  // from the "control" block; zero control if absent
    json raw;         // the effective (post-override) document
};

json read_json_file(const std::string& path);
LoadedConfig load_config(const json& doc);

struct PresetInfo {
    std::string name;
    std::string description;
};

/// Bundled scenario configs, embedded so they work independent of paths.
const std::vector<PresetInfo>& bundled_presets();
std::string bundled_preset_json(const std::string& name);

}  // namespace hystrelax
