#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hystrelax/optimizer.hpp"

namespace hystrelax {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed 17-significant-digit formatting; CSV numeric columns are
/// byte-stable across reruns on one platform.
std::string format17(double x);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Digest of the canonical (sorted-key, compact) dump of a JSON document.
std::string config_hash(const json& doc);

// File writers. Directories must exist; IO failures throw
// std::runtime_error naming the path.
void write_text_file(const std::string& path, const std::string& content);
void write_trajectory_csv(const std::string& path, const Mesh& mesh, const Trajectory& traj,
                          const Control& u);
void write_energy_json(const std::string& path, const EnergyReport& rep);
void write_gap_csv(const std::string& path, const std::vector<GapProbeRow>& rows);
void write_mu_csv(const std::string& path,
                  const std::vector<std::pair<double, double>>& rows);
void write_history_csv(const std::string& path,
                       const std::vector<std::pair<int, double>>& history);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    json overrides = json::object();

    json to_json() const;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace hystrelax
