#include "hystrelax/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hystrelax {

std::string format17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string config_hash(const json& doc) {
    // nlohmann objects iterate in key order, so dump() is canonical.
    return hex64(fnv1a64(doc.dump()));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_trajectory_csv(const std::string& path, const Mesh& mesh, const Trajectory& traj,
                          const Control& u) {
    std::string body = "t,x,sigma,v,w,u,force\n";
    body.reserve(traj.times.size() * mesh.n * 64);
    const Field x = mesh.coords();
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const double t = traj.times[j];
        // u column: the value in force on [t, next recorded time)
        const double t_query = j + 1 < traj.times.size()
                                   ? 0.5 * (t + traj.times[j + 1])
                                   : t - 1e-12 * std::max(1.0, t);
        const Field& uv = u.value_at(std::max(t_query, 0.0));
        for (int i = 0; i < mesh.n; ++i) {
            body += format17(t);
            body += ',';
            body += format17(x(i));
            body += ',';
            body += format17(traj.states[j].sigma(i));
            body += ',';
            body += format17(traj.states[j].v(i));
            body += ',';
            body += format17(traj.states[j].w(i));
            body += ',';
            body += format17(uv(i));
            body += ',';
            body += format17(traj.forces[j](i));
            body += '\n';
        }
    }
    write_text_file(path, body);
}

void write_energy_json(const std::string& path, const EnergyReport& rep) {
    write_text_file(path, rep.to_json().dump(2) + "\n");
}

void write_gap_csv(const std::string& path, const std::vector<GapProbeRow>& rows) {
    std::string body = "n,weak_gap,state_gap,cost_gap\n";
    for (const auto& r : rows) {
        body += std::to_string(r.n);
        body += ',';
        body += format17(r.weak_gap);
        body += ',';
        body += format17(r.state_gap);
        body += ',';
        body += format17(r.cost_gap);
        body += '\n';
    }
    write_text_file(path, body);
}

void write_mu_csv(const std::string& path,
                  const std::vector<std::pair<double, double>>& rows) {
    std::string body = "mu,sup_state_gap_to_projection\n";
    for (const auto& [mu, gap] : rows) {
        body += format17(mu);
        body += ',';
        body += format17(gap);
        body += '\n';
    }
    write_text_file(path, body);
}

void write_history_csv(const std::string& path,
                       const std::vector<std::pair<int, double>>& history) {
    std::string body = "iter,j_relaxed\n";
    for (const auto& [iter, j] : history) {
        body += std::to_string(iter);
        body += ',';
        body += format17(j);
        body += '\n';
    }
    write_text_file(path, body);
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["outputs"] = outputs;
    j["wall_time_s"] = wall_time_s;
    j["overrides"] = overrides;
    return j;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    write_text_file(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace hystrelax
