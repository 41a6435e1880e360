// Command-line driver: wires scenarios, the solver, the relaxation
// machinery, and the optimizer into reproducible experiments with file
// outputs and a manifest per run.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 hypothesis-validation failure.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hystrelax/config.hpp"
#include "hystrelax/io.hpp"

namespace fs = std::filesystem;
using namespace hystrelax;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "runs/out";
    std::optional<double> dt;
    std::optional<std::string> hysteresis;
    std::optional<int> seed;
    std::optional<int> record_every;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--dt", args.dt, "override solver.dt");
    cmd->add_option("--hysteresis", args.hysteresis,
                    "override solver.hysteresis (projection | yosida:MU)");
    cmd->add_option("--seed", args.seed, "override optimizer.seed");
    cmd->add_option("--record-every", args.record_every, "override solver.record_every");
}

/// Flag overrides are applied to the document before hashing, so the
/// manifest hash identifies the effective configuration.
json apply_overrides(json doc, const CommonArgs& args, json& overrides) {
    if (args.dt) {
        doc["solver"]["dt"] = *args.dt;
        overrides["solver.dt"] = *args.dt;
    }
    if (args.hysteresis) {
        doc["solver"]["hysteresis"] = *args.hysteresis;
        overrides["solver.hysteresis"] = *args.hysteresis;
    }
    if (args.seed) {
        doc["optimizer"]["seed"] = *args.seed;
        overrides["optimizer.seed"] = *args.seed;
    }
    if (args.record_every) {
        doc["solver"]["record_every"] = *args.record_every;
        overrides["solver.record_every"] = *args.record_every;
    }
    return doc;
}

struct Run {
    LoadedConfig cfg;
    RunManifest manifest;
    fs::path out;

    std::string file(const std::string& name) {
        manifest.outputs.push_back(name);
        return (out / name).string();
    }
};

Run prepare(const std::string& command, const CommonArgs& args) {
    Run run;
    json overrides = json::object();
    const json doc = apply_overrides(read_json_file(args.config_path), args, overrides);
    run.cfg = load_config(doc);
    run.out = args.out_dir;
    fs::create_directories(run.out);
    run.manifest.command = command;
    run.manifest.config_path = args.config_path;
    run.manifest.config_hash = config_hash(doc);
    run.manifest.overrides = overrides;
    return run;
}

void finish(Run& run, const Timer& timer) {
    run.manifest.wall_time_s = timer.seconds();
    run.manifest.outputs.push_back("manifest.json");
    write_manifest((run.out / "manifest.json").string(), run.manifest);
}

int cmd_simulate(const CommonArgs& args) {
    Timer timer;
    Run run = prepare("simulate", args);
    const Trajectory traj = solve(run.cfg.scenario, run.cfg.solver, run.cfg.control);
    write_trajectory_csv(run.file("trajectory.csv"), run.cfg.scenario.mesh, traj,
                         run.cfg.control);
    write_energy_json(run.file("energy.json"), traj.diagnostics);
    finish(run, timer);
    std::cout << "simulate: wrote " << run.out.string() << " (band_violation_max = "
              << format17(traj.diagnostics.band_violation_max) << ")\n";
    return 0;
}

int cmd_mu_study(const CommonArgs& args, std::vector<double> mu_list) {
    Timer timer;
    if (mu_list.empty()) mu_list = {1e-2, 1e-3, 1e-4};
    for (double mu : mu_list) {
        if (!(mu > 0.0)) throw ConfigError("--mu: values must be positive");
    }
    Run run = prepare("mu-study", args);

    SolverConfig proj_cfg = run.cfg.solver;
    proj_cfg.mode = HysteresisMode::projection();
    const Trajectory reference = solve(run.cfg.scenario, proj_cfg, run.cfg.control);

    std::vector<std::pair<double, double>> rows;
    for (double mu : mu_list) {
        SolverConfig cfg = run.cfg.solver;
        cfg.mode = HysteresisMode::yosida(mu);
        const Trajectory traj = solve(run.cfg.scenario, cfg, run.cfg.control);
        rows.emplace_back(mu, sup_state_gap_inf(traj, reference));
    }
    write_mu_csv(run.file("mu_study.csv"), rows);
    finish(run, timer);
    std::cout << "mu-study: " << rows.size() << " rows -> " << run.out.string() << "\n";
    return 0;
}

int cmd_relax_gap(const CommonArgs& args, std::vector<int> n_list) {
    Timer timer;
    if (n_list.empty()) n_list = {8, 32, 128};
    for (int n : n_list) {
        if (n < 1) throw ConfigError("--n: values must be >= 1");
    }
    Run run = prepare("relax-gap", args);
    const GapReport report = relaxation_gap_experiment(run.cfg.scenario, run.cfg.solver,
                                                       run.cfg.optimizer, n_list);
    write_gap_csv(run.file("gap.csv"), report.rows);
    write_text_file(run.file("gap_report.json"), report.to_json().dump(2) + "\n");
    finish(run, timer);
    std::cout << "relax-gap: j_relaxed_min = " << format17(report.j_relaxed_min) << ", "
              << report.rows.size() << " rows -> " << run.out.string() << "\n";
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    Timer timer;
    Run run = prepare("optimize", args);
    const OptimizeResult res =
        optimize_relaxed(run.cfg.scenario, run.cfg.solver, run.cfg.optimizer);
    write_text_file(run.file("optimize_result.json"), res.to_json().dump(2) + "\n");
    write_history_csv(run.file("history.csv"), res.history);
    finish(run, timer);
    std::cout << "optimize: j_relaxed = " << format17(res.j_relaxed) << " after "
              << res.iterations << " iterations (converged = " << (res.converged ? "yes" : "no")
              << ") -> " << run.out.string() << "\n";
    return 0;
}

int cmd_validate(const CommonArgs& args, int samples) {
    Timer timer;
    Run run = prepare("validate", args);
    const ValidationReport report = validate_scenario(run.cfg.scenario, samples);
    write_text_file(run.file("validation.json"), report.to_json().dump(2) + "\n");
    finish(run, timer);
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "  pass  " : "  FAIL  ") << check.id << ": "
                  << check.description << "\n";
    }
    if (!report.all_pass()) {
        std::cerr << "validation failed:";
        for (const auto& id : report.failed_ids()) std::cerr << " " << id;
        std::cerr << "\n";
        return 4;
    }
    std::cout << "validation passed (" << samples << " samples per hypothesis)\n";
    return 0;
}

int cmd_presets(const std::string& out_dir) {
    for (const auto& info : bundled_presets()) {
        std::cout << info.name << "\n    " << info.description << "\n";
    }
    if (!out_dir.empty()) {
        Timer timer;
        fs::create_directories(out_dir);
        RunManifest manifest;
        manifest.command = "presets";
        json catalog = json::array();
        for (const auto& info : bundled_presets()) {
            catalog.push_back({{"name", info.name},
                               {"description", info.description},
                               {"config", json::parse(bundled_preset_json(info.name))}});
        }
        write_text_file((fs::path(out_dir) / "catalog.json").string(), catalog.dump(2) + "\n");
        manifest.outputs = {"catalog.json", "manifest.json"};
        manifest.config_hash = config_hash(catalog);
        manifest.wall_time_s = timer.seconds();
        write_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hystrelax: a numerical laboratory for a hysteretic "
                 "vegetation-prey-predator control system"};
    app.require_subcommand(1);

    CommonArgs sim_args, mu_args, gap_args, opt_args, val_args;
    std::vector<double> mu_list;
    std::vector<int> n_list;
    int samples = 10000;
    std::string presets_out;

    auto* sim = app.add_subcommand("simulate", "solve the system and export the trajectory");
    add_common(sim, sim_args);

    auto* mu = app.add_subcommand(
        "mu-study", "compare Yosida runs against the projection run over a list of mu");
    add_common(mu, mu_args);
    mu->add_option("--mu", mu_list, "comma-separated mu list")->delimiter(',');

    auto* gap = app.add_subcommand(
        "relax-gap", "optimize the relaxed cost, then chatter the optimum at each n");
    add_common(gap, gap_args);
    gap->add_option("--n", n_list, "comma-separated chattering resolutions")->delimiter(',');

    auto* opt = app.add_subcommand("optimize", "minimize the relaxed cost");
    add_common(opt, opt_args);

    auto* val = app.add_subcommand("validate", "check the scenario hypotheses by sampling");
    add_common(val, val_args);
    val->add_option("--samples", samples, "sample count per hypothesis");

    auto* pre = app.add_subcommand("presets", "list bundled scenario presets");
    pre->add_option("--out", presets_out, "also write catalog.json and a manifest here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (mu->parsed()) return cmd_mu_study(mu_args, mu_list);
        if (gap->parsed()) return cmd_relax_gap(gap_args, n_list);
        if (opt->parsed()) return cmd_optimize(opt_args);
        if (val->parsed()) return cmd_validate(val_args, samples);
        if (pre->parsed()) return cmd_presets(presets_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ObjectiveError& e) {
        std::cerr << "numerical failure: " << e.what() << "\noffending control: "
                  << e.control_json << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
