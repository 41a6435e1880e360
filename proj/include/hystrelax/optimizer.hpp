#pragma once

#include <cstdint>
#include <vector>

#include "hystrelax/relaxation.hpp"

namespace hystrelax {

/// An objective evaluation failed; the offending control is serialized in
/// control_json for replay.
struct ObjectiveError : std::runtime_error {
    std::string control_json;
    ObjectiveError(const std::string& what, std::string control)
        : std::runtime_error(what), control_json(std::move(control)) {}
};

struct OptimizerConfig {
    int time_cells = 8;
    int space_cells = 1;
    enum class Method { CompassSearch, ProjectedFdGradient };
    Method method = Method::CompassSearch;
    int max_iters = 200;
    double step_init = 0.25;  // fraction of the hull width
    double step_min = 1e-4;
    double fd_eps = 1e-6;
    std::uint64_t seed = 1;

    void validate() const;
};

struct OptimizeResult {
    Control u_opt;
    double j_relaxed = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> history;  // (iter, best objective so far)

    json to_json() const;
};

/// Minimizes the relaxed cost over piecewise-constant controls on a coarse
/// time_cells x space_cells parametrization of the hull box, prolonged to
/// the solver grid by piecewise-constant injection. Derivative-free
/// compass search by default; every trial point is projected back into
/// the box. Deterministic for fixed inputs.
OptimizeResult optimize_relaxed(const Scenario& s, const SolverConfig& cfg,
                                const OptimizerConfig& ocfg);

struct GapReport {
    double j_relaxed_min = 0.0;
    OptimizeResult optimum;
    std::vector<GapProbeRow> rows;
    std::vector<double> rel_gaps;  // |J(gamma_n) - J**_min| / (|J**_min| + 1)

    json to_json() const;
};

/// Runs the relaxed optimization, then chatters the optimum at each n and
/// reports the chattered costs against the relaxed minimum. Asserts
/// nothing itself.
GapReport relaxation_gap_experiment(const Scenario& s, const SolverConfig& cfg,
                                    const OptimizerConfig& ocfg, std::span<const int> n_list);

/// The coarse-to-fine injection used by the optimizer, exposed for tests:
/// params laid out cell-major (time cell index times space_cells + block).
Control prolong_control(const Scenario& s, const OptimizerConfig& ocfg,
                        const std::vector<double>& params);

}  // namespace hystrelax
