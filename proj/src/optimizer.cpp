#include "hystrelax/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hystrelax/parallel.hpp"

namespace hystrelax {

void OptimizerConfig::validate() const {
    if (time_cells < 1) throw std::invalid_argument("optimizer: time_cells must be >= 1");
    if (space_cells < 1) throw std::invalid_argument("optimizer: space_cells must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("optimizer: max_iters must be >= 1");
    if (!(step_min < step_init)) {
        throw std::invalid_argument("optimizer: step_min must be below step_init");
    }
    if (!(fd_eps > 0.0)) throw std::invalid_argument("optimizer: fd_eps must be positive");
}

json OptimizeResult::to_json() const {
    json j;
    j["u_opt"] = u_opt.to_json();
    j["j_relaxed"] = j_relaxed;
    j["iterations"] = iterations;
    j["converged"] = converged;
    auto& h = j["history"] = json::array();
    for (const auto& [it, val] : history) h.push_back({{"iter", it}, {"j_relaxed", val}});
    return j;
}

json GapReport::to_json() const {
    json j;
    j["j_relaxed_min"] = j_relaxed_min;
    j["optimum"] = optimum.to_json();
    auto& rows_j = j["rows"] = json::array();
    for (const auto& r : rows) {
        rows_j.push_back({{"n", r.n},
                          {"weak_gap", r.weak_gap},
                          {"state_gap", r.state_gap},
                          {"cost_gap", r.cost_gap},
                          {"cost_gamma", r.cost_gamma},
                          {"fixed_traj_cost_gap", r.eq_fixed_traj_gap}});
    }
    j["rel_gaps"] = rel_gaps;
    return j;
}

Control prolong_control(const Scenario& s, const OptimizerConfig& ocfg,
                        const std::vector<double>& params) {
    const int tc = ocfg.time_cells;
    const int sc = ocfg.space_cells;
    const int n = s.mesh.n;
    Control u;
    u.time_grid.resize(tc + 1);
    for (int c = 0; c <= tc; ++c) {
        u.time_grid[c] = s.horizon * static_cast<double>(c) / tc;
    }
    u.values.reserve(tc);
    for (int c = 0; c < tc; ++c) {
        Field f(n);
        for (int i = 0; i < n; ++i) {
            const int block = std::min(sc - 1, i * sc / n);
            f(i) = params[static_cast<std::size_t>(c) * sc + block];
        }
        u.values.push_back(std::move(f));
    }
    return u;
}

namespace {

struct Objective {
    const Scenario& s;
    const SolverConfig& cfg;
    const OptimizerConfig& ocfg;

    double operator()(const std::vector<double>& params) const {
        const Control u = prolong_control(s, ocfg, params);
        try {
            const Trajectory traj = solve(s, cfg, u);
            return cost_J_relaxed(s, traj, u);
        } catch (const std::exception& e) {
            throw ObjectiveError(std::string("objective evaluation failed: ") + e.what(),
                                 u.to_json().dump());
        }
    }
};

struct SearchOutcome {
    std::vector<double> theta;
    double j = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> history;
};

SearchOutcome run_compass(const Objective& obj, int dim, double lo, double hi,
                          const OptimizerConfig& ocfg) {
    const double width = hi - lo;
    SearchOutcome out;
    out.theta.assign(dim, 0.5 * (lo + hi));
    out.j = obj(out.theta);
    out.history.emplace_back(0, out.j);

    double step = ocfg.step_init * width;
    while (out.iterations < ocfg.max_iters && step >= ocfg.step_min * width) {
        ++out.iterations;
        std::vector<std::vector<double>> trials;
        trials.reserve(2 * static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            for (double sgn : {+1.0, -1.0}) {
                auto t = out.theta;
                t[d] = std::min(std::max(t[d] + sgn * step, lo), hi);
                if (t[d] != out.theta[d]) trials.push_back(std::move(t));
            }
        }
        std::vector<double> vals(trials.size(), std::numeric_limits<double>::infinity());
        parallel_for(static_cast<int>(trials.size()), [&](int k) { vals[k] = obj(trials[k]); });
        int best_k = -1;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            if (vals[k] < out.j && (best_k < 0 || vals[k] < vals[best_k])) {
                best_k = static_cast<int>(k);
            }
        }
        if (best_k >= 0) {
            out.theta = trials[best_k];
            out.j = vals[best_k];
        } else {
            step *= 0.5;
        }
        out.history.emplace_back(out.iterations, out.j);
    }
    out.converged = step < ocfg.step_min * width;
    return out;
}

SearchOutcome run_fd_gradient(const Objective& obj, int dim, double lo, double hi,
                              const OptimizerConfig& ocfg) {
    const double width = hi - lo;
    SearchOutcome out;
    out.theta.assign(dim, 0.5 * (lo + hi));
    out.j = obj(out.theta);
    out.history.emplace_back(0, out.j);

    double alpha = ocfg.step_init * width;
    while (out.iterations < ocfg.max_iters && alpha >= ocfg.step_min * width) {
        ++out.iterations;
        std::vector<double> grad(dim, 0.0);
        parallel_for(dim, [&](int d) {
            auto t = out.theta;
            t[d] = std::min(t[d] + ocfg.fd_eps, hi);
            if (t[d] == out.theta[d]) t[d] = std::max(out.theta[d] - ocfg.fd_eps, lo);
            const double dv = t[d] - out.theta[d];
            grad[d] = dv == 0.0 ? 0.0 : (obj(t) - out.j) / dv;
        });
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < 1e-15) {
            out.converged = true;
            out.history.emplace_back(out.iterations, out.j);
            break;
        }
        auto trial = out.theta;
        for (int d = 0; d < dim; ++d) {
            trial[d] = std::min(std::max(trial[d] - alpha * grad[d] / gmax, lo), hi);
        }
        const double val = obj(trial);
        if (val < out.j) {
            out.theta = trial;
            out.j = val;
            alpha = std::min(alpha * 1.5, ocfg.step_init * width);
        } else {
            alpha *= 0.5;
        }
        out.history.emplace_back(out.iterations, out.j);
    }
    out.converged = out.converged || alpha < ocfg.step_min * width;
    return out;
}

}  // namespace

OptimizeResult optimize_relaxed(const Scenario& s, const SolverConfig& cfg,
                                const OptimizerConfig& ocfg) {
    ocfg.validate();
    cfg.validate(s.horizon);
    s.quick_check();
    if (s.constraint.mode != ControlConstraint::Mode::FiniteSet) {
        throw std::invalid_argument(
            "optimize_relaxed: only fixed finite point sets are supported; the hull "
            "box of a state-dependent constraint is itself state-dependent");
    }
    s.constraint.validate();
    const double lo = s.constraint.hull_min();
    const double hi = s.constraint.hull_max();
    if (!(hi > lo)) {
        throw std::invalid_argument("optimize_relaxed: degenerate hull [" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + "]");
    }

    const Objective obj{s, cfg, ocfg};
    const int dim = ocfg.time_cells * ocfg.space_cells;
    const SearchOutcome out = ocfg.method == OptimizerConfig::Method::CompassSearch
                                  ? run_compass(obj, dim, lo, hi, ocfg)
                                  : run_fd_gradient(obj, dim, lo, hi, ocfg);

    OptimizeResult res;
    res.u_opt = prolong_control(s, ocfg, out.theta);
    res.j_relaxed = out.j;
    res.iterations = out.iterations;
    res.converged = out.converged;
    res.history = out.history;
    return res;
}

GapReport relaxation_gap_experiment(const Scenario& s, const SolverConfig& cfg,
                                    const OptimizerConfig& ocfg, std::span<const int> n_list) {
    GapReport rep;
    rep.optimum = optimize_relaxed(s, cfg, ocfg);
    rep.j_relaxed_min = rep.optimum.j_relaxed;
    rep.rows = cost_gap_probe(s, cfg, rep.optimum.u_opt, n_list);
    rep.rel_gaps.reserve(rep.rows.size());
    for (const auto& r : rep.rows) {
        rep.rel_gaps.push_back(r.cost_gap / (std::abs(rep.j_relaxed_min) + 1.0));
    }
    return rep;
}

}  // namespace hystrelax
