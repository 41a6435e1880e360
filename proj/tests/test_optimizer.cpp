#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hystrelax/optimizer.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace hystrelax;

namespace {

OptimizerConfig small_cfg(int time_cells, OptimizerConfig::Method method =
                                              OptimizerConfig::Method::CompassSearch) {
    OptimizerConfig ocfg;
    ocfg.time_cells = time_cells;
    ocfg.space_cells = 1;
    ocfg.method = method;
    ocfg.max_iters = 200;
    ocfg.step_init = 0.25;
    ocfg.step_min = 1e-5;
    ocfg.fd_eps = 1e-6;
    return ocfg;
}

}  // namespace

TEST_CASE("linear increasing cost drives every cell to zero") {
    LoadedConfig lc = helpers::bundled("relax-demo");
    Scenario s = lc.scenario;
    s.cost = make_cost_preset("quadratic_tracking", {{"c_lin", 1.0}});  // q = u
    SolverConfig cfg = lc.solver;
    cfg.record_every = 5;

    for (auto method : {OptimizerConfig::Method::CompassSearch,
                        OptimizerConfig::Method::ProjectedFdGradient}) {
        const OptimizeResult res = optimize_relaxed(s, cfg, small_cfg(3, method));
        CHECK(res.j_relaxed <= 1e-6);
        for (const Field& f : res.u_opt.values) {
            CHECK(f.abs().maxCoeff() <= 1e-4);
        }
        CHECK(res.converged);
    }
}

TEST_CASE("flat relaxed objective keeps the midpoint start") {
    // q = (u - 0.5)^2 on U = {0, 1}: the chord is the constant 1/4, so the
    // relaxed objective cannot distinguish controls and compass stays at
    // its midpoint initial point, which is infeasible for the original
    // problem but optimal for the relaxed one.
    LoadedConfig lc = helpers::bundled("relax-demo");
    Scenario s = lc.scenario;
    s.cost = make_cost_preset("quadratic_tracking", {{"c_bump", -0.25}, {"c_const", 0.25}});
    SolverConfig cfg = lc.solver;
    cfg.record_every = 5;
    const OptimizeResult res = optimize_relaxed(s, cfg, small_cfg(2));
    CHECK(res.j_relaxed == doctest::Approx(0.25).epsilon(1e-12));
    for (const Field& f : res.u_opt.values) {
        CHECK(f(0) == doctest::Approx(0.5));
    }
}

TEST_CASE("single-cell compass matches a golden-section scan") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 5;
    OptimizerConfig ocfg = small_cfg(1);
    ocfg.step_min = 1e-6;

    const OptimizeResult res = optimize_relaxed(lc.scenario, cfg, ocfg);

    auto objective = [&](double value) {
        const Control u = prolong_control(lc.scenario, ocfg, {value});
        return cost_J_relaxed(lc.scenario, solve(lc.scenario, cfg, u), u);
    };
    const auto [x_best, j_best] = oracles::golden_section_scan(objective, 0.0, 1.0, 41, 1e-7);
    CHECK(std::abs(res.j_relaxed - j_best) <= 1e-4);
}

TEST_CASE("history is nonincreasing and every trial stays in the box") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 10;
    OptimizerConfig ocfg = small_cfg(4);
    ocfg.max_iters = 40;
    const OptimizeResult res = optimize_relaxed(lc.scenario, cfg, ocfg);
    for (std::size_t k = 1; k < res.history.size(); ++k) {
        CHECK(res.history[k].second <= res.history[k - 1].second + 1e-15);
    }
    for (const Field& f : res.u_opt.values) {
        CHECK(f.minCoeff() >= 0.0);
        CHECK(f.maxCoeff() <= 1.0);
    }
    CHECK(res.iterations <= ocfg.max_iters);
}

TEST_CASE("optimization is reproducible") {
    const LoadedConfig lc = helpers::bundled("relax-demo");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 5;
    const OptimizerConfig ocfg = small_cfg(3);
    const OptimizeResult a = optimize_relaxed(lc.scenario, cfg, ocfg);
    const OptimizeResult b = optimize_relaxed(lc.scenario, cfg, ocfg);
    CHECK(a.j_relaxed == b.j_relaxed);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.u_opt.values.size() == b.u_opt.values.size());
    for (std::size_t c = 0; c < a.u_opt.values.size(); ++c) {
        CHECK((a.u_opt.values[c] == b.u_opt.values[c]).all());
    }
}

TEST_CASE("state-dependent constraints are rejected up front") {
    const LoadedConfig lc = helpers::bundled("budworm-statedep");
    CHECK_THROWS_AS(optimize_relaxed(lc.scenario, lc.solver, small_cfg(2)),
                    std::invalid_argument);
}

TEST_CASE("config validation") {
    OptimizerConfig bad = small_cfg(2);
    bad.step_min = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_cfg(0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gap experiment on the state-free demo hits the closed form") {
    const LoadedConfig lc = helpers::bundled("relax-demo");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 5;
    OptimizerConfig ocfg = lc.optimizer;
    const std::vector<int> ns{8, 32, 128};
    const GapReport rep = relaxation_gap_experiment(lc.scenario, cfg, ocfg, ns);

    // closed form: the relaxed envelope of 4u(1-u) over {0, 1} is zero
    CHECK(std::abs(rep.j_relaxed_min) <= 1e-12);
    const double hull_width = 1.0;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const double bound =
            2.0 * hull_width * lc.scenario.horizon * lc.scenario.mesh.x_len / ns[k];
        CHECK(rep.rows[k].cost_gap <= bound);
        CHECK(rep.rel_gaps[k] <= bound);
    }
}

TEST_CASE("gap experiment on budworm shrinks the relative gap") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    OptimizerConfig ocfg = lc.optimizer;
    ocfg.max_iters = 40;  // a rough optimum is enough to exercise the gaps
    const std::vector<int> ns{8, 128};
    const GapReport rep = relaxation_gap_experiment(lc.scenario, cfg, ocfg, ns);
    CHECK(rep.rel_gaps[1] <= rep.rel_gaps[0]);
    CHECK(rep.rel_gaps[1] <= 0.05);
    const json j = rep.to_json();
    CHECK(j["rows"].size() == 2);
}
