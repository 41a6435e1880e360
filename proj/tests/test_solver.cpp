#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hystrelax/solver.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace hystrelax;

namespace {

/// Trivial scenario: all reactions zero, full band [0, 1], no coupling.
Scenario trivial_scenario(int n = 11, double x_len = 1.0, double horizon = 1.0) {
    Scenario s;
    s.name = "trivial";
    s.mesh = Mesh(x_len, n);
    s.horizon = horizon;
    s.kappa = 0.1;
    s.lambda_fn = make_lambda_preset("zero", {});
    s.f_lo = make_band_face_preset("constant", {{"value", 0.0}});
    s.f_hi = make_band_face_preset("constant", {{"value", 1.0}});
    s.big_f = make_reaction_preset("zero", {});
    s.h_fn = make_reaction_preset("zero", {});
    s.g_fn = make_reaction_preset("zero", {});
    s.sigma0 = Field::Constant(n, 0.5);
    s.v0 = Field::Constant(n, 0.4);
    s.w0 = Field::Constant(n, 0.3);
    s.cost = make_cost_preset("constant", {{"value", 1.0}});
    s.constraint.mode = ControlConstraint::Mode::FiniteSet;
    s.constraint.points = {0.0, 1.0};
    s.constraint.m = 1.0;
    return s;
}

/// Budworm model functions on spatially constant data (the scalar case).
Scenario scalar_budworm(double horizon = 1.0) {
    LoadedConfig lc = helpers::bundled("budworm-1d");
    Scenario s = lc.scenario;
    s.mesh = Mesh(1.0, 11);
    s.horizon = horizon;
    s.v0 = Field::Constant(11, 0.6);
    s.w0 = Field::Constant(11, 0.3);
    Field sigma0(11);
    for (int i = 0; i < 11; ++i) {
        const Band b = s.band_at(s.v0(i), s.w0(i));
        sigma0(i) = 0.5 * (b.lo + b.hi);
    }
    s.sigma0 = sigma0;
    return s;
}

}  // namespace

TEST_CASE("equilibrium: nothing moves without forcing") {
    const Scenario s = trivial_scenario();
    SolverConfig cfg;
    cfg.dt = 0.1;
    State st{s.sigma0, s.v0, s.w0};
    for (int k = 0; k < 10; ++k) {
        auto [next, force] = step(s, cfg, st, Field::Zero(s.mesh.n));
        CHECK((next.sigma - s.sigma0).abs().maxCoeff() <= 1e-14);
        CHECK((next.v - s.v0).abs().maxCoeff() <= 1e-14);
        CHECK((next.w - s.w0).abs().maxCoeff() <= 1e-14);
        CHECK(force.abs().maxCoeff() <= 1e-14);
        st = next;
    }
}

TEST_CASE("projection clamps and produces an upper-face force") {
    Scenario s = trivial_scenario();
    s.f_hi = make_band_face_preset("constant", {{"value", 0.55}});
    s.big_f = make_reaction_preset("constant", {{"value", 1.0}});
    SolverConfig cfg;
    cfg.dt = 0.2;
    State st{s.sigma0, s.v0, s.w0};  // sigma = 0.5, pushing up with u = 1
    auto [next, force] = step(s, cfg, st, Field::Ones(s.mesh.n));
    for (int i = 0; i < s.mesh.n; ++i) {
        CHECK(next.sigma(i) == doctest::Approx(0.55));
        CHECK(force(i) > 0.0);
        CHECK(subdiff_contains(next.sigma(i), Band{0.0, 0.55}, force(i), 1e-10));
    }
}

TEST_CASE("control bound violations and blow-ups are loud") {
    Scenario s = trivial_scenario();
    SolverConfig cfg;
    State st{s.sigma0, s.v0, s.w0};
    CHECK_THROWS_AS(step(s, cfg, st, Field::Constant(s.mesh.n, 1.5)), ConstraintError);

    // overflow inside a reaction evaluation names node and function
    Scenario bomb = trivial_scenario();
    bomb.h_fn.f = [](double, double v, double) { return 1e200 * (v + 1.0) * (v + 1.0); };
    SolverConfig cfg2;
    cfg2.dt = 0.5;
    const Control zero = Control::constant(bomb.mesh, bomb.horizon, 0.0);
    CHECK_THROWS_WITH_AS(solve(bomb, cfg2, zero), doctest::Contains("non-finite"),
                         std::runtime_error);

    // overflow in the state update itself is reported as a blow-up
    Scenario diverge = trivial_scenario(11, 1.0, 2.0);
    diverge.h_fn = make_reaction_preset("constant", {{"value", 1e308}});
    CHECK_THROWS_AS(solve(diverge, cfg2, Control::constant(diverge.mesh, 2.0, 0.0)),
                    NumericalError);
}

TEST_CASE("spatially constant run matches the scalar-reduction oracle") {
    const Scenario s = scalar_budworm(1.0);
    SolverConfig cfg;
    cfg.dt = 2e-4;
    const double u_val = 0.8;
    const Control u = Control::constant(s.mesh, s.horizon, u_val);
    const Trajectory traj = solve(s, cfg, u);

    const auto ref = oracles::scalar_reduction_integrate(
        s, s.sigma0(0), s.v0(0), s.w0(0), [=](double) { return u_val; }, s.horizon,
        cfg.dt / 100.0);

    const State& last = traj.states.back();
    // spatial constancy is preserved exactly
    CHECK((last.sigma - last.sigma(0)).abs().maxCoeff() <= 1e-12);
    CHECK(std::abs(last.sigma(0) - ref.sigma) <= 1e-3);
    CHECK(std::abs(last.v(0) - ref.v) <= 1e-3);
    CHECK(std::abs(last.w(0) - ref.w) <= 1e-3);
}

TEST_CASE("budworm run respects bounds and the band invariant") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 1;
    const Control zero = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 0.0);
    const Trajectory traj = solve(lc.scenario, cfg, zero);

    CHECK(traj.diagnostics.min_bound >= -1e-8);
    CHECK(traj.diagnostics.band_violation_max <= 1e-8);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() <= lc.scenario.horizon + cfg.dt);
    for (std::size_t j = 1; j < traj.times.size(); ++j) {
        CHECK(traj.times[j] > traj.times[j - 1]);
    }
}

TEST_CASE("recorded forces lie in the subdifferential graph (projection)") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 1;
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 1.0);
    const Trajectory traj = solve(lc.scenario, cfg, u);
    for (std::size_t j = 1; j < traj.times.size(); ++j) {
        const State& st = traj.states[j];
        for (int i = 0; i < lc.scenario.mesh.n; ++i) {
            const Band b = lc.scenario.band_at(st.v(i), st.w(i));
            CHECK(subdiff_contains(st.sigma(i), b, traj.forces[j](i), 1e-8));
        }
    }
}

TEST_CASE("recorded forces equal the Yosida force of the new state (yosida)") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 10;
    cfg.mode = HysteresisMode::yosida(1e-3);
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 1.0);
    const Trajectory traj = solve(lc.scenario, cfg, u);
    for (std::size_t j = 1; j < traj.times.size(); ++j) {
        const State& st = traj.states[j];
        for (int i = 0; i < lc.scenario.mesh.n; ++i) {
            const Band b = lc.scenario.band_at(st.v(i), st.w(i));
            CHECK(traj.forces[j](i) ==
                  doctest::Approx(yosida_force(st.sigma(i), b, 1e-3)).epsilon(1e-9));
        }
    }
}

TEST_CASE("dt self-convergence is first order") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 1.0);
    auto final_state = [&](double dt) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.record_every = 1 << 20;  // only the final state matters here
        return solve(lc.scenario, cfg, u).states.back();
    };
    const State s1 = final_state(1e-3);
    const State s2 = final_state(5e-4);
    const State s3 = final_state(2.5e-4);
    const double d12 = (s1.sigma - s2.sigma).abs().maxCoeff() +
                       (s1.v - s2.v).abs().maxCoeff() + (s1.w - s2.w).abs().maxCoeff();
    const double d23 = (s2.sigma - s3.sigma).abs().maxCoeff() +
                       (s2.v - s3.v).abs().maxCoeff() + (s2.w - s3.w).abs().maxCoeff();
    CHECK(d12 / d23 > 1.4);
    CHECK(d12 / d23 < 3.0);
}

TEST_CASE("yosida trajectories approach the projection run as mu shrinks") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 1.0);
    SolverConfig proj = lc.solver;
    proj.mode = HysteresisMode::projection();
    const Trajectory reference = solve(lc.scenario, proj, u);

    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {1e-2, 1e-3, 1e-4}) {
        SolverConfig cfg = lc.solver;
        cfg.mode = HysteresisMode::yosida(mu);
        const double gap = sup_state_gap_inf(solve(lc.scenario, cfg, u), reference);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev <= 5e-2);
}

TEST_CASE("mass is conserved without reactions") {
    Scenario s = trivial_scenario(31, 2.0);
    s.v0 = 0.4 + 0.2 * (s.mesh.coords() * 3.0).sin();
    SolverConfig cfg;
    cfg.dt = 1e-2;
    cfg.record_every = 1;
    const Control zero = Control::constant(s.mesh, s.horizon, 0.0);
    const Trajectory traj = solve(s, cfg, zero);
    const Field ones = Field::Ones(s.mesh.n);
    const double mass0 = inner_h(s.mesh, traj.states.front().v, ones);
    for (const State& st : traj.states) {
        CHECK(std::abs(inner_h(s.mesh, st.v, ones) - mass0) <= 1e-8);
    }
}

TEST_CASE("solve is deterministic, bit for bit") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 0.7);
    const Trajectory a = solve(lc.scenario, lc.solver, u);
    const Trajectory b = solve(lc.scenario, lc.solver, u);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t j = 0; j < a.times.size(); ++j) {
        CHECK((a.states[j].sigma == b.states[j].sigma).all());
        CHECK((a.states[j].v == b.states[j].v).all());
        CHECK((a.states[j].w == b.states[j].w).all());
    }
}

TEST_CASE("lipschitz probe basics") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 10;
    const Control u = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 0.5);
    CHECK(lipschitz_probe(lc.scenario, cfg, u, u) == doctest::Approx(0.0));

    // near-invariance of the quotient under shrinking perturbations
    auto perturbed = [&](double eps) {
        Control u2 = u;
        u2.values[0] = u2.values[0] + eps;
        return u2;
    };
    const double q1 = lipschitz_probe(lc.scenario, cfg, u, perturbed(1e-2));
    const double q2 = lipschitz_probe(lc.scenario, cfg, u, perturbed(1e-3));
    CHECK(q1 > 0.0);
    CHECK(q2 > 0.0);
    CHECK(q1 / q2 > 0.5);
    CHECK(q1 / q2 < 2.0);
}

TEST_CASE("weak-strong probe sees chattering sequences converge") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    SolverConfig cfg = lc.solver;
    cfg.record_every = 10;
    const Control u_lim = Control::constant(lc.scenario.mesh, lc.scenario.horizon, 0.5);

    SUBCASE("constant sequence gives zero gaps") {
        const std::vector<Control> seq{u_lim, u_lim, u_lim};
        for (double g : weak_strong_probe(lc.scenario, cfg, seq, u_lim)) {
            CHECK(g == doctest::Approx(0.0));
        }
    }
    SUBCASE("duty-cycle sequence gives strictly decreasing gaps") {
        std::vector<Control> seq;
        for (int n : {4, 16, 64}) {
            seq.push_back(chatter(u_lim, lc.scenario.constraint, n));
        }
        const auto gaps = weak_strong_probe(lc.scenario, cfg, seq, u_lim);
        CHECK(gaps[0] > gaps[1]);
        CHECK(gaps[1] > gaps[2]);
        CHECK(gaps[2] > 0.0);

        // informational cross-check against the Lipschitz-probe family:
        // logged, not asserted
        const double c_probe = lipschitz_probe(lc.scenario, cfg, u_lim, seq[0]);
        for (std::size_t k = 0; k < seq.size(); ++k) {
            const double wg = weak_gap(lc.scenario.mesh, u_lim, seq[k]);
            MESSAGE("state gap ", gaps[k], " vs sqrt(C_probe * weak_gap) = ",
                    std::sqrt(c_probe * wg));
        }
    }
}
