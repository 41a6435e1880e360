#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hystrelax/control.hpp"
#include "hystrelax/dynamics.hpp"

namespace hystrelax {

/// The state became non-finite or a band face inverted while stepping.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A control violated its nodewise bound.
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// How the band inclusion is enforced at the end of each step: exact
/// nodewise projection, or the implicit Yosida resolvent with parameter mu.
struct HysteresisMode {
    enum class Kind { Projection, Yosida };
    Kind kind = Kind::Projection;
    double mu = 1e-3;

    static HysteresisMode projection() { return {Kind::Projection, 0.0}; }
    static HysteresisMode yosida(double mu) { return {Kind::Yosida, mu}; }
};

struct SolverConfig {
    double dt = 1e-3;
    HysteresisMode mode = HysteresisMode::projection();
    int record_every = 1;

    void validate(double horizon) const;
};

/// Per-component diagnostics triple (sigma, v, w order).
struct Triple {
    double sigma = 0.0;
    double v = 0.0;
    double w = 0.0;
};

/// Measured analogues of the a-priori bounds: sup/min of all states,
/// discrete L2(0,T;H) norms of time derivatives and Laplacians, sup-in-time
/// gradient norms, and the worst band violation seen after any step.
struct EnergyReport {
    double sup_bound = 0.0;
    double min_bound = 0.0;
    Triple l2_time_derivatives;
    Triple sup_grad_norms;
    Triple l2_laplacians;
    double band_violation_max = 0.0;

    json to_json() const;
};

/// Recorded sample of a run: times (always starting at 0), the state at
/// each recorded time, and the hysteresis reaction force selected by the
/// step that produced it (zeros at t = 0).
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Field> forces;
    EnergyReport diagnostics;
};

/// One semi-implicit step of length dt: reactions explicit, diffusion
/// implicit, the band enforced last against the updated (v, w). Returns
/// the new state and the reaction force (sigma_tilde - sigma_next) / dt.
std::pair<State, Field> step(const Scenario& s, const SolverConfig& cfg, const State& state,
                             const Field& u, double dt);
std::pair<State, Field> step(const Scenario& s, const SolverConfig& cfg, const State& state,
                             const Field& u);

/// Control-to-state map: integrates from the scenario's initial data over
/// [0, horizon]. The time grid is the uniform dt grid merged with the
/// control's breakpoints, so piecewise-constant controls are integrated
/// exactly; recording happens on the uniform grid only, which makes
/// trajectories of different controls comparable time-for-time.
Trajectory solve(const Scenario& s, const SolverConfig& cfg, const Control& u);

/// Empirical quotient max_t |state gap|^2_H / int_0^t |u1 - u2|^2_H dtau;
/// zero by convention when the denominator stays below 1e-14.
double lipschitz_probe(const Scenario& s, const SolverConfig& cfg, const Control& u1,
                       const Control& u2);

/// Sup-in-time product-space state gaps between each T(u_n) and T(u_lim).
std::vector<double> weak_strong_probe(const Scenario& s, const SolverConfig& cfg,
                                      std::span<const Control> u_seq, const Control& u_lim);

/// Helpers shared by the probes: sup over common recorded times of the
/// product H-norm / nodewise sup-norm state distance.
double sup_state_gap_h3(const Mesh& mesh, const Trajectory& a, const Trajectory& b);
double sup_state_gap_inf(const Trajectory& a, const Trajectory& b);

}  // namespace hystrelax
