#pragma once

#include <span>
#include <vector>

#include "hystrelax/solver.hpp"

namespace hystrelax {

/// Running cost J along a solved trajectory: trapezoidal in space,
/// piecewise constant in time on the recorded grid merged with the
/// control's breakpoints (so piecewise-constant controls integrate
/// exactly even under coarse recording).
double cost_J(const Scenario& s, const Trajectory& traj, const Control& u);

/// Relaxed cost: the integrand is replaced pointwise by the lower convex
/// envelope of {(p, q(t,x,state,p)) : p in U(t,x,state)} evaluated at
/// u(t,x). Controls outside the hull raise std::domain_error naming the
/// offending (t, x).
double cost_J_relaxed(const Scenario& s, const Trajectory& traj, const Control& u);

/// Chattering for state-dependent constraints: the admissible point set is
/// evaluated along the rolled-out trajectory of u_star, and each chatter
/// cell brackets the target with the two nearest currently-feasible points.
Control chatter_state_dep(const Scenario& s, const SolverConfig& cfg, const Control& u_star,
                          int n);

struct GapProbeRow {
    int n = 0;
    double weak_gap = 0.0;    // weak-norm control gap between u_star and gamma_n
    double state_gap = 0.0;   // sup-in-time product H-norm trajectory gap
    double cost_gap = 0.0;    // |J**(u_star) - J(gamma_n)|
    double cost_gamma = 0.0;  // J(gamma_n)
    double eq_fixed_traj_gap = 0.0;  // sup partial-integral cost discrepancy along T(u_star)
};

/// For each n: builds gamma_n = chatter(u_star, n), solves both systems,
/// and reports the weak, state, and cost gaps. The last column logs the
/// cost discrepancy measured along the fixed relaxed trajectory; no
/// tolerance is attached to it.
std::vector<GapProbeRow> cost_gap_probe(const Scenario& s, const SolverConfig& cfg,
                                        const Control& u_star, std::span<const int> n_list);

}  // namespace hystrelax
