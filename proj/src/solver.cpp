#include "hystrelax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hystrelax {

void SolverConfig::validate(double horizon) const {
    if (!(dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
    if (dt > horizon * (1.0 + 1e-12)) {
        throw std::invalid_argument("solver: dt must not exceed the horizon");
    }
    if (record_every < 1) throw std::invalid_argument("solver: record_every must be >= 1");
    if (mode.kind == HysteresisMode::Kind::Yosida && !(mode.mu > 0.0)) {
        throw std::invalid_argument("solver: yosida mode needs mu > 0");
    }
}

json EnergyReport::to_json() const {
    json j;
    j["sup_bound"] = sup_bound;
    j["min_bound"] = min_bound;
    j["l2_time_derivatives"] = {{"sigma", l2_time_derivatives.sigma},
                                {"v", l2_time_derivatives.v},
                                {"w", l2_time_derivatives.w}};
    j["sup_grad_norms"] = {{"sigma", sup_grad_norms.sigma},
                           {"v", sup_grad_norms.v},
                           {"w", sup_grad_norms.w}};
    j["l2_laplacians"] = {{"sigma", l2_laplacians.sigma},
                          {"v", l2_laplacians.v},
                          {"w", l2_laplacians.w}};
    j["band_violation_max"] = band_violation_max;
    return j;
}

namespace {

void check_control_bound(const Field& u, double m) {
    for (int i = 0; i < u.size(); ++i) {
        if (!(std::abs(u(i)) <= m + 1e-12)) {
            throw ConstraintError("control bound |u| <= " + std::to_string(m) +
                                  " violated at node " + std::to_string(i) + " (u = " +
                                  std::to_string(u(i)) + ")");
        }
    }
}

void check_finite(const Field& f, const char* label, double t) {
    if (!f.allFinite()) {
        throw NumericalError(std::string("blow-up: ") + label + " non-finite at t = " +
                             std::to_string(t));
    }
}

}  // namespace

std::pair<State, Field> step(const Scenario& s, const SolverConfig& cfg, const State& state,
                             const Field& u, double dt) {
    const Mesh& mesh = s.mesh;
    check_control_bound(u, s.constraint.m);

    auto [force_u, react_v, react_w] = eval_reactions(s, state, u);

    // Populations first: explicit reactions, implicit diffusion.
    const Field v_next = solve_helmholtz(mesh, state.v + dt * react_v, dt);
    const Field w_next = solve_helmholtz(mesh, state.w + dt * react_w, dt);

    // Vegetation: the coupling enters as the exact increment of lambda,
    // then an implicit diffusion solve with coefficient kappa.
    Field rhs(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
        rhs(i) = state.sigma(i) + (s.lambda_fn(v_next(i)) - s.lambda_fn(state.v(i))) +
                 dt * force_u(i);
    }
    const Field sigma_tilde = solve_helmholtz(mesh, rhs, s.kappa * dt);

    // Band inclusion last, against the updated populations, so the state
    // ends the step inside (projection) or near (Yosida) the current band.
    Field sigma_next(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
        const Band band = s.band_at(v_next(i), w_next(i));
        if (!(band.lo <= band.hi)) {
            throw NumericalError("band inverted (f_lo > f_hi) at node " + std::to_string(i));
        }
        if (cfg.mode.kind == HysteresisMode::Kind::Yosida) {
            sigma_next(i) = implicit_yosida_step(sigma_tilde(i), band, cfg.mode.mu, dt);
        } else {
            sigma_next(i) = project(sigma_tilde(i), band);
        }
    }
    Field force = (sigma_tilde - sigma_next) / dt;

    State next{sigma_next, v_next, w_next};
    return {std::move(next), std::move(force)};
}

std::pair<State, Field> step(const Scenario& s, const SolverConfig& cfg, const State& state,
                             const Field& u) {
    return step(s, cfg, state, u, cfg.dt);
}

namespace {

struct GridPoint {
    double t;
    bool uniform;
};

/// Uniform dt grid over [0, horizon] merged with the control breakpoints.
std::vector<GridPoint> build_time_grid(double horizon, double dt, const Control& u) {
    const double tol = 1e-12 * std::max(1.0, horizon);
    std::vector<GridPoint> pts;
    for (long k = 0; k * dt < horizon - tol; ++k) pts.push_back({k * dt, true});
    pts.push_back({horizon, true});
    for (double t : u.time_grid) {
        if (t > tol && t < horizon - tol) pts.push_back({t, false});
    }
    std::sort(pts.begin(), pts.end(), [](const GridPoint& a, const GridPoint& b) {
        return a.t < b.t;
    });
    std::vector<GridPoint> out;
    for (const GridPoint& p : pts) {
        if (!out.empty() && p.t - out.back().t <= tol) {
            out.back().uniform = out.back().uniform || p.uniform;
        } else {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace

Trajectory solve(const Scenario& s, const SolverConfig& cfg, const Control& u) {
    cfg.validate(s.horizon);
    s.quick_check();
    u.validate(s.mesh, s.constraint.m, s.horizon);

    const Mesh& mesh = s.mesh;
    const auto grid = build_time_grid(s.horizon, cfg.dt, u);

    State state{s.sigma0, s.v0, s.w0};
    Trajectory traj;
    EnergyReport& rep = traj.diagnostics;

    auto band_violation = [&](const State& st) {
        double worst = 0.0;
        for (int i = 0; i < mesh.n; ++i) {
            const Band b = s.band_at(st.v(i), st.w(i));
            worst = std::max({worst, st.sigma(i) - b.hi, b.lo - st.sigma(i)});
        }
        return worst;
    };
    auto observe_state = [&](const State& st) {
        rep.sup_bound = std::max({rep.sup_bound, st.sigma.maxCoeff(), st.v.maxCoeff(),
                                  st.w.maxCoeff()});
        rep.min_bound = std::min({rep.min_bound, st.sigma.minCoeff(), st.v.minCoeff(),
                                  st.w.minCoeff()});
        rep.sup_grad_norms.sigma = std::max(rep.sup_grad_norms.sigma, norm_grad(mesh, st.sigma));
        rep.sup_grad_norms.v = std::max(rep.sup_grad_norms.v, norm_grad(mesh, st.v));
        rep.sup_grad_norms.w = std::max(rep.sup_grad_norms.w, norm_grad(mesh, st.w));
        rep.band_violation_max = std::max(rep.band_violation_max, band_violation(st));
    };

    rep.sup_bound = -std::numeric_limits<double>::infinity();
    rep.min_bound = std::numeric_limits<double>::infinity();
    observe_state(state);

    traj.times.push_back(0.0);
    traj.states.push_back(state);
    traj.forces.push_back(Field::Zero(mesh.n));

    Triple der2, lap2;  // running sums of squared L2(0,T;H) norms
    long uniform_seen = 0;

    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt_k = grid[k + 1].t - grid[k].t;
        const double t_next = grid[k + 1].t;
        const Field& u_now = u.value_at(0.5 * (grid[k].t + t_next));

        auto [next, force] = step(s, cfg, state, u_now, dt_k);
        check_finite(next.sigma, "sigma", t_next);
        check_finite(next.v, "v", t_next);
        check_finite(next.w, "w", t_next);

        const Field d_sigma = next.sigma - state.sigma;
        const Field d_v = next.v - state.v;
        const Field d_w = next.w - state.w;
        der2.sigma += inner_h(mesh, d_sigma, d_sigma) / dt_k;
        der2.v += inner_h(mesh, d_v, d_v) / dt_k;
        der2.w += inner_h(mesh, d_w, d_w) / dt_k;
        const Field lap_sigma = laplacian_apply(mesh, next.sigma);
        const Field lap_v = laplacian_apply(mesh, next.v);
        const Field lap_w = laplacian_apply(mesh, next.w);
        lap2.sigma += dt_k * inner_h(mesh, lap_sigma, lap_sigma);
        lap2.v += dt_k * inner_h(mesh, lap_v, lap_v);
        lap2.w += dt_k * inner_h(mesh, lap_w, lap_w);

        state = std::move(next);
        observe_state(state);

        if (grid[k + 1].uniform) {
            ++uniform_seen;
            const bool last = (k + 2 == grid.size());
            if (uniform_seen % cfg.record_every == 0 || last) {
                if (traj.times.back() < t_next) {
                    traj.times.push_back(t_next);
                    traj.states.push_back(state);
                    traj.forces.push_back(force);
                }
            }
        }
    }

    rep.l2_time_derivatives = {std::sqrt(der2.sigma), std::sqrt(der2.v), std::sqrt(der2.w)};
    rep.l2_laplacians = {std::sqrt(lap2.sigma), std::sqrt(lap2.v), std::sqrt(lap2.w)};
    return traj;
}

double sup_state_gap_h3(const Mesh& mesh, const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size()) {
        throw std::invalid_argument("sup_state_gap_h3: trajectories record different grids");
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < a.times.size(); ++j) {
        const Field ds = a.states[j].sigma - b.states[j].sigma;
        const Field dv = a.states[j].v - b.states[j].v;
        const Field dw = a.states[j].w - b.states[j].w;
        const double g2 = inner_h(mesh, ds, ds) + inner_h(mesh, dv, dv) + inner_h(mesh, dw, dw);
        worst = std::max(worst, g2);
    }
    return std::sqrt(worst);
}

double sup_state_gap_inf(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size()) {
        throw std::invalid_argument("sup_state_gap_inf: trajectories record different grids");
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < a.times.size(); ++j) {
        worst = std::max({worst,
                          (a.states[j].sigma - b.states[j].sigma).abs().maxCoeff(),
                          (a.states[j].v - b.states[j].v).abs().maxCoeff(),
                          (a.states[j].w - b.states[j].w).abs().maxCoeff()});
    }
    return worst;
}

double lipschitz_probe(const Scenario& s, const SolverConfig& cfg, const Control& u1,
                       const Control& u2) {
    const Trajectory t1 = solve(s, cfg, u1);
    const Trajectory t2 = solve(s, cfg, u2);
    const CumulativeSquaredGap denom(s.mesh, u1, u2);

    double worst = 0.0;
    for (std::size_t j = 1; j < t1.times.size(); ++j) {
        const double den = denom.at(t1.times[j]);
        if (den < 1e-14) continue;
        const Field ds = t1.states[j].sigma - t2.states[j].sigma;
        const Field dv = t1.states[j].v - t2.states[j].v;
        const Field dw = t1.states[j].w - t2.states[j].w;
        const double num = inner_h(s.mesh, ds, ds) + inner_h(s.mesh, dv, dv) +
                           inner_h(s.mesh, dw, dw);
        worst = std::max(worst, num / den);
    }
    return worst;
}

std::vector<double> weak_strong_probe(const Scenario& s, const SolverConfig& cfg,
                                      std::span<const Control> u_seq, const Control& u_lim) {
    const Trajectory limit = solve(s, cfg, u_lim);
    std::vector<double> gaps;
    gaps.reserve(u_seq.size());
    for (const Control& u_n : u_seq) {
        const Trajectory t_n = solve(s, cfg, u_n);
        gaps.push_back(sup_state_gap_h3(s.mesh, t_n, limit));
    }
    return gaps;
}

}  // namespace hystrelax
