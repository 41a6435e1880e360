#include "hystrelax/relaxation.hpp"

#include <algorithm>
#include <cmath>

#include "hystrelax/parallel.hpp"

namespace hystrelax {

namespace {

std::vector<double> merged_cost_grid(const Trajectory& traj, const Control& u) {
    std::vector<double> g = traj.times;
    const double t_end = traj.times.back();
    const double tol = 1e-12 * std::max(1.0, t_end);
    for (double t : u.time_grid) {
        if (t > tol && t < t_end - tol) g.push_back(t);
    }
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double t : g) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    return out;
}

/// Index of the last recorded time <= t (left-frozen state).
std::size_t recorded_index(const std::vector<double>& times, double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t + 1e-15);
    return static_cast<std::size_t>(std::max<long>(0, (it - times.begin()) - 1));
}

std::vector<double> state_dep_points(const Scenario& s, double t, double x, double sigma,
                                     double v, double w) {
    std::vector<double> pts = s.constraint.points_fn(t, x, sigma, v, w);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <typename Integrand>
double integrate_over_cells(const Scenario& s, const Trajectory& traj, const Control& u,
                            Integrand&& cell_integrand) {
    if (traj.states.empty()) throw std::invalid_argument("cost: empty trajectory");
    for (const Field& f : u.values) {
        if (!s.mesh.matches(f)) throw std::invalid_argument("cost: control/mesh mismatch");
    }
    const std::vector<double> grid = merged_cost_grid(traj, u);
    const Field ones = Field::Ones(s.mesh.n);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k];
        const double b = grid[k + 1];
        const double mid = 0.5 * (a + b);
        const State& st = traj.states[recorded_index(traj.times, a)];
        const Field& uc = u.value_at(mid);
        const Field q = cell_integrand(a, st, uc);
        total += (b - a) * inner_h(s.mesh, q, ones);
    }
    return total;
}

}  // namespace

double cost_J(const Scenario& s, const Trajectory& traj, const Control& u) {
    const Field x = s.mesh.coords();
    return integrate_over_cells(s, traj, u, [&](double t, const State& st, const Field& uc) {
        Field q(s.mesh.n);
        for (int i = 0; i < s.mesh.n; ++i) {
            q(i) = s.cost.q(t, x(i), st.sigma(i), st.v(i), st.w(i), uc(i));
        }
        return q;
    });
}

double cost_J_relaxed(const Scenario& s, const Trajectory& traj, const Control& u) {
    const Field x = s.mesh.coords();
    const bool state_dep = s.constraint.mode == ControlConstraint::Mode::FiniteSetStateDep;
    return integrate_over_cells(s, traj, u, [&](double t, const State& st, const Field& uc) {
        Field q(s.mesh.n);
        for (int i = 0; i < s.mesh.n; ++i) {
            const std::vector<double> pts =
                state_dep ? state_dep_points(s, t, x(i), st.sigma(i), st.v(i), st.w(i))
                          : s.constraint.points;
            std::vector<std::pair<double, double>> graph;
            graph.reserve(pts.size());
            for (double p : pts) {
                graph.emplace_back(p, s.cost.q(t, x(i), st.sigma(i), st.v(i), st.w(i), p));
            }
            const EnvelopeFn env = lower_convex_envelope(std::move(graph));
            try {
                q(i) = env(uc(i));
            } catch (const std::domain_error&) {
                throw std::domain_error("cost_J_relaxed: control outside co U at t = " +
                                        std::to_string(t) + ", x = " + std::to_string(x(i)));
            }
        }
        return q;
    });
}

Control chatter_state_dep(const Scenario& s, const SolverConfig& cfg, const Control& u_star,
                          int n) {
    if (s.constraint.mode != ControlConstraint::Mode::FiniteSetStateDep) {
        return chatter(u_star, s.constraint, n);
    }
    if (n < 1) throw std::invalid_argument("chatter_state_dep: n must be >= 1");

    const Trajectory traj = solve(s, cfg, u_star);
    const Mesh& mesh = s.mesh;
    const Field x = mesh.coords();
    const double t_end = u_star.horizon();
    const int total = n * u_star.cells();
    const double cell_len = t_end / total;

    Control out;
    out.time_grid.push_back(0.0);
    std::vector<double> p_lo(mesh.n), p_hi(mesh.n), sw(mesh.n), edges;
    for (int j = 0; j < total; ++j) {
        const double a = j * cell_len;
        const double b = (j + 1 == total) ? t_end : (j + 1) * cell_len;
        const Field ubar = u_star.average_on(a, b);
        const State& st = traj.states[recorded_index(traj.times, a)];

        edges.clear();
        edges.push_back(a);
        edges.push_back(b);
        for (int i = 0; i < mesh.n; ++i) {
            const auto pts = state_dep_points(s, a, x(i), st.sigma(i), st.v(i), st.w(i));
            const double tol = 1e-12 * std::max(1.0, std::abs(pts.front()) + std::abs(pts.back()));
            double uv = ubar(i);
            if (uv < pts.front() - tol || uv > pts.back() + tol) {
                throw std::domain_error("chatter_state_dep: target outside co U at node " +
                                        std::to_string(i) + ", t = " + std::to_string(a));
            }
            uv = std::min(std::max(uv, pts.front()), pts.back());
            auto it = std::upper_bound(pts.begin(), pts.end(), uv);
            std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - pts.begin()),
                                                   pts.size() - 1);
            if (hi == 0) hi = pts.size() > 1 ? 1 : 0;
            const std::size_t lo = hi > 0 ? hi - 1 : 0;
            if (pts[hi] == pts[lo] || uv <= pts[lo]) {
                p_lo[i] = p_hi[i] = pts[lo];
                sw[i] = a;
            } else if (uv >= pts[hi]) {
                p_lo[i] = p_hi[i] = pts[hi];
                sw[i] = a;
            } else {
                p_lo[i] = pts[lo];
                p_hi[i] = pts[hi];
                const double duty = (uv - pts[lo]) / (pts[hi] - pts[lo]);
                sw[i] = a + duty * (b - a);
                edges.push_back(sw[i]);
            }
        }
        std::sort(edges.begin(), edges.end());
        const double merge_tol = 1e-14 * std::max(1.0, t_end);
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            if (edges[k + 1] - edges[k] <= merge_tol) continue;
            const double mid = 0.5 * (edges[k] + edges[k + 1]);
            Field v(mesh.n);
            for (int i = 0; i < mesh.n; ++i) {
                v(i) = (mid < sw[i]) ? p_hi[i] : p_lo[i];
            }
            if (!out.values.empty() && (out.values.back() == v).all()) {
                out.time_grid.back() = edges[k + 1];
            } else {
                out.values.push_back(std::move(v));
                out.time_grid.push_back(edges[k + 1]);
            }
        }
    }
    out.time_grid.back() = t_end;
    return out;
}

namespace {

/// Cost discrepancy along the fixed trajectory of u_star: sup over
/// (s, t) of |int_s^t (q_relaxed(tau, X*, u_star) - q(tau, X*, gamma))|.
double fixed_trajectory_cost_gap(const Scenario& s, const Trajectory& star_traj,
                                 const Control& u_star, const Control& gamma) {
    const Field x = s.mesh.coords();
    const Field ones = Field::Ones(s.mesh.n);
    const bool state_dep = s.constraint.mode == ControlConstraint::Mode::FiniteSetStateDep;

    std::vector<double> grid = merged_cost_grid(star_traj, u_star);
    {
        std::vector<double> g2 = merged_cost_grid(star_traj, gamma);
        grid.insert(grid.end(), g2.begin(), g2.end());
        std::sort(grid.begin(), grid.end());
        const double tol = 1e-12 * std::max(1.0, grid.back());
        std::vector<double> dedup;
        for (double t : grid) {
            if (dedup.empty() || t - dedup.back() > tol) dedup.push_back(t);
        }
        grid.swap(dedup);
    }

    double cum = 0.0, cmin = 0.0, cmax = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k];
        const double b = grid[k + 1];
        const double mid = 0.5 * (a + b);
        const State& st = star_traj.states[recorded_index(star_traj.times, a)];
        const Field& us = u_star.value_at(mid);
        const Field& ug = gamma.value_at(mid);
        Field diff(s.mesh.n);
        for (int i = 0; i < s.mesh.n; ++i) {
            std::vector<double> pts =
                state_dep ? state_dep_points(s, a, x(i), st.sigma(i), st.v(i), st.w(i))
                          : s.constraint.points;
            std::vector<std::pair<double, double>> graph;
            for (double p : pts) {
                graph.emplace_back(p, s.cost.q(a, x(i), st.sigma(i), st.v(i), st.w(i), p));
            }
            const EnvelopeFn env = lower_convex_envelope(std::move(graph));
            diff(i) = env(us(i)) - s.cost.q(a, x(i), st.sigma(i), st.v(i), st.w(i), ug(i));
        }
        cum += (b - a) * inner_h(s.mesh, diff, ones);
        cmin = std::min(cmin, cum);
        cmax = std::max(cmax, cum);
    }
    return cmax - cmin;
}

}  // namespace

std::vector<GapProbeRow> cost_gap_probe(const Scenario& s, const SolverConfig& cfg,
                                        const Control& u_star, std::span<const int> n_list) {
    const Trajectory star_traj = solve(s, cfg, u_star);
    const double j_relaxed = cost_J_relaxed(s, star_traj, u_star);

    std::vector<GapProbeRow> rows(n_list.size());
    parallel_for(static_cast<int>(n_list.size()), [&](int k) {
        const int n = n_list[k];
        const Control gamma = chatter_state_dep(s, cfg, u_star, n);
        const Trajectory traj_n = solve(s, cfg, gamma);
        GapProbeRow row;
        row.n = n;
        row.weak_gap = weak_gap(s.mesh, u_star, gamma);
        row.state_gap = sup_state_gap_h3(s.mesh, traj_n, star_traj);
        row.cost_gamma = cost_J(s, traj_n, gamma);
        row.cost_gap = std::abs(j_relaxed - row.cost_gamma);
        row.eq_fixed_traj_gap = fixed_trajectory_cost_gap(s, star_traj, u_star, gamma);
        rows[k] = row;
    });
    return rows;
}

}  // namespace hystrelax
