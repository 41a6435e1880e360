#include "hystrelax/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hystrelax {

double EnvelopeFn::operator()(double query) const {
    const double span = u.back() - u.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(u.front()) + std::abs(u.back()) + span);
    if (query < u.front() - slack || query > u.back() + slack) {
        throw std::domain_error("EnvelopeFn: query " + std::to_string(query) +
                                " outside hull [" + std::to_string(u.front()) + ", " +
                                std::to_string(u.back()) + "]");
    }
    const double q = std::min(std::max(query, u.front()), u.back());
    if (u.size() == 1) return value.front();
    auto it = std::upper_bound(u.begin(), u.end(), q);
    std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - u.begin()), u.size() - 1);
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double w = (q - u[lo]) / (u[hi] - u[lo]);
    return value[lo] + w * (value[hi] - value[lo]);
}

EnvelopeFn lower_convex_envelope(std::vector<std::pair<double, double>> points) {
    if (points.empty()) {
        throw std::invalid_argument("lower_convex_envelope: empty point set");
    }
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].first == points[i - 1].first) {
            throw std::invalid_argument("lower_convex_envelope: duplicate u-value " +
                                        std::to_string(points[i].first));
        }
    }

    // Andrew's monotone chain, lower hull only. Cross product <= 0 means
    // the middle point lies on or above the chord and is dropped.
    std::vector<std::pair<double, double>> hull;
    hull.reserve(points.size());
    for (const auto& p : points) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            const double cross = (b.first - a.first) * (p.second - a.second) -
                                 (b.second - a.second) * (p.first - a.first);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(p);
    }

    EnvelopeFn env;
    env.u.reserve(hull.size());
    env.value.reserve(hull.size());
    for (const auto& p : hull) {
        env.u.push_back(p.first);
        env.value.push_back(p.second);
    }
    return env;
}

void ControlConstraint::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("constraint: m must be positive");
    if (mode == Mode::FiniteSet) {
        if (points.empty()) throw std::invalid_argument("constraint: empty point set");
        if (!std::is_sorted(points.begin(), points.end())) {
            throw std::invalid_argument("constraint: points must be sorted");
        }
        if (std::adjacent_find(points.begin(), points.end()) != points.end()) {
            throw std::invalid_argument("constraint: duplicate points");
        }
        for (double p : points) {
            if (std::abs(p) > m + 1e-12) {
                throw std::invalid_argument("constraint: point " + std::to_string(p) +
                                            " exceeds bound m = " + std::to_string(m));
            }
        }
    } else if (!points_fn) {
        throw std::invalid_argument("constraint: state-dependent mode needs a points function");
    }
}

int Control::cell_index(double t) const {
    auto it = std::upper_bound(time_grid.begin(), time_grid.end(), t);
    long idx = static_cast<long>(it - time_grid.begin()) - 1;
    idx = std::max<long>(0, std::min<long>(idx, cells() - 1));
    return static_cast<int>(idx);
}

Field Control::average_on(double a, double b) const {
    if (!(b > a)) throw std::invalid_argument("Control::average_on: empty interval");
    Field acc = Field::Zero(values.front().size());
    const int first = cell_index(a);
    const int last = cell_index(std::nextafter(b, a));
    for (int c = first; c <= last; ++c) {
        const double lo = std::max(a, time_grid[c]);
        const double hi = std::min(b, time_grid[c + 1]);
        if (hi > lo) acc += (hi - lo) * values[c];
    }
    return acc / (b - a);
}

Control Control::constant(const Mesh& mesh, double horizon, double value) {
    Control u;
    u.time_grid = {0.0, horizon};
    u.values.push_back(Field::Constant(mesh.n, value));
    return u;
}

void Control::validate(const Mesh& mesh, double bound_m, double horizon) const {
    if (time_grid.size() < 2 || values.size() + 1 != time_grid.size()) {
        throw std::invalid_argument("control: time_grid must have one more entry than values");
    }
    if (std::abs(time_grid.front()) > 1e-12 ||
        std::abs(time_grid.back() - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw std::invalid_argument("control: time_grid must span [0, horizon]");
    }
    for (std::size_t i = 1; i < time_grid.size(); ++i) {
        if (!(time_grid[i] > time_grid[i - 1])) {
            throw std::invalid_argument("control: time_grid must be increasing");
        }
    }
    for (const Field& f : values) {
        if (!mesh.matches(f)) throw std::invalid_argument("control: field/mesh mismatch");
        if ((f.abs() > bound_m + 1e-12).any()) {
            throw std::invalid_argument("control: value exceeds bound m");
        }
    }
}

json Control::to_json() const {
    json j;
    j["time_grid"] = time_grid;
    auto& vals = j["values"] = json::array();
    for (const Field& f : values) {
        vals.push_back(std::vector<double>(f.data(), f.data() + f.size()));
    }
    return j;
}

namespace {

struct NodePlan {
    double p_lo;
    double p_hi;
    double switch_time;  // upper value on [cell_start, switch_time)
};

}  // namespace

Control chatter(const Control& u_star, const std::vector<double>& points, int n) {
    if (n < 1) throw std::invalid_argument("chatter: n must be >= 1");
    if (points.empty()) throw std::invalid_argument("chatter: empty point set");
    const double t_end = u_star.time_grid.back();
    const double t_begin = u_star.time_grid.front();
    if (std::abs(t_begin) > 1e-12 * std::max(1.0, t_end)) {
        throw std::invalid_argument("chatter: control must start at t = 0");
    }
    const int nodes = static_cast<int>(u_star.values.front().size());
    const int total = n * u_star.cells();
    const double cell_len = t_end / total;
    const double p_min = points.front();
    const double p_max = points.back();
    const double tol = 1e-12 * std::max(1.0, std::abs(p_min) + std::abs(p_max));

    Control out;
    out.time_grid.push_back(0.0);

    std::vector<NodePlan> plan(nodes);
    std::vector<double> edges;
    for (int j = 0; j < total; ++j) {
        const double a = j * cell_len;
        const double b = (j + 1 == total) ? t_end : (j + 1) * cell_len;
        const Field ubar = u_star.average_on(a, b);

        edges.clear();
        edges.push_back(a);
        edges.push_back(b);
        for (int i = 0; i < nodes; ++i) {
            double u = ubar(i);
            if (u < p_min - tol || u > p_max + tol) {
                throw std::domain_error("chatter: target value " + std::to_string(u) +
                                        " outside co U at node " + std::to_string(i) +
                                        ", cell " + std::to_string(j));
            }
            u = std::min(std::max(u, p_min), p_max);
            auto it = std::upper_bound(points.begin(), points.end(), u);
            std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - points.begin()),
                                                   points.size() - 1);
            if (hi == 0) hi = points.size() > 1 ? 1 : 0;
            const std::size_t lo = hi > 0 ? hi - 1 : 0;
            const double plo = points[lo];
            const double phi = points[hi];
            if (phi == plo || u <= plo) {
                plan[i] = {plo, plo, a};  // single value, no switch
            } else if (u >= phi) {
                plan[i] = {phi, phi, a};
            } else {
                const double duty = (u - plo) / (phi - plo);
                plan[i] = {plo, phi, a + duty * (b - a)};
                edges.push_back(plan[i].switch_time);
            }
        }
        std::sort(edges.begin(), edges.end());

        const double merge_tol = 1e-14 * std::max(1.0, t_end);
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            const double lo_t = edges[k];
            const double hi_t = edges[k + 1];
            if (hi_t - lo_t <= merge_tol) continue;
            const double mid = 0.5 * (lo_t + hi_t);
            Field v(nodes);
            for (int i = 0; i < nodes; ++i) {
                v(i) = (mid < plan[i].switch_time) ? plan[i].p_hi : plan[i].p_lo;
            }
            // merge with the previous sub-cell when nothing changed
            if (!out.values.empty() && (out.values.back() == v).all()) {
                out.time_grid.back() = hi_t;
            } else {
                out.values.push_back(std::move(v));
                out.time_grid.push_back(hi_t);
            }
        }
    }
    out.time_grid.back() = t_end;
    return out;
}

Control chatter(const Control& u_star, const ControlConstraint& constraint, int n) {
    if (constraint.mode != ControlConstraint::Mode::FiniteSet) {
        throw std::invalid_argument(
            "chatter: state-dependent constraints need the rolled-out state; "
            "use the trajectory-aware overload");
    }
    constraint.validate();
    return chatter(u_star, constraint.points, n);
}

namespace {

std::vector<double> merged_grid(const Control& a, const Control& b) {
    std::vector<double> g;
    g.reserve(a.time_grid.size() + b.time_grid.size());
    g.insert(g.end(), a.time_grid.begin(), a.time_grid.end());
    g.insert(g.end(), b.time_grid.begin(), b.time_grid.end());
    std::sort(g.begin(), g.end());
    const double tol = 1e-12 * std::max(1.0, g.back());
    std::vector<double> out;
    for (double t : g) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    return out;
}

void check_compatible(const Mesh& mesh, const Control& a, const Control& b, const char* where) {
    for (const Field& f : a.values) {
        if (!mesh.matches(f)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
    }
    for (const Field& f : b.values) {
        if (!mesh.matches(f)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
    }
    if (std::abs(a.horizon() - b.horizon()) > 1e-9 * std::max(1.0, a.horizon())) {
        throw std::invalid_argument(std::string(where) + ": controls span different horizons");
    }
}

}  // namespace

double weak_gap(const Mesh& mesh, const Control& u_a, const Control& u_b) {
    check_compatible(mesh, u_a, u_b, "weak_gap");
    const std::vector<double> grid = merged_grid(u_a, u_b);
    const int k = static_cast<int>(grid.size());
    const int n = mesh.n;

    Eigen::MatrixXd cum(n, k);
    cum.col(0).setZero();
    for (int i = 0; i + 1 < k; ++i) {
        const double mid = 0.5 * (grid[i] + grid[i + 1]);
        const double dt = grid[i + 1] - grid[i];
        cum.col(i + 1) =
            cum.col(i) + dt * (u_a.value_at(mid) - u_b.value_at(mid)).matrix();
    }

    const Eigen::VectorXd w = mesh.quad_weights().matrix();
    double best = 0.0;
    if (k <= 2500) {
        const Eigen::MatrixXd gram = cum.transpose() * w.asDiagonal() * cum;
        for (int t = 0; t < k; ++t) {
            for (int s = 0; s < t; ++s) {
                best = std::max(best, gram(t, t) + gram(s, s) - 2.0 * gram(s, t));
            }
        }
    } else {
        for (int s = 0; s < k; ++s) {
            for (int t = s + 1; t < k; ++t) {
                const Eigen::VectorXd d = cum.col(t) - cum.col(s);
                best = std::max(best, d.dot(w.asDiagonal() * d));
            }
        }
    }
    return std::sqrt(std::max(best, 0.0));
}

CumulativeSquaredGap::CumulativeSquaredGap(const Mesh& mesh, const Control& u_a,
                                           const Control& u_b) {
    check_compatible(mesh, u_a, u_b, "CumulativeSquaredGap");
    edges = merged_grid(u_a, u_b);
    cum.assign(edges.size(), 0.0);
    rate.assign(edges.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double mid = 0.5 * (edges[i] + edges[i + 1]);
        const Field d = u_a.value_at(mid) - u_b.value_at(mid);
        rate[i] = inner_h(mesh, d, d);
        cum[i + 1] = cum[i] + rate[i] * (edges[i + 1] - edges[i]);
    }
}

double CumulativeSquaredGap::at(double t) const {
    if (t <= edges.front()) return 0.0;
    if (t >= edges.back()) return cum.back();
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
    return cum[i] + rate[i] * (t - edges[i]);
}

}  // namespace hystrelax
