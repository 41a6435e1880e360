#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hystrelax/mesh.hpp"

namespace hystrelax {

using json = nlohmann::json;

/// Piecewise-linear convex function on [u.front(), u.back()], stored as its
/// breakpoints. Queries outside the interval throw std::domain_error: the
/// function is +infinity there.
struct EnvelopeFn {
    std::vector<double> u;
    std::vector<double> value;

    double u_min() const { return u.front(); }
    double u_max() const { return u.back(); }
    double operator()(double query) const;
};

/// Lower convex envelope (lower hull) of a planar point set (u_i, q_i).
/// The u-values must be distinct; the input need not be sorted.
EnvelopeFn lower_convex_envelope(std::vector<std::pair<double, double>> points);

/// Admissible control values at a point. Either a fixed finite set or a
/// state-dependent finite set evaluated along a trajectory. The convex
/// hull of either is the interval [points.front(), points.back()].
struct ControlConstraint {
    enum class Mode { FiniteSet, FiniteSetStateDep };

    Mode mode = Mode::FiniteSet;
    std::vector<double> points;  // FiniteSet: sorted, deduplicated
    std::function<std::vector<double>(double t, double x, double sigma, double v, double w)>
        points_fn;               // FiniteSetStateDep
    double m = 1.0;              // uniform bound |u| <= m
    std::string preset;          // catalog id of points_fn, when state-dependent
    json params;

    void validate() const;
    double hull_min() const { return points.front(); }
    double hull_max() const { return points.back(); }
};

/// Running cost integrand q(t, x, sigma, v, w, u).
struct CostModel {
    std::function<double(double t, double x, double sigma, double v, double w, double u)> q;
    std::string preset;
    json params;
};

/// Control that is piecewise constant in time and nodal in space:
/// time_grid holds the cell edges (time_grid.front() == 0), values one
/// field per cell.
struct Control {
    std::vector<double> time_grid;
    std::vector<Field> values;

    int cells() const { return static_cast<int>(values.size()); }
    double horizon() const { return time_grid.back(); }

    /// Index of the cell containing t (clamped to the first/last cell).
    int cell_index(double t) const;
    const Field& value_at(double t) const { return values[cell_index(t)]; }

    /// Exact per-node average of the control over [a, b].
    Field average_on(double a, double b) const;

    static Control constant(const Mesh& mesh, double horizon, double value);

    void validate(const Mesh& mesh, double bound_m, double horizon) const;
    json to_json() const;
};

/// Duty-cycle chattering approximation: splits [0, T] into n cells per
/// control cell; inside each, the target value is written as a convex
/// combination of its two bracketing points and realized by time slicing
/// (upper point first). The returned control takes values in `points`
/// exactly, and its running integral stays within
/// (points.back() - points.front()) * T / (n * cells) of the target's.
Control chatter(const Control& u_star, const std::vector<double>& points, int n);
Control chatter(const Control& u_star, const ControlConstraint& constraint, int n);

/// sup over grid pairs s <= t of |integral_s^t (u_a - u_b) dtau|_H,
/// computed from exact cumulative sums on the merged time grid.
double weak_gap(const Mesh& mesh, const Control& u_a, const Control& u_b);

/// Exact cumulative integral of a nodewise-squared control difference,
/// evaluable at arbitrary times. Used by the Lipschitz probe.
struct CumulativeSquaredGap {
    std::vector<double> edges;
    std::vector<double> cum;    // value at each edge
    std::vector<double> rate;   // slope on each cell

    CumulativeSquaredGap(const Mesh& mesh, const Control& u_a, const Control& u_b);
    double at(double t) const;
};

}  // namespace hystrelax
