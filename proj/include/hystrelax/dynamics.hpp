#pragma once

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "hystrelax/control.hpp"
#include "hystrelax/hysteresis.hpp"
#include "hystrelax/mesh.hpp"

namespace hystrelax {

/// A model function built from a catalog preset. The id and parameters are
/// kept so reports and serialized configs can name it.
struct ScalarFn1 {
    std::string preset;
    json params;
    std::function<double(double)> f;
    double operator()(double v) const { return f(v); }
};

struct ScalarFn2 {
    std::string preset;
    json params;
    std::function<double(double, double)> f;
    double operator()(double v, double w) const { return f(v, w); }
};

struct ScalarFn3 {
    std::string preset;
    json params;
    std::function<double(double, double, double)> f;
    double operator()(double s, double v, double w) const { return f(s, v, w); }
};

/// Densities of vegetation, prey, and predator.
struct State {
    Field sigma;
    Field v;
    Field w;
};

/// The full model datum: growth coupling lambda, band faces f_lo <= f_hi,
/// control gain F, reaction terms h and g, diffusion kappa, horizon,
/// grid, initial data, cost integrand, and control constraint.
struct Scenario {
    ScalarFn1 lambda_fn;
    ScalarFn2 f_lo;
    ScalarFn2 f_hi;
    ScalarFn3 big_f;
    ScalarFn3 h_fn;
    ScalarFn3 g_fn;
    double kappa = 0.1;
    double horizon = 1.0;
    Mesh mesh{1.0, 3};
    Field sigma0;
    Field v0;
    Field w0;
    CostModel cost;
    ControlConstraint constraint;
    std::string name;

    Band band_at(double v, double w) const { return Band{f_lo(v, w), f_hi(v, w)}; }

    /// Cheap structural checks run before every solve: field sizes, the
    /// nodewise initial-band inclusion, nonnegative initial populations.
    void quick_check() const;
};

struct HypothesisCheck {
    std::string id;
    std::string description;
    bool pass = false;
    std::vector<double> worst_point;
    double worst_value = 0.0;
    std::string note;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    std::map<std::string, double> moduli;  // sampled Lipschitz/derivative estimates

    bool all_pass() const;
    std::vector<std::string> failed_ids() const;
    json to_json() const;
};

/// Samples every structural hypothesis on deterministic low-discrepancy
/// points of the relevant boxes (densities in [0, box_limit], controls in
/// [-m, m]) and estimates the Lipschitz moduli by divided differences.
/// Failures are reported, never thrown.
ValidationReport validate_scenario(const Scenario& s, int samples);

/// Nodewise reaction evaluation: (F(sigma,v,w) * u, h(sigma,v,w),
/// g(sigma,v,w)). Non-finite values raise an error naming node and
/// function.
std::tuple<Field, Field, Field> eval_reactions(const Scenario& s, const State& state,
                                               const Field& u);

// Preset catalogs. Unknown ids throw std::invalid_argument listing the
// catalog; parameters come with documented defaults.
ScalarFn1 make_lambda_preset(const std::string& id, const json& params);
ScalarFn2 make_band_face_preset(const std::string& id, const json& params);
ScalarFn3 make_reaction_preset(const std::string& id, const json& params);
CostModel make_cost_preset(const std::string& id, const json& params);
ControlConstraint make_constraint_state_dep_preset(const std::string& id, const json& params,
                                                   double m);

/// Initial-data presets: "constant", "gauss-bump", "midband" (the
/// midpoint of the initial band, which needs v0 and w0 first), or an
/// explicit nodal array.
Field make_init_field(const Mesh& mesh, const json& spec, const Scenario* partial,
                      const std::string& path);

}  // namespace hystrelax
