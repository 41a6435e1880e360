#include "hystrelax/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hystrelax {

namespace {

double param(const json& params, const char* key, double fallback) {
    if (params.is_object() && params.contains(key)) {
        return params.at(key).get<double>();
    }
    return fallback;
}

/// Additive-recurrence (Weyl) sequence: deterministic, low discrepancy,
/// one irrational stride per dimension.
class WeylSampler {
  public:
    explicit WeylSampler(int dims) {
        static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
        for (int d = 0; d < dims; ++d) {
            double a = std::sqrt(primes[d % 8]);
            alpha_.push_back(a - std::floor(a));
        }
    }

    std::vector<double> next() {
        ++k_;
        std::vector<double> p(alpha_.size());
        for (std::size_t d = 0; d < alpha_.size(); ++d) {
            const double x = k_ * alpha_[d];
            p[d] = x - std::floor(x);
        }
        return p;
    }

  private:
    std::vector<double> alpha_;
    long k_ = 0;
};

constexpr double kBoxLimit = 2.0;    // densities sampled on [0, kBoxLimit]
constexpr double kModulusCap = 1e8;  // divided differences beyond this fail the check

}  // namespace

void Scenario::quick_check() const {
    if (!mesh.matches(sigma0) || !mesh.matches(v0) || !mesh.matches(w0)) {
        throw std::invalid_argument("scenario: initial fields do not match the mesh");
    }
    if (!(kappa > 0.0)) throw std::invalid_argument("scenario: kappa must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("scenario: horizon must be positive");
    if ((v0 < -1e-12).any() || (w0 < -1e-12).any()) {
        throw std::invalid_argument("scenario: initial populations must be nonnegative");
    }
    for (int i = 0; i < mesh.n; ++i) {
        const Band b = band_at(v0(i), w0(i));
        if (sigma0(i) < b.lo - 1e-10 || sigma0(i) > b.hi + 1e-10) {
            throw std::invalid_argument("scenario: sigma0 outside the initial band at node " +
                                        std::to_string(i));
        }
    }
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const HypothesisCheck& c) { return c.pass; });
}

std::vector<std::string> ValidationReport::failed_ids() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(c.id);
    }
    return out;
}

json ValidationReport::to_json() const {
    json j;
    auto& arr = j["checks"] = json::array();
    for (const auto& c : checks) {
        json e;
        e["id"] = c.id;
        e["description"] = c.description;
        e["pass"] = c.pass;
        e["worst_point"] = c.worst_point;
        e["worst_value"] = c.worst_value;
        e["note"] = c.note;
        arr.push_back(e);
    }
    j["moduli"] = moduli;
    j["all_pass"] = all_pass();
    return j;
}

namespace {

struct CheckBuilder {
    HypothesisCheck c;
    double worst = -std::numeric_limits<double>::infinity();

    explicit CheckBuilder(std::string id, std::string descr) {
        c.id = std::move(id);
        c.description = std::move(descr);
        c.pass = true;
    }

    /// Track the largest violation; a positive violation fails the check.
    void observe(double violation, const std::vector<double>& point) {
        if (violation > worst) {
            worst = violation;
            c.worst_value = violation;
            c.worst_point = point;
        }
        if (violation > 0.0) c.pass = false;
    }
};

}  // namespace

ValidationReport validate_scenario(const Scenario& s, int samples) {
    if (samples < 1) throw std::invalid_argument("validate_scenario: samples must be >= 1");
    ValidationReport rep;
    const double m = s.constraint.m;
    const double tol = 1e-10;

    // H1: lambda twice differentiable with bounded derivatives on the
    // sampled density range.
    {
        CheckBuilder b("H1", "lambda has bounded first and second derivatives");
        WeylSampler smp(1);
        const double eps = 1e-5;
        double sup_d1 = 0.0, sup_d2 = 0.0;
        for (int k = 0; k < samples; ++k) {
            const double v = smp.next()[0] * kBoxLimit;
            const double f0 = s.lambda_fn(v);
            const double fp = s.lambda_fn(v + eps);
            const double fm = s.lambda_fn(std::max(v - eps, 0.0));
            const double d1 = (fp - fm) / (eps * 2.0);
            const double d2 = (fp - 2.0 * f0 + fm) / (eps * eps);
            if (!std::isfinite(f0) || !std::isfinite(d1) || !std::isfinite(d2)) {
                b.observe(1.0, {v});
                continue;
            }
            sup_d1 = std::max(sup_d1, std::abs(d1));
            sup_d2 = std::max(sup_d2, std::abs(d2));
            b.observe(std::max(std::abs(d1), std::abs(d2)) - kModulusCap, {v});
        }
        b.c.note = "derivatives estimated by central differences on [0, 2]";
        rep.moduli["lambda_d1_sup"] = sup_d1;
        rep.moduli["lambda_d2_sup"] = sup_d2;
        rep.checks.push_back(b.c);
    }

    // H2: band ordering 0 <= f_lo <= f_hi <= 1 and the reaction sign
    // structure h(sigma, 0, w) = 0, g(sigma, v, 0) = 0.
    {
        CheckBuilder b("H2", "band faces ordered in [0, 1]; h and g vanish with their species");
        WeylSampler smp2(2);
        for (int k = 0; k < samples; ++k) {
            const auto p = smp2.next();
            const double v = p[0] * kBoxLimit;
            const double w = p[1] * kBoxLimit;
            const double lo = s.f_lo(v, w);
            const double hi = s.f_hi(v, w);
            double viol = std::max({-lo, lo - hi, hi - 1.0});
            if (!std::isfinite(lo) || !std::isfinite(hi)) viol = 1.0;
            b.observe(viol - tol, {v, w});
        }
        WeylSampler smp3(3);
        for (int k = 0; k < samples; ++k) {
            const auto p = smp3.next();
            const double sigma = p[0];
            const double other = p[1] * kBoxLimit;
            const double hv = std::abs(s.h_fn(sigma, 0.0, other));
            const double gw = std::abs(s.g_fn(sigma, other, 0.0));
            b.observe(std::max(hv, gw) - tol, {sigma, other});
        }
        rep.checks.push_back(b.c);
    }

    // H3: F, h, g locally Lipschitz on [0, 2]^3, estimated by divided
    // differences between nearby sample pairs.
    {
        CheckBuilder b("H3", "F, h, g locally Lipschitz on the density box");
        WeylSampler smp(6);
        const double eps = 1e-4;
        double lip_f = 0.0, lip_h = 0.0, lip_g = 0.0;
        for (int k = 0; k < samples; ++k) {
            const auto p = smp.next();
            const double x0 = p[0] * kBoxLimit, x1 = p[1] * kBoxLimit, x2 = p[2] * kBoxLimit;
            const double d0 = (p[3] - 0.5) * eps, d1 = (p[4] - 0.5) * eps, d2 = (p[5] - 0.5) * eps;
            const double y0 = std::clamp(x0 + d0, 0.0, kBoxLimit);
            const double y1 = std::clamp(x1 + d1, 0.0, kBoxLimit);
            const double y2 = std::clamp(x2 + d2, 0.0, kBoxLimit);
            const double dist = std::abs(y0 - x0) + std::abs(y1 - x1) + std::abs(y2 - x2);
            if (dist < 1e-12) continue;
            const double rf = std::abs(s.big_f(y0, y1, y2) - s.big_f(x0, x1, x2)) / dist;
            const double rh = std::abs(s.h_fn(y0, y1, y2) - s.h_fn(x0, x1, x2)) / dist;
            const double rg = std::abs(s.g_fn(y0, y1, y2) - s.g_fn(x0, x1, x2)) / dist;
            if (!std::isfinite(rf) || !std::isfinite(rh) || !std::isfinite(rg)) {
                b.observe(1.0, {x0, x1, x2});
                continue;
            }
            lip_f = std::max(lip_f, rf);
            lip_h = std::max(lip_h, rh);
            lip_g = std::max(lip_g, rg);
            b.observe(std::max({rf, rh, rg}) - kModulusCap, {x0, x1, x2});
        }
        rep.moduli["lip_F"] = lip_f;
        rep.moduli["lip_h"] = lip_h;
        rep.moduli["lip_g"] = lip_g;
        rep.checks.push_back(b.c);
    }

    // H4: nonnegative initial populations and sigma0 inside the initial band.
    {
        CheckBuilder b("H4", "initial data nonnegative with sigma0 inside the initial band");
        for (int i = 0; i < s.mesh.n; ++i) {
            const Band band = s.band_at(s.v0(i), s.w0(i));
            const double viol = std::max({-s.v0(i), -s.w0(i), band.lo - s.sigma0(i),
                                          s.sigma0(i) - band.hi});
            b.observe(viol - tol, {static_cast<double>(i)});
        }
        b.c.note = "worst_point holds the node index";
        rep.checks.push_back(b.c);
    }

    // Constraint point sets along sampled arguments.
    {
        CheckBuilder b1("U1", "constraint point sets evaluable, nonempty, finite");
        CheckBuilder b2("U2", "constraint Hausdorff-Lipschitz in (sigma, v, w)");
        CheckBuilder b3("U3", "constraint values bounded by m");
        const bool state_dep = s.constraint.mode == ControlConstraint::Mode::FiniteSetStateDep;
        WeylSampler smp(5);
        const double eps = 1e-4;
        double k_mod = 0.0;
        auto points_at = [&](double t, double x, double sg, double v, double w) {
            if (state_dep) return s.constraint.points_fn(t, x, sg, v, w);
            return s.constraint.points;
        };
        auto hausdorff = [](const std::vector<double>& a, const std::vector<double>& b) {
            double worst = 0.0;
            for (double pa : a) {
                double best = std::numeric_limits<double>::infinity();
                for (double pb : b) best = std::min(best, std::abs(pa - pb));
                worst = std::max(worst, best);
            }
            for (double pb : b) {
                double best = std::numeric_limits<double>::infinity();
                for (double pa : a) best = std::min(best, std::abs(pb - pa));
                worst = std::max(worst, best);
            }
            return worst;
        };
        for (int k = 0; k < samples; ++k) {
            const auto p = smp.next();
            const double t = p[0] * s.horizon;
            const double x = p[1] * s.mesh.x_len;
            const double sg = p[2];
            const double v = p[3] * kBoxLimit;
            const double w = p[4] * kBoxLimit;
            const auto pts = points_at(t, x, sg, v, w);
            double viol1 = pts.empty() ? 1.0 : -1.0;
            double viol3 = -1.0;
            for (double u : pts) {
                if (!std::isfinite(u)) viol1 = 1.0;
                viol3 = std::max(viol3, std::abs(u) - m);
            }
            b1.observe(viol1, {t, x, sg, v, w});
            b3.observe(viol3 - tol, {t, x, sg, v, w});
            const auto pts2 = points_at(t, x, sg + eps, v + eps, w + eps);
            const double ratio = hausdorff(pts, pts2) / (3.0 * eps);
            k_mod = std::max(k_mod, ratio);
            b2.observe(ratio - kModulusCap, {t, x, sg, v, w});
        }
        rep.moduli["k_constraint"] = k_mod;
        rep.checks.push_back(b1.c);
        rep.checks.push_back(b2.c);
        rep.checks.push_back(b3.c);
    }

    // Cost integrand: measurable/finite on the box, Lipschitz modulus,
    // growth bound via finiteness with |u| <= m.
    {
        CheckBuilder b1("q1", "cost integrand finite on the sampled box");
        CheckBuilder b2("q2", "cost integrand Lipschitz in (sigma, v, w, u)");
        CheckBuilder b3("q3", "cost integrand growth bounded with |u| <= m");
        WeylSampler smp(6);
        const double eps = 1e-4;
        double k0 = 0.0, sup_q = 0.0;
        for (int k = 0; k < samples; ++k) {
            const auto p = smp.next();
            const double t = p[0] * s.horizon;
            const double x = p[1] * s.mesh.x_len;
            const double sg = p[2];
            const double v = p[3] * kBoxLimit;
            const double w = p[4] * kBoxLimit;
            const double u = (2.0 * p[5] - 1.0) * m;
            const double q0 = s.cost.q(t, x, sg, v, w, u);
            const double q1 = s.cost.q(t, x, sg + eps, v + eps, w + eps,
                                       std::clamp(u + eps, -m, m));
            double viol = std::isfinite(q0) && std::isfinite(q1) ? -1.0 : 1.0;
            b1.observe(viol, {t, x, sg, v, w, u});
            b3.observe(viol, {t, x, sg, v, w, u});
            if (viol < 0.0) {
                sup_q = std::max(sup_q, std::abs(q0));
                const double ratio = std::abs(q1 - q0) / (4.0 * eps);
                k0 = std::max(k0, ratio);
                b2.observe(ratio - kModulusCap, {t, x, sg, v, w, u});
            }
        }
        rep.moduli["k0_cost"] = k0;
        rep.moduli["sup_q"] = sup_q;
        rep.checks.push_back(b1.c);
        rep.checks.push_back(b2.c);
        rep.checks.push_back(b3.c);
    }

    return rep;
}

std::tuple<Field, Field, Field> eval_reactions(const Scenario& s, const State& state,
                                               const Field& u) {
    const int n = s.mesh.n;
    if (!s.mesh.matches(state.sigma) || !s.mesh.matches(state.v) || !s.mesh.matches(state.w) ||
        !s.mesh.matches(u)) {
        throw std::invalid_argument("eval_reactions: field/mesh mismatch");
    }
    Field fu(n), hv(n), gw(n);
    for (int i = 0; i < n; ++i) {
        fu(i) = s.big_f(state.sigma(i), state.v(i), state.w(i)) * u(i);
        hv(i) = s.h_fn(state.sigma(i), state.v(i), state.w(i));
        gw(i) = s.g_fn(state.sigma(i), state.v(i), state.w(i));
        if (!std::isfinite(fu(i))) {
            throw std::runtime_error("eval_reactions: F non-finite at node " + std::to_string(i));
        }
        if (!std::isfinite(hv(i))) {
            throw std::runtime_error("eval_reactions: h non-finite at node " + std::to_string(i));
        }
        if (!std::isfinite(gw(i))) {
            throw std::runtime_error("eval_reactions: g non-finite at node " + std::to_string(i));
        }
    }
    return {std::move(fu), std::move(hv), std::move(gw)};
}

ScalarFn1 make_lambda_preset(const std::string& id, const json& params) {
    ScalarFn1 fn;
    fn.preset = id;
    fn.params = params;
    if (id == "zero") {
        fn.f = [](double) { return 0.0; };
    } else if (id == "linear") {
        const double slope = param(params, "slope", 1.0);
        fn.f = [slope](double v) { return slope * v; };
    } else if (id == "saturating") {
        const double a = param(params, "a", 0.5);
        fn.f = [a](double v) { return a * v / (1.0 + v); };
    } else {
        throw std::invalid_argument("unknown lambda preset '" + id +
                                    "' (catalog: zero, linear, saturating)");
    }
    return fn;
}

ScalarFn2 make_band_face_preset(const std::string& id, const json& params) {
    ScalarFn2 fn;
    fn.preset = id;
    fn.params = params;
    if (id == "constant") {
        const double value = param(params, "value", 1.0);
        fn.f = [value](double, double) { return value; };
    } else if (id == "budworm_hi") {
        const double b1 = param(params, "b1", 1.0);
        fn.f = [b1](double v, double) { return 1.0 / (1.0 + b1 * v); };
    } else if (id == "budworm_lo") {
        const double b1 = param(params, "b1", 1.0);
        const double b2 = param(params, "b2", 1.0);
        fn.f = [b1, b2](double v, double w) {
            return 1.0 / ((1.0 + b1 * v) * (1.0 + b2 * w));
        };
    } else {
        throw std::invalid_argument("unknown band face preset '" + id +
                                    "' (catalog: constant, budworm_hi, budworm_lo)");
    }
    return fn;
}

ScalarFn3 make_reaction_preset(const std::string& id, const json& params) {
    ScalarFn3 fn;
    fn.preset = id;
    fn.params = params;
    if (id == "zero") {
        fn.f = [](double, double, double) { return 0.0; };
    } else if (id == "constant") {
        const double value = param(params, "value", 1.0);
        fn.f = [value](double, double, double) { return value; };
    } else if (id == "logistic_sigma") {
        fn.f = [](double s, double, double) { return s * (1.0 - s); };
    } else if (id == "budworm_prey") {
        const double r = param(params, "r", 1.0);
        const double c = param(params, "c", 0.5);
        fn.f = [r, c](double s, double v, double) { return r * v * (s - c * v); };
    } else if (id == "budworm_predator") {
        const double d = param(params, "d", 1.0);
        const double e = param(params, "e", 0.5);
        fn.f = [d, e](double, double v, double w) { return w * (d * v - e); };
    } else {
        throw std::invalid_argument(
            "unknown reaction preset '" + id +
            "' (catalog: zero, constant, logistic_sigma, budworm_prey, budworm_predator)");
    }
    return fn;
}

CostModel make_cost_preset(const std::string& id, const json& params) {
    CostModel cm;
    cm.preset = id;
    cm.params = params;
    if (id == "constant") {
        const double value = param(params, "value", 1.0);
        cm.q = [value](double, double, double, double, double, double) { return value; };
    } else if (id == "quadratic_tracking") {
        // c_sigma (sigma - sigma_ref)^2 + c_v (v - v_ref)^2 + c_w (w - w_ref)^2
        //   + c_bump * 4 u (1 - u) + c_lin * u + c_const
        // The bump term is concave in u and vanishes on {0, 1}: the
        // nonconvexity the relaxed problem removes.
        const double cs = param(params, "c_sigma", 0.0);
        const double sref = param(params, "sigma_ref", 0.0);
        const double cv = param(params, "c_v", 0.0);
        const double vref = param(params, "v_ref", 0.0);
        const double cw = param(params, "c_w", 0.0);
        const double wref = param(params, "w_ref", 0.0);
        const double cb = param(params, "c_bump", 0.0);
        const double cl = param(params, "c_lin", 0.0);
        const double cc = param(params, "c_const", 0.0);
        cm.q = [=](double, double, double s, double v, double w, double u) {
            return cs * (s - sref) * (s - sref) + cv * (v - vref) * (v - vref) +
                   cw * (w - wref) * (w - wref) + cb * 4.0 * u * (1.0 - u) + cl * u + cc;
        };
    } else {
        throw std::invalid_argument("unknown cost preset '" + id +
                                    "' (catalog: constant, quadratic_tracking)");
    }
    return cm;
}

ControlConstraint make_constraint_state_dep_preset(const std::string& id, const json& params,
                                                   double m) {
    ControlConstraint c;
    c.mode = ControlConstraint::Mode::FiniteSetStateDep;
    c.preset = id;
    c.params = params;
    c.m = m;
    if (id == "predator_scaled") {
        // {0, 1 / (1 + gamma * w)}: the allowed spraying rate shrinks as
        // the predator density grows.
        const double gamma = param(params, "gamma", 0.5);
        c.points_fn = [gamma](double, double, double, double, double w) {
            return std::vector<double>{0.0, 1.0 / (1.0 + gamma * std::max(w, 0.0))};
        };
    } else {
        throw std::invalid_argument("unknown state-dependent constraint preset '" + id +
                                    "' (catalog: predator_scaled)");
    }
    c.validate();
    return c;
}

Field make_init_field(const Mesh& mesh, const json& spec, const Scenario* partial,
                      const std::string& path) {
    if (!spec.is_object()) throw std::invalid_argument(path + ": expected an object");
    if (spec.contains("values")) {
        const auto vals = spec.at("values").get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != mesh.n) {
            throw std::invalid_argument(path + ".values: expected " + std::to_string(mesh.n) +
                                        " entries, got " + std::to_string(vals.size()));
        }
        return Eigen::Map<const Field>(vals.data(), mesh.n);
    }
    const std::string preset = spec.value("preset", "");
    const json params = spec.value("params", json::object());
    if (preset == "constant") {
        return Field::Constant(mesh.n, param(params, "value", 0.0));
    }
    if (preset == "gauss-bump") {
        const double base = param(params, "base", 0.0);
        const double amp = param(params, "amp", 1.0);
        const double center = param(params, "center", 0.5 * mesh.x_len);
        const double width = param(params, "width", 0.1 * mesh.x_len);
        const Field x = mesh.coords();
        return base + amp * (-((x - center) / width).square()).exp();
    }
    if (preset == "midband") {
        if (partial == nullptr) {
            throw std::invalid_argument(path + ": midband needs v0 and w0 defined first");
        }
        Field out(mesh.n);
        for (int i = 0; i < mesh.n; ++i) {
            const Band b = partial->band_at(partial->v0(i), partial->w0(i));
            out(i) = 0.5 * (b.lo + b.hi);
        }
        return out;
    }
    throw std::invalid_argument(path + ".preset: unknown '" + preset +
                                "' (catalog: constant, gauss-bump, midband, or explicit values)");
}

}  // namespace hystrelax
