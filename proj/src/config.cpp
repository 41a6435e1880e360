#include "hystrelax/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hystrelax {

namespace {

std::string qualify(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(qualify(path, key) + ": missing required key");
    }
    return j.at(key);
}

double need_num(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) throw ConfigError(qualify(path, key) + ": expected a number");
    return v.get<double>();
}

int need_int(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number_integer()) throw ConfigError(qualify(path, key) + ": expected an integer");
    return v.get<int>();
}

double opt_num(const json& j, const std::string& key, double fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<double>();
    return fallback;
}

int opt_int(const json& j, const std::string& key, int fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<int>();
    return fallback;
}

struct PresetSpec {
    std::string id;
    json params;
};

PresetSpec preset_spec(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_object()) throw ConfigError(qualify(path, key) + ": expected an object");
    PresetSpec ps;
    ps.id = need(v, "preset", qualify(path, key)).get<std::string>();
    ps.params = v.value("params", json::object());
    return ps;
}

template <typename Maker>
auto make_checked(Maker&& maker, const PresetSpec& ps, const std::string& where) {
    try {
        return maker(ps.id, ps.params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

HysteresisMode parse_hysteresis(const std::string& text, const std::string& where) {
    if (text == "projection") return HysteresisMode::projection();
    if (text.rfind("yosida:", 0) == 0) {
        double mu = 0.0;
        try {
            mu = std::stod(text.substr(7));
        } catch (const std::exception&) {
            throw ConfigError(where + ": cannot parse mu in '" + text + "'");
        }
        if (!(mu > 0.0)) throw ConfigError(where + ": yosida mu must be positive");
        return HysteresisMode::yosida(mu);
    }
    throw ConfigError(where + ": expected 'projection' or 'yosida:MU', got '" + text + "'");
}

Control parse_control(const json& doc, const Scenario& s) {
    if (!doc.contains("control")) return Control::constant(s.mesh, s.horizon, 0.0);
    const json& c = doc.at("control");
    const std::string preset = need(c, "preset", "control").get<std::string>();
    const json params = c.value("params", json::object());
    if (preset == "zero") return Control::constant(s.mesh, s.horizon, 0.0);
    if (preset == "constant") {
        return Control::constant(s.mesh, s.horizon, opt_num(params, "value", 0.0));
    }
    if (preset == "square_wave") {
        const double lo = opt_num(params, "lo", 0.0);
        const double hi = opt_num(params, "hi", 1.0);
        const double period = opt_num(params, "period", s.horizon / 8.0);
        const double duty = opt_num(params, "duty", 0.5);
        if (!(period > 0.0) || duty < 0.0 || duty > 1.0) {
            throw ConfigError("control.params: square_wave needs period > 0, duty in [0, 1]");
        }
        Control u;
        u.time_grid.push_back(0.0);
        double t = 0.0;
        bool high = true;
        while (t < s.horizon - 1e-12) {
            const double len = high ? duty * period : (1.0 - duty) * period;
            const double next = std::min(t + len, s.horizon);
            if (next > t + 1e-14) {
                u.values.push_back(Field::Constant(s.mesh.n, high ? hi : lo));
                u.time_grid.push_back(next);
            }
            t = next;
            high = !high;
        }
        return u;
    }
    if (preset == "piecewise") {
        Control u;
        u.time_grid = need(params, "time_grid", "control.params").get<std::vector<double>>();
        const auto vals = need(params, "values", "control.params").get<std::vector<double>>();
        if (vals.size() + 1 != u.time_grid.size()) {
            throw ConfigError("control.params.values: expected one value per time cell");
        }
        for (double v : vals) u.values.push_back(Field::Constant(s.mesh.n, v));
        return u;
    }
    throw ConfigError("control.preset: unknown '" + preset +
                      "' (catalog: zero, constant, square_wave, piecewise)");
}

ControlConstraint parse_constraint(const json& doc) {
    const json& c = need(doc, "constraint", "");
    const std::string mode = need(c, "mode", "constraint").get<std::string>();
    const double m = need_num(c, "m", "constraint");
    if (mode == "finite_set") {
        ControlConstraint cc;
        cc.mode = ControlConstraint::Mode::FiniteSet;
        cc.m = m;
        cc.points = need(c, "points", "constraint").get<std::vector<double>>();
        try {
            cc.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("constraint: ") + e.what());
        }
        return cc;
    }
    if (mode == "finite_set_state_dep") {
        const std::string preset = need(c, "preset", "constraint").get<std::string>();
        const json params = c.value("params", json::object());
        try {
            return make_constraint_state_dep_preset(preset, params, m);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("constraint: ") + e.what());
        }
    }
    throw ConfigError("constraint.mode: unknown '" + mode +
                      "' (catalog: finite_set, finite_set_state_dep)");
}

}  // namespace

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

LoadedConfig load_config(const json& doc) {
    LoadedConfig lc;
    lc.raw = doc;
    Scenario& s = lc.scenario;
    s.name = doc.value("name", "unnamed");

    const json& domain = need(doc, "domain", "");
    s.mesh = Mesh(need_num(domain, "x_len", "domain"), need_int(domain, "n", "domain"));
    s.horizon = need_num(need(doc, "time", ""), "horizon", "time");
    s.kappa = need_num(doc, "kappa", "");
    if (!(s.kappa > 0.0)) throw ConfigError("kappa: must be positive");
    if (!(s.horizon > 0.0)) throw ConfigError("time.horizon: must be positive");

    const json& model = need(doc, "model", "");
    s.lambda_fn = make_checked(make_lambda_preset, preset_spec(model, "lambda", "model"),
                               "model.lambda");
    s.f_lo = make_checked(make_band_face_preset, preset_spec(model, "f_lo", "model"),
                          "model.f_lo");
    s.f_hi = make_checked(make_band_face_preset, preset_spec(model, "f_hi", "model"),
                          "model.f_hi");
    s.big_f = make_checked(make_reaction_preset, preset_spec(model, "F", "model"), "model.F");
    s.h_fn = make_checked(make_reaction_preset, preset_spec(model, "h", "model"), "model.h");
    s.g_fn = make_checked(make_reaction_preset, preset_spec(model, "g", "model"), "model.g");

    const json& init = need(doc, "init", "");
    try {
        s.v0 = make_init_field(s.mesh, need(init, "v0", "init"), nullptr, "init.v0");
        s.w0 = make_init_field(s.mesh, need(init, "w0", "init"), nullptr, "init.w0");
        s.sigma0 = make_init_field(s.mesh, need(init, "sigma0", "init"), &s, "init.sigma0");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const PresetSpec cost = preset_spec(doc, "cost", "");
    s.cost = make_checked(make_cost_preset, cost, "cost");
    s.constraint = parse_constraint(doc);

    const json solver = doc.value("solver", json::object());
    lc.solver.dt = opt_num(solver, "dt", 1e-3);
    lc.solver.record_every = opt_int(solver, "record_every", 1);
    if (solver.contains("hysteresis")) {
        lc.solver.mode =
            parse_hysteresis(solver.at("hysteresis").get<std::string>(), "solver.hysteresis");
    }
    try {
        lc.solver.validate(s.horizon);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }

    const json opt = doc.value("optimizer", json::object());
    lc.optimizer.time_cells = opt_int(opt, "time_cells", 8);
    lc.optimizer.space_cells = opt_int(opt, "space_cells", 1);
    lc.optimizer.max_iters = opt_int(opt, "max_iters", 200);
    lc.optimizer.step_init = opt_num(opt, "step_init", 0.25);
    lc.optimizer.step_min = opt_num(opt, "step_min", 1e-4);
    lc.optimizer.fd_eps = opt_num(opt, "fd_eps", 1e-6);
    lc.optimizer.seed = static_cast<std::uint64_t>(opt_int(opt, "seed", 1));
    const std::string method = opt.is_object() && opt.contains("method")
                                   ? opt.at("method").get<std::string>()
                                   : "compass_search";
    if (method == "compass_search") {
        lc.optimizer.method = OptimizerConfig::Method::CompassSearch;
    } else if (method == "projected_fd_gradient") {
        lc.optimizer.method = OptimizerConfig::Method::ProjectedFdGradient;
    } else {
        throw ConfigError("optimizer.method: unknown '" + method +
                          "' (catalog: compass_search, projected_fd_gradient)");
    }
    try {
        lc.optimizer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("optimizer: ") + e.what());
    }

    // Semantic state checks (band inclusion, nonnegativity) are left to
    // validate_scenario and to solve(): the validate command must be able
    // to load and report on hypothesis-violating scenarios.
    lc.control = parse_control(doc, s);
    try {
        lc.control.validate(s.mesh, s.constraint.m, s.horizon);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return lc;
}

namespace {

const char* kBudworm1d = R"json({
  "name": "budworm-1d",
  "model": {
    "lambda": {"preset": "saturating", "params": {"a": 0.5}},
    "f_lo": {"preset": "budworm_lo", "params": {"b1": 1.0, "b2": 1.0}},
    "f_hi": {"preset": "budworm_hi", "params": {"b1": 1.0}},
    "F": {"preset": "logistic_sigma", "params": {}},
    "h": {"preset": "budworm_prey", "params": {"r": 1.0, "c": 0.5}},
    "g": {"preset": "budworm_predator", "params": {"d": 1.0, "e": 0.5}}
  },
  "domain": {"x_len": 1.0, "n": 101},
  "time": {"horizon": 1.0},
  "kappa": 0.1,
  "init": {
    "sigma0": {"preset": "midband"},
    "v0": {"preset": "gauss-bump", "params": {"base": 0.5, "amp": 0.3, "center": 0.5, "width": 0.15}},
    "w0": {"preset": "constant", "params": {"value": 0.3}}
  },
  "control": {"preset": "constant", "params": {"value": 1.0}},
  "cost": {
    "preset": "quadratic_tracking",
    "params": {"c_sigma": 1.0, "sigma_ref": 0.8, "c_w": 0.5, "w_ref": 0.2, "c_bump": 0.5, "c_lin": 0.005}
  },
  "constraint": {"mode": "finite_set", "points": [0.0, 1.0], "m": 1.0},
  "solver": {"dt": 0.001, "hysteresis": "projection", "record_every": 5},
  "optimizer": {
    "time_cells": 8, "space_cells": 1, "method": "compass_search",
    "max_iters": 120, "step_init": 0.25, "step_min": 0.0001, "fd_eps": 1e-06, "seed": 1
  }
})json";

const char* kRelaxDemo = R"json({
  "name": "relax-demo",
  "model": {
    "lambda": {"preset": "zero", "params": {}},
    "f_lo": {"preset": "constant", "params": {"value": 0.0}},
    "f_hi": {"preset": "constant", "params": {"value": 1.0}},
    "F": {"preset": "constant", "params": {"value": 1.0}},
    "h": {"preset": "zero", "params": {}},
    "g": {"preset": "zero", "params": {}}
  },
  "domain": {"x_len": 1.0, "n": 51},
  "time": {"horizon": 1.0},
  "kappa": 0.1,
  "init": {
    "sigma0": {"preset": "constant", "params": {"value": 0.5}},
    "v0": {"preset": "constant", "params": {"value": 0.2}},
    "w0": {"preset": "constant", "params": {"value": 0.2}}
  },
  "control": {"preset": "constant", "params": {"value": 0.5}},
  "cost": {"preset": "quadratic_tracking", "params": {"c_bump": 1.0}},
  "constraint": {"mode": "finite_set", "points": [0.0, 1.0], "m": 1.0},
  "solver": {"dt": 0.001, "hysteresis": "projection", "record_every": 1},
  "optimizer": {
    "time_cells": 4, "space_cells": 1, "method": "compass_search",
    "max_iters": 60, "step_init": 0.25, "step_min": 0.0001, "fd_eps": 1e-06, "seed": 1
  }
})json";

const char* kBudwormStateDep = R"json({
  "name": "budworm-statedep",
  "model": {
    "lambda": {"preset": "saturating", "params": {"a": 0.5}},
    "f_lo": {"preset": "budworm_lo", "params": {"b1": 1.0, "b2": 1.0}},
    "f_hi": {"preset": "budworm_hi", "params": {"b1": 1.0}},
    "F": {"preset": "logistic_sigma", "params": {}},
    "h": {"preset": "budworm_prey", "params": {"r": 1.0, "c": 0.5}},
    "g": {"preset": "budworm_predator", "params": {"d": 1.0, "e": 0.5}}
  },
  "domain": {"x_len": 1.0, "n": 101},
  "time": {"horizon": 1.0},
  "kappa": 0.1,
  "init": {
    "sigma0": {"preset": "midband"},
    "v0": {"preset": "gauss-bump", "params": {"base": 0.5, "amp": 0.3, "center": 0.5, "width": 0.15}},
    "w0": {"preset": "constant", "params": {"value": 0.3}}
  },
  "control": {"preset": "constant", "params": {"value": 0.3}},
  "cost": {
    "preset": "quadratic_tracking",
    "params": {"c_sigma": 1.0, "sigma_ref": 0.8, "c_w": 0.5, "w_ref": 0.2, "c_bump": 0.5, "c_lin": 0.005}
  },
  "constraint": {
    "mode": "finite_set_state_dep",
    "preset": "predator_scaled",
    "params": {"gamma": 0.5},
    "m": 1.0
  },
  "solver": {"dt": 0.001, "hysteresis": "projection", "record_every": 5},
  "optimizer": {
    "time_cells": 8, "space_cells": 1, "method": "compass_search",
    "max_iters": 120, "step_init": 0.25, "step_min": 0.0001, "fd_eps": 1e-06, "seed": 1
  }
})json";

}  // namespace

const std::vector<PresetInfo>& bundled_presets() {
    static const std::vector<PresetInfo> catalog = {
        {"budworm-1d",
         "vegetation-prey-predator system with a moving band, tracking cost, U = {0, 1}"},
        {"relax-demo",
         "state-free concave control cost on U = {0, 1}; closed-form relaxed minimum 0"},
        {"budworm-statedep",
         "budworm-1d with a predator-scaled state-dependent admissible set"},
    };
    return catalog;
}

std::string bundled_preset_json(const std::string& name) {
    if (name == "budworm-1d") return kBudworm1d;
    if (name == "relax-demo") return kRelaxDemo;
    if (name == "budworm-statedep") return kBudwormStateDep;
    throw ConfigError("unknown bundled preset '" + name + "'");
}

}  // namespace hystrelax
