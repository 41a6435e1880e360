#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hystrelax/dynamics.hpp"
#include "test_helpers.hpp"

using namespace hystrelax;

TEST_CASE("every bundled preset passes validation at 1e4 samples") {
    for (const auto& info : bundled_presets()) {
        CAPTURE(info.name);
        const LoadedConfig lc = helpers::bundled(info.name);
        const ValidationReport rep = validate_scenario(lc.scenario, 10000);
        for (const auto& check : rep.checks) {
            CAPTURE(check.id);
            CAPTURE(check.worst_value);
            CHECK(check.pass);
        }
    }
}

TEST_CASE("inverted band faces fail H2 with a witness point") {
    LoadedConfig lc = helpers::bundled("relax-demo");
    lc.scenario.f_lo = make_band_face_preset("constant", {{"value", 0.8}});
    lc.scenario.f_hi = make_band_face_preset("constant", {{"value", 0.5}});
    const ValidationReport rep = validate_scenario(lc.scenario, 500);
    bool h2_failed = false;
    for (const auto& check : rep.checks) {
        if (check.id == "H2") {
            h2_failed = !check.pass;
            CHECK(check.worst_value > 0.0);
            CHECK(!check.worst_point.empty());
        }
    }
    CHECK(h2_failed);
    CHECK(!rep.all_pass());
}

TEST_CASE("nonzero h at v = 0 fails the H2 sign condition") {
    LoadedConfig lc = helpers::bundled("relax-demo");
    lc.scenario.h_fn = make_reaction_preset("constant", {{"value", 0.1}});
    const ValidationReport rep = validate_scenario(lc.scenario, 500);
    const auto failed = rep.failed_ids();
    CHECK(std::find(failed.begin(), failed.end(), "H2") != failed.end());
}

TEST_CASE("initial data outside the band fails H4 and quick_check") {
    LoadedConfig lc = helpers::bundled("budworm-1d");
    lc.scenario.sigma0 = Field::Constant(lc.scenario.mesh.n, 0.95);  // above f_hi < 0.7
    const ValidationReport rep = validate_scenario(lc.scenario, 200);
    const auto failed = rep.failed_ids();
    CHECK(std::find(failed.begin(), failed.end(), "H4") != failed.end());
    CHECK_THROWS_AS(lc.scenario.quick_check(), std::invalid_argument);
}

TEST_CASE("reaction evaluation respects the sign structure") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Scenario& s = lc.scenario;
    const int n = s.mesh.n;

    State st{Field::Constant(n, 0.5), Field::Constant(n, 0.4), Field::Constant(n, 0.3)};
    const Field u = Field::Constant(n, 0.7);

    SUBCASE("v = 0 kills the prey reaction") {
        st.v = Field::Zero(n);
        const auto [fu, hv, gw] = eval_reactions(s, st, u);
        CHECK(hv.abs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("w = 0 kills the predator reaction") {
        st.w = Field::Zero(n);
        const auto [fu, hv, gw] = eval_reactions(s, st, u);
        CHECK(gw.abs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("u = 0 kills the control forcing") {
        const auto [fu, hv, gw] = eval_reactions(s, st, Field::Zero(n));
        CHECK(fu.abs().maxCoeff() == doctest::Approx(0.0));
    }
}

TEST_CASE("reaction evaluation is nodewise local") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Scenario& s = lc.scenario;
    const int n = s.mesh.n;
    State st{Field::Constant(n, 0.5), Field::Constant(n, 0.4), Field::Constant(n, 0.3)};
    const Field u = Field::Constant(n, 0.7);
    const auto [fu0, hv0, gw0] = eval_reactions(s, st, u);

    State st2 = st;
    st2.v(n / 2) = 0.9;
    const auto [fu1, hv1, gw1] = eval_reactions(s, st2, u);
    for (int i = 0; i < n; ++i) {
        if (i == n / 2) continue;
        CHECK(fu1(i) == fu0(i));
        CHECK(hv1(i) == hv0(i));
        CHECK(gw1(i) == gw0(i));
    }
    CHECK(hv1(n / 2) != hv0(n / 2));
}

TEST_CASE("non-finite reaction values are reported with node and function") {
    LoadedConfig lc = helpers::bundled("relax-demo");
    Scenario& s = lc.scenario;
    s.h_fn.f = [](double, double v, double) { return v > 0.1 ? 0.0 / 0.0 : 0.0; };
    const int n = s.mesh.n;
    State st{Field::Constant(n, 0.5), Field::Constant(n, 0.2), Field::Constant(n, 0.2)};
    try {
        eval_reactions(s, st, Field::Zero(n));
        FAIL("expected an evaluation error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("h non-finite") != std::string::npos);
        CHECK(msg.find("node 0") != std::string::npos);
    }
}

TEST_CASE("midband initial data sits exactly between the faces") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const Scenario& s = lc.scenario;
    for (int i = 0; i < s.mesh.n; ++i) {
        const Band b = s.band_at(s.v0(i), s.w0(i));
        CHECK(s.sigma0(i) == doctest::Approx(0.5 * (b.lo + b.hi)));
        CHECK(s.sigma0(i) >= b.lo);
        CHECK(s.sigma0(i) <= b.hi);
    }
}

TEST_CASE("unknown preset ids name the catalog") {
    CHECK_THROWS_WITH_AS(make_lambda_preset("nope", {}),
                         doctest::Contains("unknown lambda preset"), std::invalid_argument);
    CHECK_THROWS_AS(make_reaction_preset("nope", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_band_face_preset("nope", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_cost_preset("nope", {}), std::invalid_argument);
}

TEST_CASE("validator estimates finite moduli for budworm") {
    const LoadedConfig lc = helpers::bundled("budworm-1d");
    const ValidationReport rep = validate_scenario(lc.scenario, 2000);
    CHECK(rep.moduli.at("lambda_d1_sup") > 0.0);
    CHECK(rep.moduli.at("lambda_d1_sup") < 1.0);  // a/(1+v)^2 <= 0.5 on [0, 2]
    CHECK(rep.moduli.at("lip_h") > 0.0);
    CHECK(std::isfinite(rep.moduli.at("k0_cost")));
    const json j = rep.to_json();
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["checks"].size() == rep.checks.size());
}
