#include "tdbem/studies.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

using namespace tdbem;

namespace {

SolveSettings quick_settings() {
    SolveSettings s;
    s.rule = study_quadrature_rule();
    return s;
}

}  // namespace

TEST_CASE("convergence study: smoke ladder with monotone errors") {
    ConvergenceConfig cfg;
    cfg.op = OperatorId::SingleLayer;
    cfg.screen = ScreenKind::Square;
    cfg.beta = 2.0;
    cfg.levels = {1, 2, 3};
    cfg.benchmark_level = 5;
    cfg.benchmark_beta = 2.0;
    cfg.dt = 0.1;
    cfg.T = 0.6;
    cfg.solve = quick_settings();

    auto rep = convergence_study(cfg);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].dof == 8);
    CHECK(rep.rows[2].dof == 72);
    CHECK(rep.benchmark_dof == 200);
    for (const auto& row : rep.rows) {
        CHECK(row.energy_error > 0.0);
        CHECK(row.l2_error > 0.0);
    }
    // coarser meshes are worse
    CHECK(rep.rows[0].l2_error > rep.rows[2].l2_error);
    CHECK(std::isfinite(rep.energy_rate));
    CHECK(rep.l2_rate < 0.0);
    CHECK(rep.config_hash == fnv1a_hash(rep.config_json));

    // serialization round trips through valid JSON with the config echo
    auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["config"]["beta"] == 2.0);
    CHECK(j["rows"].size() == 3);
    CHECK(report_to_csv(rep).find("level,dof,h_max") != std::string::npos);
}

TEST_CASE("convergence study: DtN uses the phi block L2 error") {
    ConvergenceConfig cfg;
    cfg.op = OperatorId::DtN;
    cfg.screen = ScreenKind::Square;
    cfg.beta = 1.0;
    cfg.levels = {1, 2, 3};
    cfg.benchmark_level = 4;
    cfg.dt = 0.2;
    cfg.T = 0.6;
    cfg.solve = quick_settings();

    auto rep = convergence_study(cfg);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
        CHECK(std::isnan(row.energy_error));
        CHECK(row.l2_error > 0.0);
    }
    CHECK(std::isnan(rep.energy_rate));
    CHECK(std::isfinite(rep.l2_rate));
}

TEST_CASE("exponent study: smoke run produces fits in the window") {
    ExponentConfig cfg;
    cfg.level = 4;
    cfg.dt = 0.1;
    cfg.T = 0.5;
    cfg.times = {0.5};
    cfg.sections = {SectionKind::EdgeMidline};
    cfg.solve = quick_settings();
    auto rep = exponent_study(cfg);
    REQUIRE(rep.fits.size() == 1);
    CHECK(rep.fits[0].n_points >= 4);
    CHECK(rep.fits[0].window_hi == doctest::Approx(0.15));
    CHECK(rep.fits[0].exponent < 0.0);  // singular growth toward the edge
    CHECK(nlohmann::json::parse(report_to_json(rep))["fits"].size() == 1);
}

TEST_CASE("interp study wraps the lemma cases") {
    InterpConfig cfg;
    auto rep = interp_study(cfg);
    REQUIRE(rep.cases.size() == 2);
    CHECK(rep.cases[0].predicted == doctest::Approx(1.0));
    CHECK(rep.cases[1].predicted == doctest::Approx(2.0));
    CHECK(report_to_csv(rep).find("beta,n,h,error") != std::string::npos);
}

TEST_CASE("horn study: tiny geometry smoke run") {
    HornConfig cfg;
    cfg.radius = 0.5;
    cfg.clearance = 0.02;
    cfg.resolution = 8;
    cfg.dts = {0.1, 0.05};
    cfg.T = 3.0;
    cfg.eval_tensor_order = 6;
    cfg.n_omega = 32;
    cfg.solve = quick_settings();

    auto rep = horn_study(cfg);
    REQUIRE(rep.cases.size() == 2);
    CHECK(rep.cases[0].dt == 0.1);  // sorted by decreasing dt
    CHECK(rep.cases[1].dt == 0.05);
    CHECK(rep.omega_grid.size() == 32);
    for (const auto& c : rep.cases) {
        CHECK(c.db_resampled.size() == 32);
        CHECK(c.pressure.size() == std::lround(cfg.T / c.dt) + 1);
        bool finite = true;
        for (double v : c.db_resampled) finite = finite && std::isfinite(v);
        CHECK(finite);
    }
    REQUIRE(rep.diffs.size() == 1);
    CHECK(rep.diffs[0].dt == 0.1);
    CHECK(rep.diffs[0].peak_max >= 0.0);
    auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["cases"].size() == 2);
}

TEST_CASE("default rhs per operator") {
    CHECK(std::holds_alternative<PlaneWavePacket>(default_rhs(OperatorId::SingleLayer)));
    CHECK(std::holds_alternative<RingdownG>(default_rhs(OperatorId::Hypersingular)));
    CHECK(std::holds_alternative<RingdownG>(default_rhs(OperatorId::DtN)));
    CHECK(std::holds_alternative<PointSourceDirac>(
        default_rhs(OperatorId::AdjointDLHalfSpace)));
}
