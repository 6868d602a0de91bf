#include "tdbem/studies.hpp"
#include "tdbem/potentials.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tdbem {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_energy_form(OperatorId op) {
    return op == OperatorId::SingleLayer || op == OperatorId::Hypersingular;
}

AssemblyOptions assembly_options(const SolveSettings& s) {
    AssemblyOptions o;
    o.rule = s.rule;
    o.n_threads = s.n_threads;
    o.memory_budget_gb = s.memory_budget_gb;
    return o;
}

json rule_json(const QuadratureRule& r) {
    return json{{"outer_order", r.outer_order},
                {"subdivision_depth", r.subdivision_depth},
                {"singular_depth", r.singular_depth},
                {"separation_factor", r.separation_factor},
                {"radial_order", r.radial_order},
                {"radial_min_segments", r.radial_min_segments}};
}

json solve_json(const SolveSettings& s) {
    return json{{"rule", rule_json(s.rule)},
                {"n_threads", s.n_threads},
                {"memory_budget_gb", s.memory_budget_gb},
                {"solver",
                 {{"method", s.solver.method == StepSolverConfig::Method::ConjugateGradient
                                 ? "cg"
                                 : "lu"},
                  {"tol", s.solver.tol},
                  {"max_iter", s.solver.max_iter}}}};
}

/// Piecewise-linear interpolation of (xs, ys) at x, clamped at the ends.
double interp1(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty()) return 0.0;
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it - xs.begin();
    double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - f) * ys[i - 1] + f * ys[i];
}

}  // namespace

std::string operator_name(OperatorId op) {
    switch (op) {
        case OperatorId::SingleLayer: return "single_layer";
        case OperatorId::Hypersingular: return "hypersingular";
        case OperatorId::AdjointDLHalfSpace: return "adjoint_dl_halfspace";
        case OperatorId::DtN: return "dtn";
    }
    return "unknown";
}

std::string screen_name(ScreenKind screen) {
    switch (screen) {
        case ScreenKind::Square: return "square";
        case ScreenKind::Disc: return "disc";
        case ScreenKind::Horn: return "horn";
    }
    return "unknown";
}

std::string section_name(SectionKind section) {
    switch (section) {
        case SectionKind::EdgeMidline: return "edge_midline";
        case SectionKind::CornerDiagonal: return "corner_diagonal";
        case SectionKind::DiscRadial: return "disc_radial";
    }
    return "unknown";
}

RhsSpec default_rhs(OperatorId op) {
    switch (op) {
        case OperatorId::SingleLayer: return PlaneWavePacket{};
        case OperatorId::Hypersingular:
        case OperatorId::DtN: return RingdownG{};
        case OperatorId::AdjointDLHalfSpace: return PointSourceDirac{};
    }
    return PlaneWavePacket{};
}

Mesh make_screen_mesh(ScreenKind screen, int level, double beta, int disc_multiplier) {
    switch (screen) {
        case ScreenKind::Square: return graded_square_mesh(level, beta);
        case ScreenKind::Disc: return graded_disc_mesh(level, beta, disc_multiplier);
        case ScreenKind::Horn:
            throw std::invalid_argument("horn meshes are built by horn_surface_mesh");
    }
    throw std::invalid_argument("unknown screen kind");
}

LevelSolution solve_level(const Mesh& mesh, OperatorId op, double dt, double T,
                          const RhsSpec& rhs, const SolveSettings& settings) {
    LevelSolution sol;
    sol.mesh = mesh;
    TimeGrid grid = TimeGrid::from_horizon(dt, T);
    AssemblyOptions opts = assembly_options(settings);
    switch (op) {
        case OperatorId::SingleLayer:
            sol.system = assemble_single_layer(sol.mesh, grid, opts);
            break;
        case OperatorId::Hypersingular:
            sol.system = assemble_hypersingular(sol.mesh, grid, opts);
            break;
        case OperatorId::DtN:
            sol.system = assemble_dtn_blocks(sol.mesh, grid, opts);
            break;
        case OperatorId::AdjointDLHalfSpace:
            sol.system = assemble_adjoint_double_layer_halfspace(sol.mesh, grid, opts);
            break;
    }
    sol.rhs = assemble_rhs(sol.mesh, grid, op, rhs, settings.rule);
    sol.density = march(sol.system, sol.rhs, settings.solver);
    return sol;
}

DensityHistory dtn_phi_history(const DensityHistory& full) {
    if (full.op != OperatorId::DtN)
        throw std::invalid_argument("phi extraction applies to DtN histories");
    DensityHistory phi;
    phi.op = OperatorId::DtN;
    phi.dt = full.dt;
    phi.n_phi = full.n_phi;
    phi.dof_nodes = full.dof_nodes;  // phi-block dof -> node map
    for (int n = 0; n < full.n_steps(); ++n) phi.steps.push_back(full.phi_block(n));
    return phi;
}

// --- convergence ------------------------------------------------------------

std::string config_to_json(const ConvergenceConfig& cfg) {
    json j{{"study", "convergence"},
           {"study_id", cfg.study_id},
           {"operator", operator_name(cfg.op)},
           {"screen", screen_name(cfg.screen)},
           {"beta", cfg.beta},
           {"levels", cfg.levels},
           {"benchmark_beta", cfg.benchmark_beta},
           {"benchmark_level", cfg.benchmark_level},
           {"disc_multiplier", cfg.disc_multiplier},
           {"dt", cfg.dt},
           {"T", cfg.T},
           {"solve", solve_json(cfg.solve)}};
    return j.dump();
}

ConvergenceReport convergence_ladder(const ConvergenceConfig& cfg,
                                     const LevelSolution& benchmark) {
    ConvergenceReport rep;
    rep.study_id = cfg.study_id;
    rep.op = cfg.op;
    rep.screen = cfg.screen;
    rep.beta = cfg.beta;
    rep.dt = cfg.dt;
    rep.T = cfg.T;
    rep.benchmark_level = cfg.benchmark_level;
    rep.benchmark_beta = cfg.benchmark_beta;
    rep.benchmark_dof = benchmark.system.n_space;
    rep.config_json = config_to_json(cfg);
    rep.config_hash = fnv1a_hash(rep.config_json);

    const bool dtn = cfg.op == OperatorId::DtN;
    DensityHistory bench_hist =
        dtn ? dtn_phi_history(benchmark.density) : benchmark.density;

    RhsSpec rhs = default_rhs(cfg.op);
    for (int level : cfg.levels) {
        Mesh mesh = make_screen_mesh(cfg.screen, level, cfg.beta, cfg.disc_multiplier);
        LevelSolution sol = solve_level(mesh, cfg.op, cfg.dt, cfg.T, rhs, cfg.solve);
        ConvergenceRow row;
        row.level = level;
        row.dof = sol.system.n_space;
        row.h_max = sol.mesh.h_max;
        row.energy_error =
            has_energy_form(cfg.op)
                ? energy_error(benchmark.system, sol.mesh, sol.density, benchmark.mesh,
                               benchmark.density, benchmark.rhs)
                : kNaN;
        DensityHistory hist = dtn ? dtn_phi_history(sol.density) : sol.density;
        row.l2_error = l2_spacetime_error(sol.mesh, hist, benchmark.mesh, bench_hist, cfg.T);
        rep.rows.push_back(row);
    }

    auto fit = [&](auto&& get) {
        std::vector<RateRow> rows;
        for (const auto& r : rep.rows)
            if (std::isfinite(get(r)) && get(r) > 0.0)
                rows.push_back({r.dof, r.h_max, get(r)});
        if (rows.size() < 3) return kNaN;
        return fit_convergence_rate(rows);
    };
    rep.energy_rate = fit([](const ConvergenceRow& r) { return r.energy_error; });
    rep.l2_rate = fit([](const ConvergenceRow& r) { return r.l2_error; });
    return rep;
}

ConvergenceReport convergence_study(const ConvergenceConfig& cfg) {
    Mesh bench_mesh = make_screen_mesh(cfg.screen, cfg.benchmark_level, cfg.benchmark_beta,
                                       cfg.disc_multiplier);
    LevelSolution benchmark =
        solve_level(bench_mesh, cfg.op, cfg.dt, cfg.T, default_rhs(cfg.op), cfg.solve);
    return convergence_ladder(cfg, benchmark);
}

// --- exponents --------------------------------------------------------------

std::string config_to_json(const ExponentConfig& cfg) {
    json sections = json::array();
    for (auto s : cfg.sections) sections.push_back(section_name(s));
    json j{{"study", "exponent"},
           {"study_id", cfg.study_id},
           {"operator", operator_name(cfg.op)},
           {"screen", screen_name(cfg.screen)},
           {"beta", cfg.beta},
           {"level", cfg.level},
           {"disc_multiplier", cfg.disc_multiplier},
           {"dt", cfg.dt},
           {"T", cfg.T},
           {"times", cfg.times},
           {"sections", sections},
           {"solve", solve_json(cfg.solve)}};
    return j.dump();
}

ExponentReport exponent_fits(const ExponentConfig& cfg, const LevelSolution& sol) {
    ExponentReport rep;
    rep.study_id = cfg.study_id;
    rep.op = cfg.op;
    rep.screen = cfg.screen;
    rep.beta = cfg.beta;
    rep.dt = cfg.dt;
    rep.T = cfg.T;
    rep.level = cfg.level;
    rep.dof = sol.system.n_space;
    rep.config_json = config_to_json(cfg);
    rep.config_hash = fnv1a_hash(rep.config_json);

    if (cfg.op == OperatorId::DtN || cfg.op == OperatorId::AdjointDLHalfSpace)
        throw std::invalid_argument("exponent study applies to the V and W equations");
    const DensityHistory& hist = sol.density;
    for (double t : cfg.times)
        for (SectionKind s : cfg.sections)
            rep.fits.push_back(fit_singular_exponent(sol.mesh, hist, s, t));
    return rep;
}

ExponentReport exponent_study(const ExponentConfig& cfg) {
    Mesh mesh = make_screen_mesh(cfg.screen, cfg.level, cfg.beta, cfg.disc_multiplier);
    LevelSolution sol =
        solve_level(mesh, cfg.op, cfg.dt, cfg.T, default_rhs(cfg.op), cfg.solve);
    return exponent_fits(cfg, sol);
}

// --- interpolation lemma ----------------------------------------------------

std::string config_to_json(const InterpConfig& cfg) {
    json j{{"study", "interp"},
           {"study_id", cfg.study_id},
           {"a", cfg.a},
           {"betas", cfg.betas},
           {"levels", cfg.levels},
           {"n0", cfg.n0}};
    return j.dump();
}

InterpReport interp_study(const InterpConfig& cfg) {
    InterpReport rep;
    rep.study_id = cfg.study_id;
    rep.a = cfg.a;
    rep.config_json = config_to_json(cfg);
    rep.config_hash = fnv1a_hash(rep.config_json);
    for (double beta : cfg.betas)
        rep.cases.push_back(interpolation_lemma_study(cfg.a, beta, cfg.levels, cfg.n0));
    return rep;
}

// --- horn -------------------------------------------------------------------

std::string config_to_json(const HornConfig& cfg) {
    json j{{"study", "horn"},
           {"study_id", cfg.study_id},
           {"radius", cfg.radius},
           {"clearance", cfg.clearance},
           {"resolution", cfg.resolution},
           {"half_length", cfg.half_length},
           {"dts", cfg.dts},
           {"T", cfg.T},
           {"y_src", {cfg.y_src.x(), cfg.y_src.y(), cfg.y_src.z()}},
           {"x_fp", {cfg.x_fp.x(), cfg.x_fp.y(), cfg.x_fp.z()}},
           {"spectrum",
            {{"f_lo_hz", cfg.spectrum.f_lo_hz},
             {"f_hi_hz", cfg.spectrum.f_hi_hz},
             {"speed_of_sound", cfg.spectrum.speed_of_sound},
             {"length_unit", cfg.spectrum.length_unit},
             {"pad_factor", cfg.spectrum.pad_factor}}},
           {"eval_tensor_order", cfg.eval_tensor_order},
           {"n_omega", cfg.n_omega},
           {"solve", solve_json(cfg.solve)}};
    return j.dump();
}

HornReport horn_study(const HornConfig& cfg) {
    if (cfg.dts.empty()) throw std::invalid_argument("horn study needs time step sizes");
    HornReport rep;
    rep.study_id = cfg.study_id;
    rep.radius = cfg.radius;
    rep.clearance = cfg.clearance;
    rep.T = cfg.T;
    rep.resolution = cfg.resolution;
    rep.config_json = config_to_json(cfg);
    rep.config_hash = fnv1a_hash(rep.config_json);

    Mesh mesh = horn_surface_mesh(cfg.radius, cfg.clearance, cfg.resolution, cfg.half_length);
    rep.mesh_dof = mesh.n_triangles();

    // shared omega grid across the configured band
    double to_omega = 2.0 * 3.14159265358979323846 * cfg.spectrum.length_unit /
                      cfg.spectrum.speed_of_sound;
    double w_lo = cfg.spectrum.f_lo_hz * to_omega, w_hi = cfg.spectrum.f_hi_hz * to_omega;
    int n_omega = std::max(cfg.n_omega, 8);
    for (int i = 0; i < n_omega; ++i)
        rep.omega_grid.push_back(w_lo + (w_hi - w_lo) * i / double(n_omega - 1));

    std::vector<double> dts = cfg.dts;
    std::sort(dts.begin(), dts.end(), std::greater<>());

    EvaluationOptions eval;
    eval.tensor_order = cfg.eval_tensor_order;
    eval.n_threads = cfg.solve.n_threads;

    for (double dt : dts) {
        TimeGrid grid = TimeGrid::from_horizon(dt, cfg.T);
        LevelSolution sol = solve_level(mesh, OperatorId::AdjointDLHalfSpace, dt, cfg.T,
                                        PointSourceDirac{cfg.y_src}, cfg.solve);
        std::vector<double> times;
        for (int n = 0; n <= grid.n_steps; ++n) times.push_back(grid.time(n));
        FieldProbe probe = evaluate_halfspace_pressure(sol.density, mesh, {cfg.x_fp}, times, eval);

        HornCase hc;
        hc.dt = dt;
        for (int n = 0; n <= grid.n_steps; ++n) hc.pressure.push_back(probe.values(0, n));
        hc.spectrum = amplification_spectrum(hc.pressure, grid, cfg.y_src, cfg.x_fp,
                                             cfg.spectrum);
        for (double w : rep.omega_grid)
            hc.db_resampled.push_back(interp1(hc.spectrum.omega, hc.spectrum.db, w));
        rep.cases.push_back(std::move(hc));
    }

    // peak band from the reference spectrum (smallest dt, last case)
    const std::vector<double>& ref = rep.cases.back().db_resampled;
    double peak = 0.0;
    for (double v : ref) peak = std::max(peak, std::abs(v));
    std::vector<bool> in_peak(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) in_peak[i] = std::abs(ref[i]) >= 0.5 * peak;

    for (std::size_t c = 0; c + 1 < rep.cases.size(); ++c) {
        HornDiffRow row;
        row.dt = rep.cases[c].dt;
        double s_pk = 0.0, s_off = 0.0;
        int n_pk = 0, n_off = 0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            double d = std::abs(rep.cases[c].db_resampled[i] - ref[i]);
            if (in_peak[i]) {
                s_pk += d * d;
                ++n_pk;
                row.peak_max = std::max(row.peak_max, d);
            } else {
                s_off += d * d;
                ++n_off;
                row.offpeak_max = std::max(row.offpeak_max, d);
            }
        }
        row.peak_rms = n_pk ? std::sqrt(s_pk / n_pk) : 0.0;
        row.offpeak_rms = n_off ? std::sqrt(s_off / n_off) : 0.0;
        rep.diffs.push_back(row);
    }
    return rep;
}

// --- serialization ----------------------------------------------------------

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

json header_json(const std::string& study_id, const std::string& config_json,
                 std::uint64_t config_hash) {
    return json{{"study_id", study_id},
                {"config", json::parse(config_json)},
                {"config_hash", config_hash}};
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

std::string report_to_json(const ConvergenceReport& r) {
    json j = header_json(r.study_id, r.config_json, r.config_hash);
    j["operator"] = operator_name(r.op);
    j["screen"] = screen_name(r.screen);
    j["beta"] = r.beta;
    j["benchmark_dof"] = r.benchmark_dof;
    j["rows"] = json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"level", row.level},
                             {"dof", row.dof},
                             {"h_max", row.h_max},
                             {"energy_error", json_safe(row.energy_error)},
                             {"l2_error", row.l2_error}});
    j["energy_rate"] = json_safe(r.energy_rate);
    j["l2_rate"] = json_safe(r.l2_rate);
    j["energy_rate_valid"] = std::isfinite(r.energy_rate);
    j["l2_rate_valid"] = std::isfinite(r.l2_rate);
    return j.dump(2);
}

std::string report_to_csv(const ConvergenceReport& r) {
    std::string out = "# config_hash=" + std::to_string(r.config_hash) + "\n";
    out += "level,dof,h_max,energy_error,l2_error\n";
    for (const auto& row : r.rows)
        out += std::to_string(row.level) + "," + std::to_string(row.dof) + "," +
               std::to_string(row.h_max) + "," + std::to_string(row.energy_error) + "," +
               std::to_string(row.l2_error) + "\n";
    return out;
}

std::string report_to_json(const ExponentReport& r) {
    json j = header_json(r.study_id, r.config_json, r.config_hash);
    j["operator"] = operator_name(r.op);
    j["screen"] = screen_name(r.screen);
    j["beta"] = r.beta;
    j["dof"] = r.dof;
    j["fits"] = json::array();
    for (const auto& f : r.fits)
        j["fits"].push_back({{"time", f.time},
                             {"section", section_name(f.section)},
                             {"exponent", f.exponent},
                             {"r2", f.r2},
                             {"window_lo", f.window_lo},
                             {"window_hi", f.window_hi},
                             {"n_points", f.n_points}});
    return j.dump(2);
}

std::string report_to_csv(const ExponentReport& r) {
    std::string out = "# config_hash=" + std::to_string(r.config_hash) + "\n";
    out += "time,section,exponent,r2,window_lo,window_hi,n_points\n";
    for (const auto& f : r.fits)
        out += std::to_string(f.time) + "," + section_name(f.section) + "," +
               std::to_string(f.exponent) + "," + std::to_string(f.r2) + "," +
               std::to_string(f.window_lo) + "," + std::to_string(f.window_hi) + "," +
               std::to_string(f.n_points) + "\n";
    return out;
}

std::string report_to_json(const InterpReport& r) {
    json j = header_json(r.study_id, r.config_json, r.config_hash);
    j["a"] = r.a;
    j["cases"] = json::array();
    for (const auto& c : r.cases) {
        json rows = json::array();
        for (const auto& row : c.rows)
            rows.push_back({{"n", row.n}, {"h", row.h}, {"error", row.error}});
        j["cases"].push_back({{"beta", c.beta},
                              {"rate", c.rate},
                              {"predicted", c.predicted},
                              {"rows", rows}});
    }
    return j.dump(2);
}

std::string report_to_csv(const InterpReport& r) {
    std::string out = "# config_hash=" + std::to_string(r.config_hash) + "\n";
    out += "beta,n,h,error,rate,predicted\n";
    for (const auto& c : r.cases)
        for (const auto& row : c.rows)
            out += std::to_string(c.beta) + "," + std::to_string(row.n) + "," +
                   std::to_string(row.h) + "," + std::to_string(row.error) + "," +
                   std::to_string(c.rate) + "," + std::to_string(c.predicted) + "\n";
    return out;
}

std::string report_to_json(const HornReport& r) {
    json j = header_json(r.study_id, r.config_json, r.config_hash);
    j["radius"] = r.radius;
    j["clearance"] = r.clearance;
    j["resolution"] = r.resolution;
    j["T"] = r.T;
    j["mesh_dof"] = r.mesh_dof;
    j["omega_grid"] = r.omega_grid;
    j["cases"] = json::array();
    for (const auto& c : r.cases)
        j["cases"].push_back({{"dt", c.dt},
                              {"omega", c.spectrum.omega},
                              {"freq_hz", c.spectrum.freq_hz},
                              {"db", c.spectrum.db},
                              {"db_resampled", c.db_resampled}});
    j["diffs"] = json::array();
    for (const auto& d : r.diffs)
        j["diffs"].push_back({{"dt", d.dt},
                              {"peak_rms", d.peak_rms},
                              {"offpeak_rms", d.offpeak_rms},
                              {"peak_max", d.peak_max},
                              {"offpeak_max", d.offpeak_max}});
    return j.dump(2);
}

std::string report_to_csv(const HornReport& r) {
    std::string out = "# config_hash=" + std::to_string(r.config_hash) + "\n";
    out += "omega";
    for (const auto& c : r.cases) out += ",db_dt_" + std::to_string(c.dt);
    out += "\n";
    for (std::size_t i = 0; i < r.omega_grid.size(); ++i) {
        out += std::to_string(r.omega_grid[i]);
        for (const auto& c : r.cases) out += "," + std::to_string(c.db_resampled[i]);
        out += "\n";
    }
    return out;
}

}  // namespace tdbem
