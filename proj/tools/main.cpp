// tdbem: configuration-driven front end for the time-domain BEM solver.
//
// Subcommands: mesh, solve, evaluate, study {convergence|exponent|interp|horn}.
// Options come from a JSON config file (--config) with flag overrides; every
// output file echoes the hash of the effective config.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "tdbem/potentials.hpp"
#include "tdbem/studies.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace tdbem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

ScreenKind parse_screen(const std::string& s) {
    if (s == "square") return ScreenKind::Square;
    if (s == "disc") return ScreenKind::Disc;
    if (s == "horn") return ScreenKind::Horn;
    throw ConfigError("unknown screen kind '" + s + "' (square|disc|horn)");
}

OperatorId parse_operator(const std::string& s) {
    if (s == "single_layer" || s == "v") return OperatorId::SingleLayer;
    if (s == "hypersingular" || s == "w") return OperatorId::Hypersingular;
    if (s == "dtn") return OperatorId::DtN;
    if (s == "adjoint_dl_halfspace" || s == "horn") return OperatorId::AdjointDLHalfSpace;
    throw ConfigError("unknown operator '" + s +
                      "' (single_layer|hypersingular|dtn|adjoint_dl_halfspace)");
}

SectionKind parse_section(const std::string& s) {
    if (s == "edge_midline") return SectionKind::EdgeMidline;
    if (s == "corner_diagonal") return SectionKind::CornerDiagonal;
    if (s == "disc_radial") return SectionKind::DiscRadial;
    throw ConfigError("unknown section '" + s +
                      "' (edge_midline|corner_diagonal|disc_radial)");
}

Vec3 parse_vec3(const json& j, const std::string& key, const Vec3& fallback) {
    if (!j.contains(key)) return fallback;
    auto v = j.at(key);
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("config key '" + key + "' must be a 3-vector");
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

QuadratureRule parse_rule(const json& cfg) {
    QuadratureRule r = study_quadrature_rule();
    if (!cfg.contains("quadrature")) return r;
    const json& q = cfg.at("quadrature");
    if (q.is_string()) {
        std::string s = q.get<std::string>();
        if (s == "study") return study_quadrature_rule();
        if (s == "reference") return QuadratureRule{};
        throw ConfigError("quadrature preset must be 'study' or 'reference'");
    }
    r.outer_order = get_or(q, "outer_order", r.outer_order);
    r.subdivision_depth = get_or(q, "subdivision_depth", r.subdivision_depth);
    r.singular_depth = get_or(q, "singular_depth", r.singular_depth);
    r.separation_factor = get_or(q, "separation_factor", r.separation_factor);
    r.radial_order = get_or(q, "radial_order", r.radial_order);
    r.radial_min_segments = get_or(q, "radial_min_segments", r.radial_min_segments);
    r.radial_grade_levels = get_or(q, "radial_grade_levels", r.radial_grade_levels);
    return r;
}

SolveSettings parse_solve_settings(const json& cfg) {
    SolveSettings s;
    s.rule = parse_rule(cfg);
    s.n_threads = get_or(cfg, "n_threads", 0);
    s.memory_budget_gb = get_or(cfg, "memory_budget_gb", 8.0);
    if (cfg.contains("solver")) {
        const json& so = cfg.at("solver");
        std::string m = get_or<std::string>(so, "method", "lu");
        if (m == "cg")
            s.solver.method = StepSolverConfig::Method::ConjugateGradient;
        else if (m == "lu")
            s.solver.method = StepSolverConfig::Method::DirectFactorization;
        else
            throw ConfigError("solver.method must be 'lu' or 'cg'");
        s.solver.tol = get_or(so, "tol", s.solver.tol);
        s.solver.max_iter = get_or(so, "max_iter", s.solver.max_iter);
    }
    return s;
}

RhsSpec parse_rhs(const json& cfg, OperatorId op) {
    std::string id = get_or<std::string>(cfg, "rhs_id", "");
    if (id.empty()) return default_rhs(op);
    if (id == "plane_wave") {
        PlaneWavePacket p;
        p.k = parse_vec3(cfg, "rhs_k", p.k);
        return p;
    }
    if (id == "ringdown") return RingdownG{};
    if (id == "point_source") {
        PointSourceDirac p;
        p.y_src = parse_vec3(cfg, "y_src", p.y_src);
        return p;
    }
    throw ConfigError("unknown rhs_id '" + id + "' (plane_wave|ringdown|point_source)");
}

Mesh mesh_from_config(const json& cfg) {
    ScreenKind screen = parse_screen(get_or<std::string>(cfg, "screen", "square"));
    if (screen == ScreenKind::Horn)
        return horn_surface_mesh(get_or(cfg, "radius", 0.5), get_or(cfg, "clearance", 0.02),
                                 get_or(cfg, "resolution", 16),
                                 get_or(cfg, "half_length", -1.0));
    double beta = get_or(cfg, "beta", 2.0);
    if (beta < 1.0) throw ConfigError("beta must be >= 1 (1 = uniform mesh)");
    int levels = get_or(cfg, "levels", 4);
    if (levels < 1) throw ConfigError("levels must be >= 1");
    return make_screen_mesh(screen, levels, beta, get_or(cfg, "disc_multiplier", 22));
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    std::cout << "wrote " << path.string() << "\n";
}

std::string hash_line(std::uint64_t hash) {
    return "# config_hash=" + std::to_string(hash) + "\n";
}

// --- subcommand payloads ----------------------------------------------------

int cmd_mesh(const json& cfg, const std::string& output) {
    Mesh mesh = mesh_from_config(cfg);
    std::uint64_t hash = fnv1a_hash(cfg.dump());
    json out{{"config", cfg},
             {"config_hash", hash},
             {"n_triangles", mesh.n_triangles()},
             {"n_nodes", mesh.n_nodes()},
             {"h_max", mesh.h_max},
             {"h_min", mesh.h_min},
             {"mesh", json::parse(mesh_to_json(mesh))}};
    write_file(output.empty() ? "mesh.json" : output, out.dump(2));
    return kExitOk;
}

LevelSolution solve_from_config(const json& cfg) {
    Mesh mesh = mesh_from_config(cfg);
    OperatorId op = parse_operator(get_or<std::string>(cfg, "operator", "single_layer"));
    double dt = get_or(cfg, "dt", 0.1);
    double T = get_or(cfg, "T", 1.0);
    if (dt <= 0 || T <= 0) throw ConfigError("dt and T must be positive");
    TimeGrid grid = TimeGrid::from_horizon(dt, T);
    if (cfl_ratio(grid, mesh) > 1.0)
        std::cerr << "warning: dt exceeds the graded-mesh scale h_min^beta\n";
    return solve_level(mesh, op, dt, T, parse_rhs(cfg, op), parse_solve_settings(cfg));
}

int cmd_solve(const json& cfg, const std::string& output_dir) {
    LevelSolution sol = solve_from_config(cfg);
    std::uint64_t hash = fnv1a_hash(cfg.dump());
    fs::path dir = output_dir.empty() ? "." : output_dir;

    std::ostringstream csv;
    csv << hash_line(hash) << "step,dof,value\n";
    csv.precision(17);
    for (int n = 0; n < sol.density.n_steps(); ++n)
        for (int d = 0; d < sol.density.steps[n].size(); ++d)
            csv << (n + 1) << ',' << d << ',' << sol.density.steps[n][d] << '\n';
    write_file(dir / "density.csv", csv.str());

    json meta{{"config", cfg},
              {"config_hash", hash},
              {"operator", operator_name(sol.density.op)},
              {"dof", sol.system.n_space},
              {"n_phi", sol.system.n_phi},
              {"n_steps", sol.density.n_steps()},
              {"dt", sol.density.dt},
              {"lag_cutoff", sol.system.lag_cutoff},
              {"rhs_id", sol.rhs.rhs_id},
              {"spacetime_residual", spacetime_residual(sol.system, sol.rhs, sol.density)}};
    write_file(dir / "density.json", meta.dump(2));
    return kExitOk;
}

int cmd_evaluate(const json& cfg, const std::string& output_dir) {
    if (!cfg.contains("points") || !cfg.at("points").is_array() || cfg.at("points").empty())
        throw ConfigError("evaluate needs a nonempty 'points' array of 3-vectors");
    std::vector<Vec3> points;
    for (const auto& p : cfg.at("points")) {
        if (!p.is_array() || p.size() != 3) throw ConfigError("points entries must be 3-vectors");
        points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    std::vector<double> times = get_or(cfg, "times", std::vector<double>{});
    LevelSolution sol = solve_from_config(cfg);
    if (times.empty()) {
        for (int n = 0; n <= std::lround(sol.density.n_steps()); ++n)
            times.push_back(n * sol.density.dt);
    }
    EvaluationOptions opts;
    opts.tensor_order = get_or(cfg, "eval_tensor_order", opts.tensor_order);
    FieldProbe probe =
        sol.density.op == OperatorId::AdjointDLHalfSpace
            ? evaluate_halfspace_pressure(sol.density, sol.mesh, points, times, opts)
            : evaluate_single_layer(sol.density, sol.mesh, points, times, opts);

    std::uint64_t hash = fnv1a_hash(cfg.dump());
    fs::path dir = output_dir.empty() ? "." : output_dir;
    write_file(dir / "probe.csv", hash_line(hash) + field_probe_csv(probe));
    return kExitOk;
}

std::string tag(double v) {
    std::ostringstream os;
    os << v;
    std::string s = os.str();
    for (auto& c : s)
        if (c == '.') c = 'p';
    return s;
}

int cmd_study(const std::string& kind, const json& cfg, const std::string& output_dir) {
    fs::path dir = output_dir.empty() ? "." : output_dir;
    if (kind == "convergence") {
        ConvergenceConfig c;
        c.study_id = get_or<std::string>(cfg, "study_id", "convergence");
        c.op = parse_operator(get_or<std::string>(cfg, "operator", "single_layer"));
        c.screen = parse_screen(get_or<std::string>(cfg, "screen", "square"));
        c.beta = get_or(cfg, "beta", 2.0);
        c.levels = get_or(cfg, "levels", c.levels);
        c.benchmark_beta = get_or(cfg, "benchmark_beta", 2.0);
        c.benchmark_level = get_or(cfg, "benchmark_level", 9);
        c.disc_multiplier = get_or(cfg, "disc_multiplier", 22);
        c.dt = get_or(cfg, "dt", 0.005);
        c.T = get_or(cfg, "T", 1.0);
        c.solve = parse_solve_settings(cfg);
        auto rep = convergence_study(c);
        std::string base = c.study_id + "_beta" + tag(c.beta) + "_dt" + tag(c.dt);
        write_file(dir / (base + ".json"), report_to_json(rep));
        write_file(dir / (base + ".csv"), report_to_csv(rep));
        std::cout << "energy_rate=" << rep.energy_rate << " l2_rate=" << rep.l2_rate << "\n";
        return kExitOk;
    }
    if (kind == "exponent") {
        ExponentConfig c;
        c.study_id = get_or<std::string>(cfg, "study_id", "exponent");
        c.op = parse_operator(get_or<std::string>(cfg, "operator", "single_layer"));
        c.screen = parse_screen(get_or<std::string>(cfg, "screen", "square"));
        c.beta = get_or(cfg, "beta", 2.0);
        c.level = get_or(cfg, "levels", 9);
        c.disc_multiplier = get_or(cfg, "disc_multiplier", 22);
        c.dt = get_or(cfg, "dt", 0.01);
        c.T = get_or(cfg, "T", 1.0);
        c.times = get_or(cfg, "times", c.times);
        if (cfg.contains("sections")) {
            c.sections.clear();
            for (const auto& s : cfg.at("sections"))
                c.sections.push_back(parse_section(s.get<std::string>()));
        }
        c.solve = parse_solve_settings(cfg);
        auto rep = exponent_study(c);
        std::string base = c.study_id + "_beta" + tag(c.beta) + "_dt" + tag(c.dt);
        write_file(dir / (base + ".json"), report_to_json(rep));
        write_file(dir / (base + ".csv"), report_to_csv(rep));
        for (const auto& f : rep.fits)
            std::cout << "t=" << f.time << " " << section_name(f.section)
                      << " exponent=" << f.exponent << " r2=" << f.r2 << "\n";
        return kExitOk;
    }
    if (kind == "interp") {
        InterpConfig c;
        c.study_id = get_or<std::string>(cfg, "study_id", "interp");
        c.a = get_or(cfg, "a", 0.5);
        c.betas = get_or(cfg, "betas", c.betas);
        c.levels = get_or(cfg, "levels", 4);
        c.n0 = get_or(cfg, "n0", 8);
        auto rep = interp_study(c);
        std::string base = c.study_id + "_a" + tag(c.a);
        write_file(dir / (base + ".json"), report_to_json(rep));
        write_file(dir / (base + ".csv"), report_to_csv(rep));
        for (const auto& cs : rep.cases)
            std::cout << "beta=" << cs.beta << " rate=" << cs.rate
                      << " predicted=" << cs.predicted << "\n";
        return kExitOk;
    }
    if (kind == "horn") {
        HornConfig c;
        c.study_id = get_or<std::string>(cfg, "study_id", "horn");
        c.radius = get_or(cfg, "radius", c.radius);
        c.clearance = get_or(cfg, "clearance", c.clearance);
        c.resolution = get_or(cfg, "resolution", c.resolution);
        c.half_length = get_or(cfg, "half_length", c.half_length);
        c.dts = get_or(cfg, "dts", c.dts);
        c.T = get_or(cfg, "T", c.T);
        c.y_src = parse_vec3(cfg, "y_src", c.y_src);
        c.x_fp = parse_vec3(cfg, "x_fp", c.x_fp);
        if (cfg.contains("spectrum")) {
            const json& s = cfg.at("spectrum");
            c.spectrum.f_lo_hz = get_or(s, "f_lo_hz", c.spectrum.f_lo_hz);
            c.spectrum.f_hi_hz = get_or(s, "f_hi_hz", c.spectrum.f_hi_hz);
            c.spectrum.speed_of_sound = get_or(s, "speed_of_sound", c.spectrum.speed_of_sound);
            c.spectrum.length_unit = get_or(s, "length_unit", c.spectrum.length_unit);
            c.spectrum.pad_factor = get_or(s, "pad_factor", c.spectrum.pad_factor);
        }
        c.eval_tensor_order = get_or(cfg, "eval_tensor_order", c.eval_tensor_order);
        c.n_omega = get_or(cfg, "n_omega", c.n_omega);
        c.solve = parse_solve_settings(cfg);
        auto rep = horn_study(c);
        std::string base = c.study_id + "_r" + tag(c.radius);
        write_file(dir / (base + ".json"), report_to_json(rep));
        write_file(dir / (base + ".csv"), report_to_csv(rep));
        for (const auto& d : rep.diffs)
            std::cout << "dt=" << d.dt << " peak_rms=" << d.peak_rms
                      << " offpeak_rms=" << d.offpeak_rms << "\n";
        return kExitOk;
    }
    throw ConfigError("unknown study kind '" + kind +
                      "' (convergence|exponent|interp|horn)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-domain Galerkin BEM for the wave equation on screens"};
    app.require_subcommand(1);

    std::string config_path, output, output_dir, study_kind;

    // flag overrides shared by all subcommands; applied on top of --config
    json overrides = json::object();
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option_function<std::string>(
            "--screen", [&](const std::string& v) { overrides["screen"] = v; },
            "square|disc|horn");
        sub->add_option_function<double>(
            "--beta", [&](double v) { overrides["beta"] = v; }, "grading exponent (>= 1)");
        sub->add_option_function<int>(
            "--levels", [&](int v) { overrides["levels"] = v; }, "refinement parameter N");
        sub->add_option_function<std::string>(
            "--operator", [&](const std::string& v) { overrides["operator"] = v; },
            "single_layer|hypersingular|dtn|adjoint_dl_halfspace");
        sub->add_option_function<double>(
            "--dt", [&](double v) { overrides["dt"] = v; }, "time step size");
        sub->add_option_function<double>(
            "--T", [&](double v) { overrides["T"] = v; }, "time horizon");
        sub->add_option_function<std::string>(
            "--rhs", [&](const std::string& v) { overrides["rhs_id"] = v; },
            "plane_wave|ringdown|point_source");
        sub->add_option_function<int>(
            "--resolution", [&](int v) { overrides["resolution"] = v; },
            "horn angular resolution");
        sub->add_option_function<double>(
            "--radius", [&](double v) { overrides["radius"] = v; }, "horn cylinder radius");
        sub->add_option_function<double>(
            "--clearance", [&](double v) { overrides["clearance"] = v; },
            "horn ground clearance");
    };

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate a graded screen mesh");
    add_common(mesh_cmd);
    mesh_cmd->add_option("--output", output, "output mesh JSON path");

    CLI::App* solve_cmd = app.add_subcommand("solve", "assemble and march a density");
    add_common(solve_cmd);
    solve_cmd->add_option("--output-dir", output_dir, "output directory");

    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "solve and evaluate the field at probe points");
    add_common(eval_cmd);
    eval_cmd->add_option("--output-dir", output_dir, "output directory");

    CLI::App* study_cmd = app.add_subcommand("study", "run a reproduction study");
    add_common(study_cmd);
    study_cmd->add_option("kind", study_kind, "convergence|exponent|interp|horn")
        ->required();
    study_cmd->add_option("--output-dir", output_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        json cfg = load_config(config_path);
        if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
        for (auto& [k, v] : overrides.items()) cfg[k] = v;

        if (mesh_cmd->parsed()) return cmd_mesh(cfg, output);
        if (solve_cmd->parsed()) return cmd_solve(cfg, output_dir);
        if (eval_cmd->parsed()) return cmd_evaluate(cfg, output_dir);
        if (study_cmd->parsed()) return cmd_study(study_kind, cfg, output_dir);
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
