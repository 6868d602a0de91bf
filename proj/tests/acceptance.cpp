// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria marked "reduced scale" use the documented reduced ladders
// (half the finest refinement level) so the harness stays CI-runnable on a
// single core.

#include "support/dense_oracle.hpp"
#include "support/mc_oracle.hpp"

#include "tdbem/potentials.hpp"
#include "tdbem/studies.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace tdbem;
using namespace tdbem::testing;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
    std::printf("CRITERION %2d [%s] %s%s%s  (t=%.0fs)\n", id, pass ? "PASS" : "FAIL",
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

Mesh fan_mesh() {
    Mesh m;
    m.nodes = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, 0)};
    m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    m.boundary_nodes = {0, 1, 2, 3};
    m.finalize();
    return m;
}

Mesh lifted_fan_mesh() {
    Mesh m;
    m.nodes = {Vec3(1.5, 0, 0.3), Vec3(0.5, 1, 0.3), Vec3(-0.5, 0, 0.3), Vec3(0.5, -1, 0.3),
               Vec3(0.5, 0, 0.3)};
    m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    m.boundary_nodes = {0, 1, 2, 3};
    m.finalize();
    return m;
}

// --- criterion 1: graded mesh exactness -------------------------------------

void criterion_1() {
    double max_err = 0.0;
    bool structure_ok = true;
    for (double beta : {1.0, 2.0}) {
        for (int N : {3, 5}) {
            Mesh m = graded_square_mesh(N, beta);
            structure_ok = structure_ok && m.n_triangles() == 8 * N * N;
            // independent re-derivation of the graded 1D coordinates
            std::vector<double> c(2 * N + 1);
            for (int k = 0; k <= N; ++k) {
                c[k] = -1.0 + std::pow(double(k) / N, beta);
                c[2 * N - k] = -c[k];
            }
            c[N] = 0.0;
            int M = 2 * N + 1;
            for (int j = 0; j < M; ++j)
                for (int i = 0; i < M; ++i) {
                    Vec3 expect(c[i], c[j], 0.0);
                    max_err = std::max(max_err, (m.nodes[j * M + i] - expect).norm());
                }
        }
        // disc: ring k has radius 1 - (k/N)^beta with mult*(N-k) equispaced nodes
        int N = 4, mult = 6;
        Mesh d = graded_disc_mesh(N, beta, mult);
        structure_ok = structure_ok && d.n_triangles() == mult * N * N;
        int id = 0;
        for (int k = 0; k < N; ++k) {
            double r = 1.0 - std::pow(double(k) / N, beta);
            int n = mult * (N - k);
            for (int j = 0; j < n; ++j, ++id) {
                double th = 2.0 * std::numbers::pi * j / n;
                Vec3 expect(r * std::cos(th), r * std::sin(th), 0.0);
                max_err = std::max(max_err, (d.nodes[id] - expect).norm());
            }
        }
        max_err = std::max(max_err, d.nodes[id].norm());  // center
    }
    record(1, "graded mesh exactness", structure_ok && max_err <= 1e-14,
           "max node error " + fmt(max_err));
}

// --- criterion 2: Monte-Carlo quadrature oracle ------------------------------

void criterion_2() {
    std::mt19937_64 rng(20260823);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto rand_tri = [&](double ox, double scale) {
        Vec3 o(ox + U(rng), U(rng), U(rng));
        while (true) {
            Vec3 a = o + scale * Vec3(U(rng), U(rng), U(rng));
            Vec3 b = o + scale * Vec3(U(rng), U(rng), U(rng));
            Vec3 cr = (a - o).cross(b - o);
            if (cr.norm() > 0.2 * scale * scale) return make_triangle(o, a, b);
        }
    };
    QuadratureRule rule;  // reference accuracy, with extra outer refinement for
    rule.separation_factor = 0.1;  // well-separated pairs (the outer integrand
    rule.subdivision_depth = 5;    // has annulus-boundary kinks even far away)
    double worst_rel = 0.0, worst_part = 0.0;
    const long n_samples = 10'000'000;
    for (int trial = 0; trial < 20; ++trial) {
        TriangleGeom Ta = rand_tri(0.0, 0.8);
        TriangleGeom Tb = rand_tri(trial % 2 ? 0.0 : 1.5, 0.8);
        double dmin = triangle_pair_min_distance(Ta, Tb);
        double dmax = triangle_pair_max_distance(Ta, Tb);
        ShellSpec shell{dmin + 0.15 * (dmax - dmin), dmin + 0.75 * (dmax - dmin)};
        BasisSpec p0;
        double quad = shell_pair_integral(Ta, Tb, shell, KernelId::InvDistance, p0, p0, rule);
        McResult mc = mc_shell_pair(Ta, Tb, shell, KernelId::InvDistance, p0, p0, n_samples,
                                    1000 + trial);
        double rel = std::abs(quad - mc.value) / std::max(std::abs(mc.value), 1e-14);
        worst_rel = std::max(worst_rel, rel);

        // partition of unity over dt-shells covering the full distance range
        double dt = (dmax + 0.1) / 7.0;
        std::vector<ShellSpec> shells;
        for (int j = 0; j < 8; ++j) shells.push_back({j * dt, (j + 1) * dt});
        double full =
            shell_pair_integral(Ta, Tb, ShellSpec{}, KernelId::InvDistance, p0, p0, rule);
        double part = shell_partition_check(Ta, Tb, shells, rule) / std::abs(full);
        worst_part = std::max(worst_part, part);
    }
    record(2, "quadrature vs 1e7-sample Monte-Carlo (20 pairs)",
           worst_rel <= 0.01 && worst_part <= 1e-6,
           "worst rel " + fmt(worst_rel) + ", worst partition " + fmt(worst_part));
}

// --- criterion 3: dense space-time reconstruction ----------------------------

void criterion_3() {
    Mesh mesh = fan_mesh();
    TimeGrid grid(0.35, 8);
    double worst = 0.0;

    {  // single layer
        auto seq = assemble_single_layer(mesh, grid);
        auto rhs = assemble_rhs(mesh, grid, OperatorId::SingleLayer, PlaneWavePacket{});
        auto psi = march(seq, rhs);
        auto oracle = dense_single_layer_system(mesh, grid.dt, seq.n_lags() + 1, {});
        worst = std::max(worst,
                         dense_residual(oracle, rhs.vectors, rhs.difference_form, psi.steps));
    }
    {  // hypersingular
        auto seq = assemble_hypersingular(mesh, grid);
        std::vector<int> dof(mesh.n_nodes(), -1);
        for (std::size_t d = 0; d < seq.dof_nodes.size(); ++d) dof[seq.dof_nodes[d]] = d;
        auto rhs = assemble_rhs(mesh, grid, OperatorId::Hypersingular, RingdownG{});
        auto phi = march(seq, rhs);
        auto oracle =
            dense_hypersingular(mesh, grid.dt, seq.n_lags(), dof, seq.n_space, {});
        worst = std::max(worst,
                         dense_residual(oracle, rhs.vectors, rhs.difference_form, phi.steps));
    }
    {  // DtN
        auto seq = assemble_dtn_blocks(mesh, grid);
        auto rhs = assemble_rhs(mesh, grid, OperatorId::DtN, RingdownG{});
        auto sol = march_dtn(seq, rhs);
        auto oracle = dense_dtn(mesh, grid.dt, seq.n_lags(), {});
        worst = std::max(worst,
                         dense_residual(oracle, rhs.vectors, rhs.difference_form, sol.steps));
    }
    record(3, "dense space-time reconstruction residual (V, W, DtN)", worst <= 1e-8,
           "worst relative residual " + fmt(worst));
}

// --- criterion 4: flat-screen nullity of K' ----------------------------------

void criterion_4() {
    double worst = 0.0;
    auto check_mesh = [&](const Mesh& mesh) {
        TimeGrid grid(0.4, 4);
        auto seq = assemble_adjoint_double_layer_halfspace(mesh, grid);
        for (int l = 0; l < seq.n_lags(); ++l) {
            Eigen::SparseMatrix<double> K = seq.mats[l];
            if (l == 0)  // remove the -dt*diag(area) identity part
                for (int t = 0; t < mesh.n_triangles(); ++t)
                    K.coeffRef(t, t) += grid.dt * mesh.tri[t].area;
            for (int k = 0; k < K.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
                    worst = std::max(worst, std::abs(it.value()));
        }
    };
    check_mesh(graded_square_mesh(3, 2.0));
    check_mesh(graded_disc_mesh(2, 2.0, 6));
    record(4, "flat-screen adjoint double layer nullity", worst <= 1e-12,
           "max |K'| entry " + fmt(worst));
}

// --- criterion 5: causality and lag cutoff -----------------------------------

void criterion_5() {
    Mesh mesh = graded_square_mesh(2, 2.0);
    TimeGrid grid(0.3, 12);
    auto seq = assemble_single_layer(mesh, grid);

    bool cutoff_ok = true;
    int cutoff = lag_cutoff(grid, mesh);
    for (int l = cutoff + 1; l < seq.n_lags(); ++l)
        cutoff_ok = cutoff_ok && seq.mats[l].norm() == 0.0;
    // shells beyond the mesh diameter must not even be stored as nonzeros
    double diam = mesh_diameter(mesh);
    cutoff_ok = cutoff_ok && seq.lag_cutoff == static_cast<int>(std::ceil(diam / grid.dt));

    RhsTimeSeries zero;
    zero.difference_form = true;
    for (int n = 0; n <= grid.n_steps; ++n)
        zero.vectors.push_back(Eigen::VectorXd::Zero(mesh.n_triangles()));
    auto psi0 = march(seq, zero);
    bool zero_ok = true;
    for (const auto& s : psi0.steps) zero_ok = zero_ok && s.norm() == 0.0;

    // perturbing the load at step n0 must not change earlier steps
    auto rhs = assemble_rhs(mesh, grid, OperatorId::SingleLayer, PlaneWavePacket{});
    auto base = march(seq, rhs);
    const int n0 = 7;
    RhsTimeSeries bumped = rhs;
    bumped.vectors[n0] += Eigen::VectorXd::Constant(mesh.n_triangles(), 0.37);
    auto pert = march(seq, bumped);
    bool causal_ok = true;
    for (int n = 0; n < n0 - 1; ++n)
        causal_ok = causal_ok && (base.steps[n] - pert.steps[n]).norm() == 0.0;
    causal_ok = causal_ok && (base.steps[n0] - pert.steps[n0]).norm() > 0.0;

    record(5, "causality, zero-rhs nullity, lag cutoff", cutoff_ok && zero_ok && causal_ok,
           std::string("cutoff ") + (cutoff_ok ? "ok" : "bad") + ", zero-rhs " +
               (zero_ok ? "ok" : "bad") + ", perturbation " + (causal_ok ? "ok" : "bad"));
}

// --- criteria 6 and 7: convergence rates and singular exponents --------------

struct RatePair {
    double graded = 0.0, uniform = 0.0;
    bool ok = false;
};

void criteria_6_7() {
    SolveSettings solve;
    solve.rule = study_quadrature_rule();

    std::string detail6;
    bool pass6 = true;
    auto check_rate = [&](const std::string& tag, double rate, double target, double tol) {
        bool ok = std::isfinite(rate) && std::abs(rate - target) <= tol;
        pass6 = pass6 && ok;
        detail6 += tag + " " + fmt(rate) + " (target " + fmt(target) + ") ";
    };

    // V square: shared graded benchmark, graded and uniform reduced ladders
    ConvergenceConfig v;
    v.op = OperatorId::SingleLayer;
    v.screen = ScreenKind::Square;
    v.levels = {2, 3, 4, 6};
    v.benchmark_level = 9;
    v.dt = 0.02;
    v.T = 1.0;
    v.solve = solve;
    Mesh vbench_mesh = make_screen_mesh(v.screen, v.benchmark_level, v.benchmark_beta);
    LevelSolution vbench =
        solve_level(vbench_mesh, v.op, v.dt, v.T, default_rhs(v.op), solve);
    v.beta = 2.0;
    auto v_g = convergence_ladder(v, vbench);
    v.beta = 1.0;
    auto v_u = convergence_ladder(v, vbench);
    check_rate("V-sq graded", v_g.energy_rate, -0.54, 0.2);
    check_rate("V-sq uniform", v_u.energy_rate, -0.27, 0.2);

    // W square
    ConvergenceConfig w = v;
    w.op = OperatorId::Hypersingular;
    w.levels = {3, 4, 6};
    w.dt = 0.05;
    w.T = 2.0;
    Mesh wbench_mesh = make_screen_mesh(w.screen, w.benchmark_level, w.benchmark_beta);
    LevelSolution wbench =
        solve_level(wbench_mesh, w.op, w.dt, w.T, default_rhs(w.op), solve);
    w.beta = 2.0;
    auto w_g = convergence_ladder(w, wbench);
    w.beta = 1.0;
    auto w_u = convergence_ladder(w, wbench);
    check_rate("W-sq graded energy", w_g.energy_rate, -0.51, 0.2);
    check_rate("W-sq graded L2", w_g.l2_rate, -1.05, 0.2);
    check_rate("W-sq uniform energy", w_u.energy_rate, -0.26, 0.2);
    check_rate("W-sq uniform L2", w_u.l2_rate, -0.50, 0.2);

    // W disc (graded rates only, as in the full-scale list)
    ConvergenceConfig wd = w;
    wd.screen = ScreenKind::Disc;
    wd.levels = {2, 3, 4};
    wd.benchmark_level = 6;
    Mesh wdbench_mesh = make_screen_mesh(wd.screen, wd.benchmark_level, wd.benchmark_beta);
    LevelSolution wdbench =
        solve_level(wdbench_mesh, wd.op, wd.dt, wd.T, default_rhs(wd.op), solve);
    wd.beta = 2.0;
    auto wd_g = convergence_ladder(wd, wdbench);
    check_rate("W-disc graded energy", wd_g.energy_rate, -0.47, 0.2);
    check_rate("W-disc graded L2", wd_g.l2_rate, -0.93, 0.2);

    // V disc
    ConvergenceConfig d = v;
    d.screen = ScreenKind::Disc;
    d.levels = {2, 3, 4};
    d.benchmark_level = 6;
    Mesh dbench_mesh = make_screen_mesh(d.screen, d.benchmark_level, d.benchmark_beta);
    LevelSolution dbench =
        solve_level(dbench_mesh, d.op, d.dt, d.T, default_rhs(d.op), solve);
    d.beta = 2.0;
    auto d_g = convergence_ladder(d, dbench);
    d.beta = 1.0;
    auto d_u = convergence_ladder(d, dbench);
    check_rate("V-disc graded", d_g.energy_rate, -0.52, 0.2);
    check_rate("V-disc uniform", d_u.energy_rate, -0.26, 0.2);

    // DtN: phi-block L2 rates
    ConvergenceConfig s = v;
    s.op = OperatorId::DtN;
    s.dt = 0.025;
    s.T = 0.65;
    s.benchmark_level = 9;
    Mesh sbench_mesh = make_screen_mesh(s.screen, s.benchmark_level, s.benchmark_beta);
    LevelSolution sbench =
        solve_level(sbench_mesh, s.op, s.dt, s.T, default_rhs(s.op), solve);
    s.beta = 2.0;
    auto s_g = convergence_ladder(s, sbench);
    s.beta = 1.0;
    auto s_u = convergence_ladder(s, sbench);
    check_rate("DtN graded L2", s_g.l2_rate, -1.0, 0.2);
    check_rate("DtN uniform L2", s_u.l2_rate, -0.5, 0.2);

    record(6, "convergence-rate reproduction (reduced ladders)", pass6, detail6);

    // criterion 7: exponents from the shared benchmark solves
    bool pass7 = true;
    std::string detail7;
    for (double t : {0.5, 0.75, 1.0}) {
        auto edge = fit_singular_exponent(vbench.mesh, vbench.density,
                                          SectionKind::EdgeMidline, t);
        bool ok = std::abs(edge.exponent - (-0.5)) <= 0.05 * 0.5;
        pass7 = pass7 && ok;
        detail7 += "V edge@" + fmt(t) + " " + fmt(edge.exponent) + " ";
    }
    auto corner = fit_singular_exponent(vbench.mesh, vbench.density,
                                        SectionKind::CornerDiagonal, 0.5);
    bool corner_ok = corner.exponent >= -0.9 && corner.exponent <= -0.65;
    pass7 = pass7 && corner_ok;
    detail7 += "V corner " + fmt(corner.exponent) + " ";

    for (double t : {1.5, 2.0}) {
        auto wedge = fit_singular_exponent(wbench.mesh, wbench.density,
                                           SectionKind::EdgeMidline, t);
        bool ok = std::abs(wedge.exponent - 0.5) <= 0.10 * 0.5;
        pass7 = pass7 && ok;
        detail7 += "W edge@" + fmt(t) + " " + fmt(wedge.exponent) + " ";
    }
    record(7, "singular exponents (V edge/corner, W edge)", pass7, detail7);
}

// --- criterion 8: interpolation lemma ----------------------------------------

void criterion_8() {
    bool pass = true;
    std::string detail;
    for (double beta : {1.0, 2.0}) {
        auto st = interpolation_lemma_study(0.5, beta, 4);
        double target = std::min(beta, 2.0);
        pass = pass && std::abs(st.rate - target) <= 0.15;
        detail += "beta=" + fmt(beta) + " rate " + fmt(st.rate) + " ";
    }
    record(8, "interpolation lemma rates min{beta,2}", pass, detail);
}

// --- criterion 9: horn pipeline property checks ------------------------------

void criterion_9() {
    // zero scattered field -> identically 0 dB
    TimeGrid grid(0.01, 200);
    auto sp0 = amplification_spectrum(std::vector<double>(201, 0.0), grid,
                                      Vec3(0.08, 0, 0), Vec3(1, 0, 0));
    double worst0 = 0.0;
    for (double v : sp0.db) worst0 = std::max(worst0, std::abs(v));
    bool zero_ok = !sp0.db.empty() && worst0 <= 1e-12;

    // image symmetry of the half-space evaluation on the horn geometry
    Mesh horn = horn_surface_mesh(0.5, 0.02, 8);
    DensityHistory dens;
    dens.op = OperatorId::AdjointDLHalfSpace;
    dens.dt = 0.25;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N01;
    for (int n = 0; n < 10; ++n) {
        Eigen::VectorXd v(horn.n_triangles());
        for (int i = 0; i < v.size(); ++i) v[i] = N01(rng);
        dens.steps.push_back(v);
    }
    Mesh reflected = reflect_z(horn);
    std::vector<double> times = {1.0, 1.8, 2.5};
    auto above = evaluate_halfspace_pressure(dens, horn, {Vec3(0.9, 0.2, 0.6)}, times);
    auto below = evaluate_halfspace_pressure(dens, reflected, {Vec3(0.9, 0.2, -0.6)}, times);
    double sym = (above.values - below.values).cwiseAbs().maxCoeff();
    bool sym_ok = sym <= 1e-12 * std::max(1.0, above.values.cwiseAbs().maxCoeff());

    // dt-refinement differences concentrate near spectral peaks
    HornConfig hc;
    hc.resolution = 12;
    hc.clearance = 0.01;  // tight cusp: sharp resonances dominate the dt differences
    hc.T = 12.0;
    hc.dts = {0.04, 0.01, 0.005};
    hc.solve.rule = study_quadrature_rule();
    auto rep = horn_study(hc);
    bool ratio_ok = !rep.diffs.empty();
    std::string rdetail;
    for (const auto& d : rep.diffs) {
        double ratio = d.peak_rms / std::max(d.offpeak_rms, 1e-30);
        ratio_ok = ratio_ok && ratio >= 3.0;
        rdetail += "dt=" + fmt(d.dt) + " ratio " + fmt(ratio) + " ";
    }

    record(9, "horn pipeline properties", zero_ok && sym_ok && ratio_ok,
           "zero-field " + fmt(worst0) + ", image sym " + fmt(sym) + ", " + rdetail);
}

// --- criterion 10: PDE residual probe ----------------------------------------

void criterion_10() {
    bool pass = true;
    std::string detail;
    auto probe = [&](const Mesh& mesh, const std::vector<Vec3>& points) {
        TimeGrid grid(0.02, 110);
        AssemblyOptions opts;
        opts.rule = study_quadrature_rule();
        auto seq = assemble_single_layer(mesh, grid, opts);
        auto rhs = assemble_rhs(mesh, grid, OperatorId::SingleLayer, PlaneWavePacket{});
        auto psi = march(seq, rhs);
        for (const Vec3& x : points) {
            double res = wave_equation_residual(psi, mesh, x, 1.8, 1e-2);
            pass = pass && res < 0.05;
            detail += fmt(res) + " ";
        }
    };
    probe(fan_mesh(), {Vec3(0.2, 0.1, 0.5), Vec3(-0.4, 0.3, 0.35), Vec3(0.1, -0.2, 0.8)});
    probe(graded_square_mesh(6, 1.0),
          {Vec3(0.2, 0.1, 0.5), Vec3(-0.3, 0.4, 0.6), Vec3(0.1, -0.2, 0.8)});
    record(10, "finite-difference wave equation residual < 5%", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    g_t0 = std::chrono::steady_clock::now();
    std::set<int> which;
    for (int i = 1; i < argc; ++i) which.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return which.empty() || which.count(id); };

    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6) || want(7)) criteria_6_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
    if (want(10)) criterion_10();

    if (g_failures) {
        std::printf("ACCEPTANCE: %d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
