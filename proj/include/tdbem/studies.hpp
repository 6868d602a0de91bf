#pragma once

#include "tdbem/analysis.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tdbem {

// --- shared settings --------------------------------------------------------

struct SolveSettings {
    QuadratureRule rule;
    int n_threads = 0;
    double memory_budget_gb = 8.0;
    StepSolverConfig solver;
};

/// Canonical right-hand side of each integral equation's reproduction study.
RhsSpec default_rhs(OperatorId op);

Mesh make_screen_mesh(ScreenKind screen, int level, double beta, int disc_multiplier = 22);

/// One assembled and marched refinement level, reusable across studies.
struct LevelSolution {
    Mesh mesh;
    LagMatrixSequence system;
    RhsTimeSeries rhs;
    DensityHistory density;
};

LevelSolution solve_level(const Mesh& mesh, OperatorId op, double dt, double T,
                          const RhsSpec& rhs, const SolveSettings& settings);

/// DtN helper: the leading phi sub-history with its P1 dof map.
DensityHistory dtn_phi_history(const DensityHistory& full);

// --- convergence study ------------------------------------------------------

struct ConvergenceConfig {
    std::string study_id = "convergence";
    OperatorId op = OperatorId::SingleLayer;
    ScreenKind screen = ScreenKind::Square;
    double beta = 2.0;                  // grading of the ladder meshes
    std::vector<int> levels = {2, 3, 4, 6};
    double benchmark_beta = 2.0;        // reference solution mesh (finest graded)
    int benchmark_level = 9;
    int disc_multiplier = 22;
    double dt = 0.005;
    double T = 1.0;
    SolveSettings solve;
};

struct ConvergenceRow {
    int level = 0;
    double dof = 0.0;
    double h_max = 0.0;
    double energy_error = 0.0;  // NaN when the operator has no energy form
    double l2_error = 0.0;
};

struct ConvergenceReport {
    std::string study_id;
    OperatorId op = OperatorId::SingleLayer;
    ScreenKind screen = ScreenKind::Square;
    double beta = 2.0, dt = 0.0, T = 0.0;
    int benchmark_level = 0;
    double benchmark_beta = 2.0;
    double benchmark_dof = 0.0;
    std::vector<ConvergenceRow> rows;
    double energy_rate = 0.0;  // NaN when unavailable
    double l2_rate = 0.0;
    std::string config_json;
    std::uint64_t config_hash = 0;
};

/// Ladder against a pre-solved benchmark (shared between graded/uniform runs).
ConvergenceReport convergence_ladder(const ConvergenceConfig& cfg,
                                     const LevelSolution& benchmark);
/// Solves the benchmark itself, then runs the ladder.
ConvergenceReport convergence_study(const ConvergenceConfig& cfg);

// --- singular exponent study ------------------------------------------------

struct ExponentConfig {
    std::string study_id = "exponent";
    OperatorId op = OperatorId::SingleLayer;
    ScreenKind screen = ScreenKind::Square;
    double beta = 2.0;
    int level = 9;
    int disc_multiplier = 22;
    double dt = 0.01;
    double T = 1.0;
    std::vector<double> times = {0.5, 0.75, 1.0};
    std::vector<SectionKind> sections = {SectionKind::EdgeMidline,
                                         SectionKind::CornerDiagonal};
    SolveSettings solve;
};

struct ExponentReport {
    std::string study_id;
    OperatorId op = OperatorId::SingleLayer;
    ScreenKind screen = ScreenKind::Square;
    double beta = 2.0, dt = 0.0, T = 0.0;
    int level = 0;
    double dof = 0.0;
    std::vector<ExponentFit> fits;  // times x sections, section-major per time
    std::string config_json;
    std::uint64_t config_hash = 0;
};

ExponentReport exponent_study(const ExponentConfig& cfg);
/// Exponent fits on an already solved level (shared with other studies).
ExponentReport exponent_fits(const ExponentConfig& cfg, const LevelSolution& sol);

// --- interpolation lemma study ----------------------------------------------

struct InterpConfig {
    std::string study_id = "interp";
    double a = 0.5;
    std::vector<double> betas = {1.0, 2.0};
    int levels = 4;
    int n0 = 8;
};

struct InterpReport {
    std::string study_id;
    double a = 0.5;
    std::vector<InterpStudy> cases;
    std::string config_json;
    std::uint64_t config_hash = 0;
};

InterpReport interp_study(const InterpConfig& cfg);

// --- horn amplification study -----------------------------------------------

struct HornConfig {
    std::string study_id = "horn";
    double radius = 0.5;
    double clearance = 0.02;
    int resolution = 24;
    double half_length = -1.0;  // default: radius
    std::vector<double> dts = {0.04, 0.01, 0.005};
    double T = 12.0;
    Vec3 y_src = Vec3(0.08, 0.0, 0.0);
    Vec3 x_fp = Vec3(1.0, 0.0, 0.0);
    SpectrumOptions spectrum;
    int eval_tensor_order = 12;
    int n_omega = 200;          // common comparison grid over the band
    SolveSettings solve;
};

struct HornCase {
    double dt = 0.0;
    std::vector<double> pressure;     // scattered p(t_n) at x_fp, n = 0..N
    Spectrum spectrum;                // on this dt's own FFT bins
    std::vector<double> db_resampled; // on the shared omega grid
};

/// Difference statistics of one case against the reference (smallest dt),
/// split into the peak band (|dB_ref| >= half the spectrum maximum) and the
/// off-peak remainder of the shared grid.
struct HornDiffRow {
    double dt = 0.0;
    double peak_rms = 0.0, offpeak_rms = 0.0;
    double peak_max = 0.0, offpeak_max = 0.0;
};

struct HornReport {
    std::string study_id;
    double radius = 0.0, clearance = 0.0, T = 0.0;
    int resolution = 0;
    double mesh_dof = 0.0;
    std::vector<double> omega_grid;
    std::vector<HornCase> cases;      // sorted by decreasing dt
    std::vector<HornDiffRow> diffs;   // one per non-reference case
    std::string config_json;
    std::uint64_t config_hash = 0;
};

HornReport horn_study(const HornConfig& cfg);

// --- serialization ----------------------------------------------------------

std::uint64_t fnv1a_hash(const std::string& text);

std::string config_to_json(const ConvergenceConfig& cfg);
std::string config_to_json(const ExponentConfig& cfg);
std::string config_to_json(const InterpConfig& cfg);
std::string config_to_json(const HornConfig& cfg);

std::string report_to_json(const ConvergenceReport& r);
std::string report_to_json(const ExponentReport& r);
std::string report_to_json(const InterpReport& r);
std::string report_to_json(const HornReport& r);

/// One CSV table per report: refinement rows / fit rows / frequency bins.
std::string report_to_csv(const ConvergenceReport& r);
std::string report_to_csv(const ExponentReport& r);
std::string report_to_csv(const InterpReport& r);
std::string report_to_csv(const HornReport& r);

std::string operator_name(OperatorId op);
std::string screen_name(ScreenKind screen);
std::string section_name(SectionKind section);

}  // namespace tdbem
