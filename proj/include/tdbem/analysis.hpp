#pragma once

#include "tdbem/mot.hpp"
#include "tdbem/potentials.hpp"

#include <string>
#include <vector>

namespace tdbem {

// --- density evaluation on a (flat) screen ----------------------------------

/// Point evaluator for a solved density: P0-in-space/p.c.-in-time for the
/// single layer and horn densities, P1-in-space/hat-in-time otherwise
/// (DtN callers pass the extracted phi block).
class ScreenDensity {
  public:
    ScreenDensity(const Mesh& mesh, const DensityHistory& hist);

    /// density value at an on-screen point x (projected to the screen plane)
    double value(const Vec3& x, double t) const;
    bool p1() const { return p1_; }

    /// Located host triangle + barycentric coordinates, reusable across times.
    struct Sample {
        int tri = -1;
        std::array<double, 3> bary{};
    };
    Sample sample(const Vec3& x) const;
    double value(const Sample& s, double t) const;

  private:
    const Mesh& mesh_;
    const DensityHistory& hist_;
    bool p1_ = false;
    Eigen::MatrixXd nodal_;  // P1 only: [node][step], zeros on boundary nodes
    int locate(const Vec3& x, std::array<double, 3>& bary) const;
};

// --- error norms ------------------------------------------------------------

/// L2([0,T] x Gamma) norm of the difference, quadrature on the finer mesh and
/// midpoint rule in time.
double l2_spacetime_error(const Mesh& mesh_a, const DensityHistory& a, const Mesh& mesh_b,
                          const DensityHistory& b, double T);

/// Lift a density to a finer mesh by pointwise evaluation at the fine dof
/// locations (triangle centroids for P0, nodes for P1).
DensityHistory lift_density(const Mesh& coarse_mesh, const DensityHistory& coarse,
                            const Mesh& fine_mesh, const LagMatrixSequence& fine_system);

/// sqrt|E(lifted coarse) - E(fine)| in the benchmark system's energy.
double energy_error(const LagMatrixSequence& fine_system, const Mesh& coarse_mesh,
                    const DensityHistory& coarse, const Mesh& fine_mesh,
                    const DensityHistory& fine, const RhsTimeSeries& fine_rhs);

// --- convergence rates ------------------------------------------------------

struct RateRow {
    double dof = 0.0;
    double h_max = 0.0;
    double error = 0.0;
};

/// least-squares slope of log(error) vs log(DOF); needs >= 3 positive rows
double fit_convergence_rate(const std::vector<RateRow>& rows);

// --- singular exponents -----------------------------------------------------

enum class SectionKind { EdgeMidline, CornerDiagonal, DiscRadial };

struct ExponentFit {
    double time = 0.0;
    SectionKind section = SectionKind::EdgeMidline;
    double exponent = 0.0;
    double r2 = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.15;
    int n_points = 0;
};

/// Slope of log|density| vs log(distance to the singular set) along the
/// section, window [just past the first graded element, 0.15].
ExponentFit fit_singular_exponent(const Mesh& mesh, const DensityHistory& hist,
                                  SectionKind section, double time);

// --- interpolation lemma ----------------------------------------------------

struct InterpRow {
    int n = 0;
    double h = 0.0;
    double error = 0.0;
};

struct InterpStudy {
    double a = 0.0;
    double beta = 1.0;
    double rate = 0.0;       // fitted positive rate in h
    double predicted = 0.0;  // min(beta*(a+1/2), 2)
    std::vector<InterpRow> rows;
};

/// L2(0,1) error of the linear interpolant of y^a on beta-graded 1D meshes.
InterpStudy interpolation_lemma_study(double a, double beta, int levels, int n0 = 8);

// --- horn amplification spectrum --------------------------------------------

struct SpectrumOptions {
    double f_lo_hz = 200.0;
    double f_hi_hz = 2000.0;
    double speed_of_sound = 343.0;  // m/s
    double length_unit = 1.0;       // meters per dimensionless length unit
    int pad_factor = 8;             // zero padding multiple before the FFT
};

struct Spectrum {
    std::vector<double> omega;    // dimensionless angular frequency (c=1 units)
    std::vector<double> freq_hz;  // physical frequency
    std::vector<double> db;       // Delta L_H
};

/// Delta L_H(omega) = 20 log10(|p_hat + p_hat^I| / |p_hat^I|) from the
/// scattered pressure samples p(t_n), n = 0..n_steps, at x_fp.
Spectrum amplification_spectrum(const std::vector<double>& scattered, const TimeGrid& grid,
                                const Vec3& y_src, const Vec3& x_fp,
                                const SpectrumOptions& opts = {});

}  // namespace tdbem
