#pragma once

#include "tdbem/assembly.hpp"
#include "tdbem/mot.hpp"

#include <complex>
#include <string>
#include <vector>

namespace tdbem {

/// Off-surface pressure samples; values(p, t) for point p and time index t.
struct FieldProbe {
    std::vector<Vec3> points;
    std::vector<double> times;
    Eigen::MatrixXd values;
};

struct EvaluationOptions {
    int tensor_order = 20;  // 400-node tensor Gauss per triangle
    int n_threads = 0;
    double surface_tolerance = 1e-9;  // reject points this close to the screen
};

/// u(t,x) = (1/4pi) int psi(t - |x-y|, y)/|x-y| ds_y for a P0-in-space,
/// p.c.-in-time density. Zero before the first arrival.
FieldProbe evaluate_single_layer(const DensityHistory& psi, const Mesh& mesh,
                                 const std::vector<Vec3>& points,
                                 const std::vector<double>& times,
                                 const EvaluationOptions& opts = {});

/// Half-space pressure: direct term plus the image across z=0.
FieldProbe evaluate_halfspace_pressure(const DensityHistory& phi, const Mesh& mesh,
                                       const std::vector<Vec3>& points,
                                       const std::vector<double>& times,
                                       const EvaluationOptions& opts = {});

/// Analytic spectrum of the half-space Dirac point source at x:
/// p^I(omega) = e^{-i omega r}/(4 pi r) + e^{-i omega r'}/(4 pi r')
/// (forward transform convention e^{-i omega t}).
std::vector<std::complex<double>> incident_point_source_spectrum(
    const Vec3& y_src, const Vec3& x, const std::vector<double>& omegas);

/// Second-order finite-difference residual |d^2_t u - Laplace u| / |d^2_t u|
/// of the single layer potential at (t, x), stencil size h.
double wave_equation_residual(const DensityHistory& psi, const Mesh& mesh, const Vec3& x,
                              double t, double h, const EvaluationOptions& opts = {});

/// CSV rows: point_id,t,value
std::string field_probe_csv(const FieldProbe& probe);

}  // namespace tdbem
