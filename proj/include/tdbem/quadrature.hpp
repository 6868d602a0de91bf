#pragma once

#include "tdbem/geometry.hpp"

#include <array>
#include <limits>
#include <vector>

namespace tdbem {

/// Radial restriction r_lo <= |x-y| <= r_hi of a double surface integral.
struct ShellSpec {
    double r_lo = 0.0;
    double r_hi = std::numeric_limits<double>::infinity();
};

enum class KernelId {
    InvDistance,          // 1/|x-y|
    NormalDotInvDistance, // (n_x . n_y)/|x-y|
    GradGradInvDistance,  // (grad xi_i . grad xi_j)/|x-y|
    HalfSpaceAdjointDL,   // n_x.(y-x)/|x-y|^3 plus the image term in y'
};

struct BasisSpec {
    bool p1 = false;  // false: constant 1 on the triangle
    int vertex = 0;   // hat index when p1
};

struct QuadratureRule {
    int outer_order = 7;             // base rule on outer leaves (1, 3 or 7)
    int subdivision_depth = 3;       // outer refinement cap, separated pairs
    int singular_depth = 5;          // outer refinement cap, touching pairs
    double separation_factor = 1.0;  // refine while leaf diam > factor * distance
    int radial_order = 5;            // Gauss points per radial sub-segment
    int radial_min_segments = 8;     // cap radial segment length at span/this
    int radial_grade_levels = 10;    // geometric refinement depth at sqrt cusps
};

/// Cheaper settings for refinement studies, where the discretization error
/// dominates the quadrature error by orders of magnitude.
QuadratureRule study_quadrature_rule();

/// Double integral of kernel * basis_a(x) * basis_b(y) over
/// {(x,y) in Ta x Tb : r_lo <= |x-y| <= r_hi}. The y-integral is evaluated
/// exactly in the radial variable (annulus arcs), the x-integral by an
/// adaptively subdivided triangle rule.
double shell_pair_integral(const TriangleGeom& Ta, const TriangleGeom& Tb,
                           const ShellSpec& shell, KernelId kernel,
                           const BasisSpec& basis_a, const BasisSpec& basis_b,
                           const QuadratureRule& rule);

/// | sum over shells - unrestricted integral | for the 1/|x-y| kernel.
double shell_partition_check(const TriangleGeom& Ta, const TriangleGeom& Tb,
                             const std::vector<ShellSpec>& shells,
                             const QuadratureRule& rule);

/// Length of {|x-center| = radius} clipped to the (planar) triangle.
double arc_length_in_triangle(const TriangleGeom& T, const Vec3& center, double radius);

/// Angle subtended by {|x-center| = radius} inside the triangle (arc length
/// divided by the in-plane radius; 2*pi when the full circle lies inside).
double arc_angle_in_triangle(const TriangleGeom& T, const Vec3& center, double radius);

/// Radial integral of the point-to-triangle kernel 1/|x-center|^p over the
/// annulus r0 <= |x-center| <= r1 clipped to T, i.e.
/// int A0(r) r^{1-p} dr with A0 the clipped angle.
double point_annulus_integral(const TriangleGeom& T, const Vec3& center, double r0,
                              double r1, int p, const QuadratureRule& rule);

/// Exact min/max of |x-y| over a triangle pair (used for fast rejection).
double triangle_pair_min_distance(const TriangleGeom& Ta, const TriangleGeom& Tb);
double triangle_pair_max_distance(const TriangleGeom& Ta, const TriangleGeom& Tb);

// --- shell-binned moments for dt-aligned light cones ------------------------
//
// Shell E_j = { t_j <= |x-y| <= t_{j+1} }, rho = (r - t_j)/dt in [0,1].
// Moments carry rho^k factors (k = 0..2) so that any per-shell polynomial
// time weight can be applied after assembly.

struct ShellMomentsP0 {
    int j0 = 0;  // index of the first stored shell
    std::vector<std::array<double, 3>> invr;  // [shell][k]: rho^k / r
    int n_shells() const { return static_cast<int>(invr.size()); }
};

struct ShellMomentsP1 {
    int j0 = 0;
    std::vector<std::array<double, 3>> scalar;             // rho^k / r
    std::vector<std::array<std::array<double, 9>, 3>> bb;  // [shell][k][a*3+b]: xi_a(x) xi_b(y) rho^k / r
    int n_shells() const { return static_cast<int>(scalar.size()); }
};

struct ShellMomentsAdjDL {
    int j0 = 0;
    std::vector<std::array<double, 2>> k3;  // [shell][k<=1]: n_x.(y-x) rho^k / r^3
    std::vector<double> k2;                 // [shell]:       n_x.(y-x) / r^2
    int n_shells() const { return static_cast<int>(k2.size()); }
};

ShellMomentsP0 shell_moments_p0(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                double dt, const QuadratureRule& rule);
ShellMomentsP1 shell_moments_p1(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                double dt, const QuadratureRule& rule);
ShellMomentsAdjDL shell_moments_adjdl(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                      double dt, const QuadratureRule& rule);

// --- plain surface rules ----------------------------------------------------

struct SurfacePoint {
    Vec3 x;
    double w;
    std::array<double, 3> bary;
};

/// Symmetric 7-point (degree 5) rule, weights summing to the area.
std::vector<SurfacePoint> triangle_rule_points(const TriangleGeom& T);

/// Collapsed n x n tensor Gauss rule (400 nodes for n = 20).
std::vector<SurfacePoint> tensor_gauss_points(const TriangleGeom& T, int n);

/// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace tdbem
