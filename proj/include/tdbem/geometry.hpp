#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tdbem {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

enum class ScreenKind { Square, Disc, Horn };

/// Per-triangle data precomputed once after mesh construction.
struct TriangleGeom {
    std::array<Vec3, 3> v;
    Vec3 normal;                      // unit normal, orientation of the element
    Vec3 centroid;
    double area = 0.0;
    double diameter = 0.0;            // longest edge
    std::array<Vec3, 3> hat_grad;     // surface gradient of the P1 hat at vertex a
};

/// Triangulated screen. Immutable after finalize(); safe to share across threads.
struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary_nodes;  // node indices on the screen boundary
    double beta = 1.0;                // grading exponent
    int levels = 0;                   // refinement parameter N_l
    ScreenKind kind = ScreenKind::Square;

    // filled by finalize()
    std::vector<TriangleGeom> tri;
    double h_max = 0.0;
    double h_min = 0.0;

    void finalize();

    int n_triangles() const { return static_cast<int>(triangles.size()); }
    int n_nodes() const { return static_cast<int>(nodes.size()); }

    /// Nodes not on the screen boundary (DOFs of the conforming P1 space).
    std::vector<int> interior_nodes() const;

    /// True when all nodes lie in the plane z=0.
    bool is_flat() const;
};

/// beta-graded mesh of the square screen [-1,1]^2 x {0}; 8*N_l^2 triangles.
Mesh graded_square_mesh(int N_l, double beta);

/// beta-graded mesh of the unit disc screen. Ring k carries
/// angular_multiplier*(N_l-k) nodes; triangle count angular_multiplier*N_l^2.
Mesh graded_disc_mesh(int N_l, double beta, int angular_multiplier = 6);

/// Cylinder-over-plane strip for the horn geometry. Axis along y at height
/// radius+clearance; strip length 2*radius in y unless half_length > 0.
Mesh horn_surface_mesh(double radius, double clearance, int resolution,
                       double half_length = -1.0);

/// Maximum pairwise node distance.
double mesh_diameter(const Mesh& mesh);

/// Mesh with all nodes reflected across z=0 (orientation preserved).
Mesh reflect_z(const Mesh& mesh);

std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const std::string& text);

/// Stable content hash over nodes/triangles (used for cache keys and reports).
std::uint64_t mesh_hash(const Mesh& mesh);

}  // namespace tdbem
