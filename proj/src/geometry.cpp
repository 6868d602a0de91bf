#include "tdbem/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tdbem {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grading_args(int N_l, double beta) {
    if (N_l < 1) throw std::invalid_argument("N_l must be >= 1");
    if (beta < 1.0) throw std::invalid_argument("grading exponent beta must be >= 1");
}

// Solve the affine hat coefficients in the triangle plane.
std::array<Vec3, 3> hat_gradients(const std::array<Vec3, 3>& v, const Vec3& n) {
    Vec3 e1 = (v[1] - v[0]).normalized();
    Vec3 e2 = n.cross(e1);
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i) {
        Vec3 d = v[i] - v[0];
        A(i, 0) = 1.0;
        A(i, 1) = d.dot(e1);
        A(i, 2) = d.dot(e2);
    }
    Eigen::Matrix3d Ainv = A.inverse();
    std::array<Vec3, 3> g;
    for (int a = 0; a < 3; ++a) {
        // column a of Ainv gives coefficients (alpha, g.e1, g.e2) of hat a
        g[a] = Ainv(1, a) * e1 + Ainv(2, a) * e2;
    }
    return g;
}

}  // namespace

void Mesh::finalize() {
    tri.clear();
    tri.reserve(triangles.size());
    h_max = 0.0;
    h_min = std::numeric_limits<double>::max();
    for (const auto& t : triangles) {
        TriangleGeom g;
        g.v = {nodes[t[0]], nodes[t[1]], nodes[t[2]]};
        Vec3 cr = (g.v[1] - g.v[0]).cross(g.v[2] - g.v[0]);
        double twoA = cr.norm();
        if (twoA <= 0.0) throw std::runtime_error("degenerate triangle in mesh");
        g.area = 0.5 * twoA;
        g.normal = cr / twoA;
        g.centroid = (g.v[0] + g.v[1] + g.v[2]) / 3.0;
        g.diameter = std::max({(g.v[1] - g.v[0]).norm(), (g.v[2] - g.v[1]).norm(),
                               (g.v[0] - g.v[2]).norm()});
        g.hat_grad = hat_gradients(g.v, g.normal);
        h_max = std::max(h_max, g.diameter);
        h_min = std::min(h_min, g.diameter);
        tri.push_back(g);
    }
}

std::vector<int> Mesh::interior_nodes() const {
    std::vector<char> on_bdry(nodes.size(), 0);
    for (int b : boundary_nodes) on_bdry[b] = 1;
    std::vector<int> result;
    for (int i = 0; i < n_nodes(); ++i)
        if (!on_bdry[i]) result.push_back(i);
    return result;
}

bool Mesh::is_flat() const {
    for (const auto& p : nodes)
        if (std::abs(p.z()) > 1e-14) return false;
    return true;
}

Mesh graded_square_mesh(int N_l, double beta) {
    check_grading_args(N_l, beta);
    const int N = N_l;
    // 1D coordinates: -1 + (k/N)^beta on [-1,0], mirrored to [0,1]
    std::vector<double> c(2 * N + 1);
    for (int k = 0; k <= N; ++k) {
        double a = -1.0 + std::pow(double(k) / N, beta);
        c[k] = a;
        c[2 * N - k] = -a;
    }
    c[N] = 0.0;

    Mesh m;
    m.kind = ScreenKind::Square;
    m.beta = beta;
    m.levels = N_l;
    const int M = 2 * N + 1;
    auto nid = [M](int i, int j) { return j * M + i; };
    m.nodes.reserve(M * M);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) m.nodes.push_back(Vec3(c[i], c[j], 0.0));

    for (int j = 0; j < M - 1; ++j) {
        for (int i = 0; i < M - 1; ++i) {
            int a = nid(i, j), b = nid(i + 1, j), d = nid(i, j + 1), e = nid(i + 1, j + 1);
            double cx = 0.5 * (c[i] + c[i + 1]), cy = 0.5 * (c[j] + c[j + 1]);
            if (cx * cy > 0) {
                // diagonal a-e points at the nearest screen corner
                m.triangles.push_back({a, b, e});
                m.triangles.push_back({a, e, d});
            } else {
                m.triangles.push_back({a, b, d});
                m.triangles.push_back({b, e, d});
            }
        }
    }
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i)
            if (i == 0 || i == M - 1 || j == 0 || j == M - 1)
                m.boundary_nodes.push_back(nid(i, j));
    m.finalize();
    return m;
}

Mesh graded_disc_mesh(int N_l, double beta, int angular_multiplier) {
    check_grading_args(N_l, beta);
    if (angular_multiplier < 3) throw std::invalid_argument("angular_multiplier must be >= 3");
    const int N = N_l;
    Mesh m;
    m.kind = ScreenKind::Disc;
    m.beta = beta;
    m.levels = N_l;

    // ring k: radius 1-(k/N)^beta, angular_multiplier*(N-k) nodes, angle 0 included
    std::vector<std::vector<int>> ring(N);
    for (int k = 0; k < N; ++k) {
        double r = 1.0 - std::pow(double(k) / N, beta);
        int n = angular_multiplier * (N - k);
        ring[k].resize(n);
        for (int j = 0; j < n; ++j) {
            double th = 2.0 * kPi * j / n;
            ring[k][j] = m.n_nodes();
            m.nodes.push_back(Vec3(r * std::cos(th), r * std::sin(th), 0.0));
        }
    }
    int center = m.n_nodes();
    m.nodes.push_back(Vec3(0, 0, 0));

    // advancing-front triangulation of each annulus
    for (int k = 0; k + 1 < N; ++k) {
        const auto& outer = ring[k];
        const auto& inner = ring[k + 1];
        int no = static_cast<int>(outer.size()), ni = static_cast<int>(inner.size());
        int o = 0, i = 0;
        while (o < no || i < ni) {
            bool advance_outer;
            if (o == no) advance_outer = false;
            else if (i == ni) advance_outer = true;
            else advance_outer = double(o + 1) / no <= double(i + 1) / ni;
            if (advance_outer) {
                m.triangles.push_back({outer[o % no], outer[(o + 1) % no], inner[i % ni]});
                ++o;
            } else {
                m.triangles.push_back({outer[o % no], inner[(i + 1) % ni], inner[i % ni]});
                ++i;
            }
        }
    }
    // central fan
    const auto& last = ring[N - 1];
    int nl = static_cast<int>(last.size());
    for (int j = 0; j < nl; ++j)
        m.triangles.push_back({last[j], last[(j + 1) % nl], center});

    m.boundary_nodes = ring[0];
    m.finalize();
    return m;
}

Mesh horn_surface_mesh(double radius, double clearance, int resolution, double half_length) {
    if (radius <= 0) throw std::invalid_argument("radius must be positive");
    if (clearance < 0) throw std::invalid_argument("clearance must be >= 0");
    if (resolution < 3) throw std::invalid_argument("resolution must be >= 3");
    const double HL = half_length > 0 ? half_length : radius;
    const int nth = resolution;
    const int ny = std::max(2, int(std::lround(2.0 * HL / (2.0 * kPi * radius / nth))));

    Mesh m;
    m.kind = ScreenKind::Horn;
    m.levels = resolution;
    auto nid = [nth](int i, int j) { return j * nth + (i % nth); };
    for (int j = 0; j <= ny; ++j) {
        double y = -HL + 2.0 * HL * j / ny;
        for (int i = 0; i < nth; ++i) {
            double th = 2.0 * kPi * i / nth;
            // theta = 0 is the lowest point of the cylinder (contact cusp)
            m.nodes.push_back(Vec3(radius * std::sin(th), y,
                                   radius + clearance - radius * std::cos(th)));
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nth; ++i) {
            int a = nid(i, j), b = nid(i + 1, j), c = nid(i, j + 1), d = nid(i + 1, j + 1);
            // winding chosen so normals point away from the cylinder axis
            m.triangles.push_back({a, c, b});
            m.triangles.push_back({b, c, d});
        }
    }
    for (int i = 0; i < nth; ++i) {
        m.boundary_nodes.push_back(nid(i, 0));
        m.boundary_nodes.push_back(nid(i, ny));
    }
    m.finalize();
    return m;
}

double mesh_diameter(const Mesh& mesh) {
    if (mesh.nodes.empty()) throw std::invalid_argument("empty mesh");
    double d2 = 0.0;
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
        for (size_t j = i + 1; j < mesh.nodes.size(); ++j)
            d2 = std::max(d2, (mesh.nodes[i] - mesh.nodes[j]).squaredNorm());
    return std::sqrt(d2);
}

Mesh reflect_z(const Mesh& mesh) {
    Mesh r = mesh;
    for (auto& p : r.nodes) p.z() = -p.z();
    // swap winding so the normal flips with the geometry
    for (auto& t : r.triangles) std::swap(t[1], t[2]);
    r.finalize();
    return r;
}

std::string mesh_to_json(const Mesh& mesh) {
    nlohmann::json j;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& p : mesh.nodes) nodes.push_back({p.x(), p.y(), p.z()});
    auto& tris = j["triangles"] = nlohmann::json::array();
    for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
    j["boundary_nodes"] = mesh.boundary_nodes;
    j["beta"] = mesh.beta;
    j["N_l"] = mesh.levels;
    return j.dump(2);
}

Mesh mesh_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Mesh m;
    for (const auto& p : j.at("nodes")) m.nodes.push_back(Vec3(p[0], p[1], p[2]));
    for (const auto& t : j.at("triangles")) m.triangles.push_back({t[0], t[1], t[2]});
    m.boundary_nodes = j.at("boundary_nodes").get<std::vector<int>>();
    m.beta = j.value("beta", 1.0);
    m.levels = j.value("N_l", 0);
    m.finalize();
    return m;
}

std::uint64_t mesh_hash(const Mesh& mesh) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        h ^= x;
        h *= 1099511628211ull;
    };
    auto mixd = [&mix](double d) {
        std::uint64_t b;
        std::memcpy(&b, &d, sizeof(b));
        mix(b);
    };
    for (const auto& p : mesh.nodes) {
        mixd(p.x());
        mixd(p.y());
        mixd(p.z());
    }
    for (const auto& t : mesh.triangles) {
        mix(std::uint64_t(t[0]));
        mix(std::uint64_t(t[1]));
        mix(std::uint64_t(t[2]));
    }
    return h;
}

}  // namespace tdbem
