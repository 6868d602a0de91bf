#include "tdbem/assembly.hpp"
#include "tdbem/parallel.hpp"

#include <cmath>
#include <functional>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace tdbem {

namespace {

constexpr double kPi = std::numbers::pi;

// One triangle pair's contribution: channels x lag range [l0, l0+nl).
struct PairWeights {
    int l0 = 0;
    int nl = 0;
    std::vector<double> w;  // [channel * nl + (l - l0)]
    double at(int channel, int l) const {
        int k = l - l0;
        return (k >= 0 && k < nl) ? w[channel * nl + k] : 0.0;
    }
};

std::vector<std::pair<int, int>> unordered_pairs(int n) {
    std::vector<std::pair<int, int>> p;
    p.reserve(std::size_t(n) * (n + 1) / 2);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) p.push_back({a, b});
    return p;
}

void check_mesh(const Mesh& mesh) {
    if (mesh.n_triangles() == 0) throw std::invalid_argument("empty mesh");
}

void warn_memory(const Mesh& mesh, const TimeGrid& grid, int channels,
                 const AssemblyOptions& opts) {
    double n = mesh.n_triangles();
    double est = 0.0;
    for (int a = 0; a < mesh.n_triangles(); ++a)
        for (int b = a; b < mesh.n_triangles(); ++b) {
            double span = triangle_pair_max_distance(mesh.tri[a], mesh.tri[b]) -
                          triangle_pair_min_distance(mesh.tri[a], mesh.tri[b]);
            est += 2.0 * channels * (span / grid.dt + 3.0) * 12.0;
        }
    (void)n;
    if (est > opts.memory_budget_gb * 1e9)
        std::fprintf(stderr,
                     "warning: lag matrix storage estimate %.1f GB exceeds budget %.1f GB\n",
                     est / 1e9, opts.memory_budget_gb);
}

using Triplets = std::vector<Eigen::Triplet<double>>;

std::vector<Eigen::SparseMatrix<double>> build_lag_matrices(
    int n_rows, int n_cols, int n_lags,
    const std::function<void(int, Triplets&)>& emit_lag) {
    std::vector<Eigen::SparseMatrix<double>> mats(n_lags);
    Triplets trip;
    for (int l = 0; l < n_lags; ++l) {
        trip.clear();
        emit_lag(l, trip);
        mats[l].resize(n_rows, n_cols);
        mats[l].setFromTriplets(trip.begin(), trip.end());
        mats[l].prune(0.0, 0.0);
    }
    return mats;
}

}  // namespace

double ringdown_signal(double t) {
    if (t < 0.0 || t > 4.0) return 0.0;
    double s = 4.0 - t;
    return -0.75 + std::cos(0.5 * kPi * s) + 0.5 * kPi * std::sin(0.5 * kPi * s) -
           0.25 * (std::cos(kPi * s) + kPi * std::sin(kPi * s));
}

LagMatrixSequence assemble_single_layer(const Mesh& mesh, const TimeGrid& grid,
                                        const AssemblyOptions& opts) {
    check_mesh(mesh);
    warn_memory(mesh, grid, 1, opts);
    const int n = mesh.n_triangles();
    const double dt = grid.dt;
    auto pairs = unordered_pairs(n);
    std::vector<PairWeights> res(pairs.size());

    parallel_chunks(pairs.size(), opts.n_threads, [&](std::size_t p) {
        auto [a, b] = pairs[p];
        auto m = shell_moments_p0(mesh.tri[a], mesh.tri[b], dt, opts.rule);
        PairWeights& pw = res[p];
        pw.l0 = m.j0;
        pw.nl = m.n_shells();
        pw.w.resize(pw.nl);
        for (int j = 0; j < pw.nl; ++j) pw.w[j] = m.invr[j][0] / (4.0 * kPi);
    });

    int n_lags = 0;
    for (const auto& pw : res) n_lags = std::max(n_lags, pw.l0 + pw.nl);

    LagMatrixSequence seq;
    seq.op = OperatorId::SingleLayer;
    seq.n_space = n;
    seq.dt = dt;
    seq.lag_cutoff = lag_cutoff(grid, mesh);
    seq.mats = build_lag_matrices(n, n, n_lags, [&](int l, Triplets& trip) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto& pw = res[p];
            if (l < pw.l0 || l >= pw.l0 + pw.nl) continue;
            double v = pw.w[l - pw.l0];
            if (v == 0.0) continue;
            auto [a, b] = pairs[p];
            trip.emplace_back(a, b, v);
            if (a != b) trip.emplace_back(b, a, v);
        }
    });
    return seq;
}

namespace {

// Hypersingular lag weights for one (va, vb) hat combination:
//   (1/2pi) [ (n_a.n_b)/dt (N^l - 2N^{l-1} + N^{l-2})
//           + dt (grad_a.grad_b) { (1/2 - rho + rho^2/2) on shell l
//                                 + (1/2 + rho - rho^2) on shell l-1
//                                 + (rho^2/2) on shell l-2 } ]
double hyper_weight(const ShellMomentsP1& m, int va, int vb, double ndot, double gdot,
                    double dt, int l) {
    auto bb0 = [&](int j) {
        int k = j - m.j0;
        return (k >= 0 && k < m.n_shells()) ? m.bb[k][0][va * 3 + vb] : 0.0;
    };
    auto sc = [&](int j, int kk) {
        int k = j - m.j0;
        return (k >= 0 && k < m.n_shells()) ? m.scalar[k][kk] : 0.0;
    };
    double nterm = ndot / dt * (bb0(l) - 2.0 * bb0(l - 1) + bb0(l - 2));
    double gterm = 0.5 * sc(l, 0) - sc(l, 1) + 0.5 * sc(l, 2) + 0.5 * sc(l - 1, 0) +
                   sc(l - 1, 1) - sc(l - 1, 2) + 0.5 * sc(l - 2, 2);
    return (nterm + dt * gdot * gterm) / (2.0 * kPi);
}

// V-block weights for hat-in-time ansatz tested with the time derivative of
// piecewise constants: -(1-rho) on shell l, (1-2rho) on shell l-1, rho on l-2.
double vblock_weight(const ShellMomentsP1& m, int va, int vb, int l) {
    auto bb = [&](int j, int kk) {
        int k = j - m.j0;
        return (k >= 0 && k < m.n_shells()) ? m.bb[k][kk][va * 3 + vb] : 0.0;
    };
    return (-(bb(l, 0) - bb(l, 1)) + bb(l - 1, 0) - 2.0 * bb(l - 1, 1) + bb(l - 2, 1)) /
           (4.0 * kPi);
}

std::vector<int> node_dof_map(const Mesh& mesh, bool interior_only) {
    std::vector<int> dof(mesh.n_nodes(), -1);
    int next = 0;
    if (interior_only) {
        for (int nd : mesh.interior_nodes()) dof[nd] = next++;
    } else {
        for (int nd = 0; nd < mesh.n_nodes(); ++nd) dof[nd] = next++;
    }
    return dof;
}

struct P1PairData {
    PairWeights hyper;   // 9 channels (va*3+vb)
    PairWeights vblock;  // 9 channels, only filled for DtN
};

std::vector<P1PairData> compute_p1_pairs(const Mesh& mesh, const TimeGrid& grid,
                                         const AssemblyOptions& opts, bool with_vblock,
                                         const std::vector<std::pair<int, int>>& pairs) {
    std::vector<P1PairData> res(pairs.size());
    const double dt = grid.dt;
    parallel_chunks(pairs.size(), opts.n_threads, [&](std::size_t p) {
        auto [a, b] = pairs[p];
        const TriangleGeom& A = mesh.tri[a];
        const TriangleGeom& B = mesh.tri[b];
        auto m = shell_moments_p1(A, B, dt, opts.rule);
        double ndot = A.normal.dot(B.normal);
        int l0 = m.j0, nl = m.n_shells() + 2;
        auto& pd = res[p];
        pd.hyper.l0 = l0;
        pd.hyper.nl = nl;
        pd.hyper.w.resize(9 * nl);
        if (with_vblock) {
            pd.vblock.l0 = l0;
            pd.vblock.nl = nl;
            pd.vblock.w.resize(9 * nl);
        }
        for (int va = 0; va < 3; ++va)
            for (int vb = 0; vb < 3; ++vb) {
                double gdot = A.hat_grad[va].dot(B.hat_grad[vb]);
                for (int l = l0; l < l0 + nl; ++l) {
                    pd.hyper.w[(va * 3 + vb) * nl + (l - l0)] =
                        hyper_weight(m, va, vb, ndot, gdot, dt, l);
                    if (with_vblock)
                        pd.vblock.w[(va * 3 + vb) * nl + (l - l0)] =
                            vblock_weight(m, va, vb, l);
                }
            }
    });
    return res;
}

// Emit one P1 pair block into triplets, mirroring for a != b and
// symmetrizing the self block.
void emit_p1_pair(const Mesh& mesh, int a, int b, const PairWeights& pw, int l,
                  const std::vector<int>& row_dof, const std::vector<int>& col_dof,
                  int row_off, int col_off, Triplets& trip) {
    if (l < pw.l0 || l >= pw.l0 + pw.nl) return;
    const auto& ta = mesh.triangles[a];
    const auto& tb = mesh.triangles[b];
    for (int va = 0; va < 3; ++va)
        for (int vb = 0; vb < 3; ++vb) {
            double v = pw.w[(va * 3 + vb) * pw.nl + (l - pw.l0)];
            if (a == b) {
                double vt = pw.w[(vb * 3 + va) * pw.nl + (l - pw.l0)];
                double vs = 0.5 * (v + vt);
                int r = row_dof[ta[va]], c = col_dof[tb[vb]];
                if (r >= 0 && c >= 0 && vs != 0.0)
                    trip.emplace_back(row_off + r, col_off + c, vs);
            } else {
                int r = row_dof[ta[va]], c = col_dof[tb[vb]];
                if (r >= 0 && c >= 0 && v != 0.0)
                    trip.emplace_back(row_off + r, col_off + c, v);
                // transposed contribution of the (b, a) pair
                int rt = row_dof[tb[vb]], ct = col_dof[ta[va]];
                if (rt >= 0 && ct >= 0 && v != 0.0)
                    trip.emplace_back(row_off + rt, col_off + ct, v);
            }
        }
}

}  // namespace

LagMatrixSequence assemble_hypersingular(const Mesh& mesh, const TimeGrid& grid,
                                         const AssemblyOptions& opts) {
    check_mesh(mesh);
    warn_memory(mesh, grid, 9, opts);
    auto dof = node_dof_map(mesh, true);
    int n_dof = 0;
    for (int d : dof) n_dof = std::max(n_dof, d + 1);
    if (n_dof == 0) throw std::invalid_argument("no interior nodes");

    auto pairs = unordered_pairs(mesh.n_triangles());
    auto res = compute_p1_pairs(mesh, grid, opts, false, pairs);
    int n_lags = 0;
    for (const auto& pd : res) n_lags = std::max(n_lags, pd.hyper.l0 + pd.hyper.nl);

    LagMatrixSequence seq;
    seq.op = OperatorId::Hypersingular;
    seq.n_space = n_dof;
    seq.dt = grid.dt;
    seq.lag_cutoff = lag_cutoff(grid, mesh) + 2;
    seq.dof_nodes.assign(n_dof, -1);
    for (int nd = 0; nd < mesh.n_nodes(); ++nd)
        if (dof[nd] >= 0) seq.dof_nodes[dof[nd]] = nd;
    seq.mats = build_lag_matrices(n_dof, n_dof, n_lags, [&](int l, Triplets& trip) {
        for (std::size_t p = 0; p < pairs.size(); ++p)
            emit_p1_pair(mesh, pairs[p].first, pairs[p].second, res[p].hyper, l, dof, dof,
                         0, 0, trip);
    });
    return seq;
}

LagMatrixSequence assemble_dtn_blocks(const Mesh& mesh, const TimeGrid& grid,
                                      const AssemblyOptions& opts) {
    check_mesh(mesh);
    if (!mesh.is_flat()) throw std::invalid_argument("DtN blocks require a flat screen");
    warn_memory(mesh, grid, 18, opts);
    auto phi_dof = node_dof_map(mesh, true);
    auto psi_dof = node_dof_map(mesh, false);
    int n_phi = 0;
    for (int d : phi_dof) n_phi = std::max(n_phi, d + 1);
    int n_psi = mesh.n_nodes();
    if (n_phi == 0) throw std::invalid_argument("no interior nodes");

    auto pairs = unordered_pairs(mesh.n_triangles());
    auto res = compute_p1_pairs(mesh, grid, opts, true, pairs);
    int n_lags = 2;
    for (const auto& pd : res) n_lags = std::max(n_lags, pd.hyper.l0 + pd.hyper.nl);

    // local P1 mass matrices for the +-1/2 couplings
    auto local_mass = [&](int t, int va, int vb) {
        return mesh.tri[t].area * (va == vb ? 1.0 / 6.0 : 1.0 / 12.0);
    };

    LagMatrixSequence seq;
    seq.op = OperatorId::DtN;
    seq.n_phi = n_phi;
    seq.n_space = n_phi + n_psi;
    seq.dt = grid.dt;
    seq.lag_cutoff = lag_cutoff(grid, mesh) + 2;
    seq.dof_nodes.assign(n_phi, -1);
    for (int nd = 0; nd < mesh.n_nodes(); ++nd)
        if (phi_dof[nd] >= 0) seq.dof_nodes[phi_dof[nd]] = nd;

    const double dt = grid.dt;
    seq.mats = build_lag_matrices(seq.n_space, seq.n_space, n_lags, [&](int l, Triplets& trip) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            emit_p1_pair(mesh, pairs[p].first, pairs[p].second, res[p].hyper, l, phi_dof,
                         phi_dof, 0, 0, trip);
            emit_p1_pair(mesh, pairs[p].first, pairs[p].second, res[p].vblock, l, psi_dof,
                         psi_dof, n_phi, n_phi, trip);
        }
        if (l <= 1) {
            // first equation: +1/2 <psi, Phi> with int gamma^n beta^m dt = dt/2
            // second equation: +1/2 <phi, dt Psi> giving -+1/2 mass at lags 0, 1
            double c12 = 0.25 * dt;             // 1/2 * dt/2
            double c21 = (l == 0) ? -0.5 : 0.5;
            for (int t = 0; t < mesh.n_triangles(); ++t)
                for (int va = 0; va < 3; ++va)
                    for (int vb = 0; vb < 3; ++vb) {
                        double m = local_mass(t, va, vb);
                        int na = mesh.triangles[t][va], nb = mesh.triangles[t][vb];
                        if (phi_dof[na] >= 0)
                            trip.emplace_back(phi_dof[na], n_phi + psi_dof[nb], c12 * m);
                        if (phi_dof[nb] >= 0)
                            trip.emplace_back(n_phi + psi_dof[na], phi_dof[nb], c21 * m);
                    }
        }
    });
    return seq;
}

LagMatrixSequence assemble_adjoint_double_layer_halfspace(const Mesh& mesh,
                                                          const TimeGrid& grid,
                                                          const AssemblyOptions& opts) {
    check_mesh(mesh);
    warn_memory(mesh, grid, 2, opts);
    const int n = mesh.n_triangles();
    const double dt = grid.dt;
    Mesh image = reflect_z(mesh);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(std::size_t(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) pairs.push_back({a, b});
    std::vector<PairWeights> res(pairs.size());

    auto kprime = [&](const ShellMomentsAdjDL& m, int l) {
        auto k3 = [&](int j, int kk) {
            int k = j - m.j0;
            return (k >= 0 && k < m.n_shells()) ? m.k3[k][kk] : 0.0;
        };
        auto k2 = [&](int j) {
            int k = j - m.j0;
            return (k >= 0 && k < m.n_shells()) ? m.k2[k] : 0.0;
        };
        // phi part: tent overlap dt(1-rho) on shell l, dt*rho on shell l-1;
        // phi-dot part: indicator difference chi_l - chi_{l-1}
        return (dt * (k3(l, 0) - k3(l, 1) + k3(l - 1, 1)) + k2(l) - k2(l - 1)) /
               (2.0 * kPi);
    };

    parallel_chunks(pairs.size(), opts.n_threads, [&](std::size_t p) {
        auto [a, b] = pairs[p];
        auto md = shell_moments_adjdl(mesh.tri[a], mesh.tri[b], dt, opts.rule);
        auto mi = shell_moments_adjdl(mesh.tri[a], image.tri[b], dt, opts.rule);
        int l0 = std::min(md.j0, mi.j0);
        int l1 = std::max(md.j0 + md.n_shells(), mi.j0 + mi.n_shells()) + 1;
        auto& pw = res[p];
        pw.l0 = l0;
        pw.nl = l1 - l0;
        pw.w.resize(pw.nl);
        for (int l = l0; l < l1; ++l) pw.w[l - l0] = kprime(md, l) + kprime(mi, l);
    });

    int n_lags = 1;
    for (const auto& pw : res) n_lags = std::max(n_lags, pw.l0 + pw.nl);

    LagMatrixSequence seq;
    seq.op = OperatorId::AdjointDLHalfSpace;
    seq.n_space = n;
    seq.dt = dt;
    double diam = mesh_diameter(mesh);
    double zmax = 0.0;
    for (const auto& nd : mesh.nodes) zmax = std::max(zmax, std::abs(nd.z()));
    seq.lag_cutoff = int(std::ceil(std::hypot(diam, 2.0 * zmax) / dt)) + 1;
    seq.mats = build_lag_matrices(n, n, n_lags, [&](int l, Triplets& trip) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto& pw = res[p];
            if (l < pw.l0 || l >= pw.l0 + pw.nl) continue;
            double v = pw.w[l - pw.l0];
            if (v != 0.0) trip.emplace_back(pairs[p].first, pairs[p].second, v);
        }
        if (l == 0)
            for (int t = 0; t < n; ++t) trip.emplace_back(t, t, -dt * mesh.tri[t].area);
    });
    return seq;
}

namespace {

Eigen::VectorXd sample_p0(const Mesh& mesh, const std::function<double(const Vec3&)>& f) {
    Eigen::VectorXd v(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        double s = 0.0;
        for (const auto& q : triangle_rule_points(mesh.tri[t])) s += q.w * f(q.x);
        v[t] = s;
    }
    return v;
}

double step_integral(double t0, double t1, const std::function<double(double)>& f) {
    std::vector<double> x, w;
    gauss_legendre_01(8, x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(t0 + (t1 - t0) * x[i]);
    return (t1 - t0) * s;
}

}  // namespace

RhsTimeSeries assemble_rhs(const Mesh& mesh, const TimeGrid& grid, OperatorId op,
                           const RhsSpec& rhs, const QuadratureRule& rule) {
    check_mesh(mesh);
    RhsTimeSeries out;
    const int N = grid.n_steps;
    const double dt = grid.dt;

    if (const auto* pw = std::get_if<PlaneWavePacket>(&rhs)) {
        if (op != OperatorId::SingleLayer)
            throw std::invalid_argument("PlaneWavePacket drives the single layer equation");
        out.rhs_id = "plane_wave_packet";
        out.difference_form = true;
        double kn = pw->k.norm();
        for (int n = 0; n <= N; ++n) {
            double t = grid.time(n);
            double env = t > 0 ? std::exp(-1.0 / (10.0 * t * t)) : 0.0;
            Vec3 k = pw->k;
            out.vectors.push_back(sample_p0(
                mesh, [&](const Vec3& x) { return std::cos(kn * t - k.dot(x)) * env; }));
        }
        return out;
    }

    if (std::holds_alternative<RingdownG>(rhs)) {
        if (op != OperatorId::Hypersingular && op != OperatorId::DtN)
            throw std::invalid_argument("RingdownG drives the W and DtN equations");
        out.rhs_id = "ringdown";
        // nodal loads <1, xi_l> are time-independent
        std::vector<double> node_area(mesh.n_nodes(), 0.0);
        for (int t = 0; t < mesh.n_triangles(); ++t)
            for (int v = 0; v < 3; ++v)
                node_area[mesh.triangles[t][v]] += mesh.tri[t].area / 3.0;
        std::vector<int> rows;
        for (int nd : mesh.interior_nodes()) rows.push_back(nd);
        int n_phi = static_cast<int>(rows.size());
        int size = op == OperatorId::DtN ? n_phi + mesh.n_nodes() : n_phi;
        for (int n = 1; n <= N; ++n) {
            double gint = step_integral(grid.time(n - 1), grid.time(n), ringdown_signal);
            Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
            for (int i = 0; i < n_phi; ++i) v[i] = gint * node_area[rows[i]];
            out.vectors.push_back(std::move(v));
        }
        return out;
    }

    const auto& ps = std::get<PointSourceDirac>(rhs);
    if (op != OperatorId::AdjointDLHalfSpace)
        throw std::invalid_argument("PointSourceDirac drives the half-space equation");
    out.rhs_id = "point_source";
    Vec3 srcs[2] = {ps.y_src, Vec3(ps.y_src.x(), ps.y_src.y(), -ps.y_src.z())};
    for (int n = 1; n <= N; ++n) {
        double t0 = grid.time(n - 1), t1 = grid.time(n);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.n_triangles());
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const TriangleGeom& T = mesh.tri[t];
            double c = 0.0;
            for (const Vec3& y : srcs) {
                double zs = T.normal.dot(y - T.v[0]);
                if (std::abs(zs) < 1e-14 * std::max(1.0, T.diameter)) continue;
                double infl = point_annulus_integral(T, y, t0, t1, 3, rule);
                double curve = 0.0;
                if (t0 > 0.0) curve += arc_angle_in_triangle(T, y, t0) / t0;
                curve -= arc_angle_in_triangle(T, y, t1) / t1;
                c += zs * (curve - infl) / (2.0 * kPi);
            }
            v[t] = c;
        }
        out.vectors.push_back(std::move(v));
    }
    return out;
}

}  // namespace tdbem
