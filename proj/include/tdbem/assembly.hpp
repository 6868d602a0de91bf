#pragma once

#include "tdbem/geometry.hpp"
#include "tdbem/quadrature.hpp"
#include "tdbem/timegrid.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <variant>
#include <vector>

namespace tdbem {

enum class OperatorId { SingleLayer, Hypersingular, AdjointDLHalfSpace, DtN };

/// Lag-indexed Galerkin matrices of a marching scheme.
///
/// For the single layer, mats[l] are the raw shell integrals
///   (V^l)_{il} = (1/4pi) int_{E_l} psi_i(y) psi_l(x)/|x-y| ds_x ds_y
/// and the marching system matrices are the telescoped V^{l-1} - V^l.
/// For the other operators mats[l] are the per-lag system matrices directly.
struct LagMatrixSequence {
    OperatorId op = OperatorId::SingleLayer;
    std::vector<Eigen::SparseMatrix<double>> mats;
    int lag_cutoff = 0;  // mats[l] vanish for l > lag_cutoff
    int n_space = 0;     // unknowns per time step (total block size for DtN)
    int n_phi = 0;       // DtN: size of the leading phi block
    double dt = 0.0;
    std::vector<int> dof_nodes;  // P1 dof -> mesh node id (empty for P0 dofs)

    int n_lags() const { return static_cast<int>(mats.size()); }
};

/// Per-step load vectors. For the single layer, vectors[n] samples f at t_n
/// (n = 0..n_steps) and the marching right-hand side is f^{n-1} - f^n
/// (difference_form). Otherwise vectors[n-1] is the assembled b^n directly.
struct RhsTimeSeries {
    std::vector<Eigen::VectorXd> vectors;
    bool difference_form = false;
    std::string rhs_id;
};

struct PlaneWavePacket {
    Vec3 k = Vec3(0.2, 0.2, 0.2);
};
struct RingdownG {};  // windowed ringdown signal used as g and h data
struct PointSourceDirac {
    Vec3 y_src = Vec3(0.08, 0.0, 0.0);
};
using RhsSpec = std::variant<PlaneWavePacket, RingdownG, PointSourceDirac>;

/// The Examples' time signal, zero outside 0 <= t <= 4.
double ringdown_signal(double t);

struct AssemblyOptions {
    QuadratureRule rule;
    int n_threads = 0;            // 0: use hardware concurrency
    double memory_budget_gb = 8.0;
};

LagMatrixSequence assemble_single_layer(const Mesh& mesh, const TimeGrid& grid,
                                        const AssemblyOptions& opts = {});
LagMatrixSequence assemble_hypersingular(const Mesh& mesh, const TimeGrid& grid,
                                         const AssemblyOptions& opts = {});
LagMatrixSequence assemble_adjoint_double_layer_halfspace(const Mesh& mesh,
                                                          const TimeGrid& grid,
                                                          const AssemblyOptions& opts = {});
LagMatrixSequence assemble_dtn_blocks(const Mesh& mesh, const TimeGrid& grid,
                                      const AssemblyOptions& opts = {});

RhsTimeSeries assemble_rhs(const Mesh& mesh, const TimeGrid& grid, OperatorId op,
                           const RhsSpec& rhs, const QuadratureRule& rule = {});

}  // namespace tdbem
