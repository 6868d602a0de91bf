#pragma once

#include "tdbem/assembly.hpp"

#include <string>
#include <vector>

namespace tdbem {

struct StepSolverConfig {
    enum class Method { DirectFactorization, ConjugateGradient };
    Method method = Method::DirectFactorization;
    double tol = 1e-12;
    int max_iter = 2000;
    bool reuse_factorization = true;
};

/// Per-step coefficient vectors psi^n, n = 1..n_steps (steps[n-1]).
struct DensityHistory {
    std::vector<Eigen::VectorXd> steps;
    OperatorId op = OperatorId::SingleLayer;
    double dt = 0.0;
    int n_phi = 0;  // DtN: leading block size
    std::vector<int> dof_nodes;

    int n_steps() const { return static_cast<int>(steps.size()); }
    /// DtN helpers: the phi (leading) and psi (trailing) sub-vectors.
    Eigen::VectorXd phi_block(int n) const { return steps[n].head(n_phi); }
    Eigen::VectorXd psi_block(int n) const { return steps[n].tail(steps[n].size() - n_phi); }
};

/// Marching-on-in-time forward substitution through the block-lower-
/// triangular space-time system. n_steps is taken from the RHS length.
DensityHistory march(const LagMatrixSequence& system, const RhsTimeSeries& rhs,
                     const StepSolverConfig& cfg = {});

/// DtN variant; blocks already combined by assemble_dtn_blocks.
DensityHistory march_dtn(const LagMatrixSequence& blocks, const RhsTimeSeries& rhs,
                         const StepSolverConfig& cfg = {});

/// E(psi) = 1/2 psi^T A psi - psi^T b over the full space-time vectors, in the
/// convention with positive definite lag-0 block (single layer only).
double energy_functional(const LagMatrixSequence& system, const DensityHistory& psi,
                         const RhsTimeSeries& rhs);

/// Marching system matrix at lag l (telescoped for the single layer).
Eigen::SparseMatrix<double> system_matrix(const LagMatrixSequence& system, int l);

/// Relative residual of the full space-time system at the given history.
double spacetime_residual(const LagMatrixSequence& system, const RhsTimeSeries& rhs,
                          const DensityHistory& psi);

}  // namespace tdbem
