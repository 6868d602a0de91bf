#include "tdbem/mot.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace tdbem {

namespace {

Eigen::SparseMatrix<double> zero_like(const LagMatrixSequence& s) {
    Eigen::SparseMatrix<double> z(s.n_space, s.n_space);
    return z;
}

const Eigen::SparseMatrix<double>* shell(const LagMatrixSequence& s, int l) {
    if (l < 0 || l >= s.n_lags()) return nullptr;
    return &s.mats[l];
}

// Single layer convolution via difference history:
// sum_l (V^{l-1} - V^l) psi^{n-l} = -sum_j V^j (psi^{n-j} - psi^{n-j-1}).
Eigen::VectorXd shell_difference_convolution(const LagMatrixSequence& s,
                                             const std::vector<Eigen::VectorXd>& diffs,
                                             int n, int from_lag) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s.n_space);
    for (int j = from_lag; j <= std::min(n - 1, s.n_lags() - 1); ++j) {
        const auto* S = shell(s, j);
        if (S && S->nonZeros()) acc += (*S) * diffs[n - 1 - j];
    }
    return acc;
}

Eigen::VectorXd step_rhs(const RhsTimeSeries& rhs, int n) {
    if (rhs.difference_form) return rhs.vectors[n - 1] - rhs.vectors[n];
    return rhs.vectors[n - 1];
}

int count_steps(const RhsTimeSeries& rhs) {
    int n = static_cast<int>(rhs.vectors.size());
    return rhs.difference_form ? n - 1 : n;
}

}  // namespace

Eigen::SparseMatrix<double> system_matrix(const LagMatrixSequence& s, int l) {
    if (s.op == OperatorId::SingleLayer) {
        Eigen::SparseMatrix<double> a = zero_like(s);
        if (const auto* m = shell(s, l - 1)) a += *m;
        if (const auto* m = shell(s, l)) a -= *m;
        return a;
    }
    if (const auto* m = shell(s, l)) return *m;
    return zero_like(s);
}

DensityHistory march(const LagMatrixSequence& system, const RhsTimeSeries& rhs,
                     const StepSolverConfig& cfg) {
    const int N = count_steps(rhs);
    if (N < 0) throw std::invalid_argument("empty rhs");
    const bool single_layer = system.op == OperatorId::SingleLayer;

    // lag-0 step matrix; for the single layer we march with V^0 itself
    // (V^0 psi^n = V^0 psi^{n-1} - sum_{j>=1} V^j d^{n-j} - b^n)
    Eigen::SparseMatrix<double> A0 =
        single_layer ? system.mats.at(0) : system_matrix(system, 0);
    A0.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    const bool use_cg = cfg.method == StepSolverConfig::Method::ConjugateGradient;
    if (use_cg) {
        if (cfg.tol <= 0) throw std::invalid_argument("cg tolerance must be positive");
        cg.setTolerance(cfg.tol);
        cg.setMaxIterations(cfg.max_iter);
        cg.compute(A0);
        if (cg.info() != Eigen::Success)
            throw std::runtime_error("CG setup failed on the lag-0 matrix");
    } else {
        lu.compute(A0);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("factorization of the lag-0 matrix failed");
    }

    DensityHistory hist;
    hist.op = system.op;
    hist.dt = system.dt;
    hist.n_phi = system.n_phi;
    hist.dof_nodes = system.dof_nodes;
    hist.steps.reserve(N);
    std::vector<Eigen::VectorXd> diffs;  // psi^m - psi^{m-1}, single layer only
    diffs.reserve(single_layer ? N : 0);

    Eigen::VectorXd prev = Eigen::VectorXd::Zero(system.n_space);
    for (int n = 1; n <= N; ++n) {
        Eigen::VectorXd b;
        if (single_layer) {
            b = A0 * prev - shell_difference_convolution(system, diffs, n, 1) -
                step_rhs(rhs, n);
        } else {
            b = step_rhs(rhs, n);
            for (int l = 1; l <= std::min(n - 1, system.n_lags() - 1); ++l) {
                const auto* m = shell(system, l);
                if (m && m->nonZeros()) b -= (*m) * hist.steps[n - 1 - l];
            }
        }
        Eigen::VectorXd x = use_cg ? cg.solve(b).eval() : lu.solve(b).eval();
        if (use_cg && cg.info() != Eigen::Success)
            throw std::runtime_error("CG failed to converge at step " + std::to_string(n));
        if (!use_cg && lu.info() != Eigen::Success)
            throw std::runtime_error("solve failed at step " + std::to_string(n));
        if (single_layer) diffs.push_back(x - prev);
        prev = x;
        hist.steps.push_back(std::move(x));
    }
    return hist;
}

DensityHistory march_dtn(const LagMatrixSequence& blocks, const RhsTimeSeries& rhs,
                         const StepSolverConfig& cfg) {
    if (blocks.op != OperatorId::DtN)
        throw std::invalid_argument("march_dtn expects DtN blocks");
    return march(blocks, rhs, cfg);
}

double energy_functional(const LagMatrixSequence& system, const DensityHistory& psi,
                         const RhsTimeSeries& rhs) {
    const int N = psi.n_steps();
    double e = 0.0;
    if (system.op == OperatorId::SingleLayer) {
        // sign convention with positive definite lag-0 block:
        // Abar^l = V^l - V^{l-1}, bbar^n = f^n - f^{n-1}
        std::vector<Eigen::VectorXd> diffs(N);
        for (int m = 0; m < N; ++m)
            diffs[m] = m == 0 ? psi.steps[0] : (psi.steps[m] - psi.steps[m - 1]).eval();
        for (int n = 1; n <= N; ++n) {
            Eigen::VectorXd w = shell_difference_convolution(system, diffs, n, 0);
            Eigen::VectorXd b = -step_rhs(rhs, n);
            e += psi.steps[n - 1].dot(0.5 * w - b);
        }
        return e;
    }
    if (system.op != OperatorId::Hypersingular)
        throw std::invalid_argument("energy functional needs the V or W system");
    for (int n = 1; n <= N; ++n) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(system.n_space);
        for (int l = 0; l <= std::min(n - 1, system.n_lags() - 1); ++l) {
            const auto* m = shell(system, l);
            if (m && m->nonZeros()) w += (*m) * psi.steps[n - 1 - l];
        }
        e += psi.steps[n - 1].dot(0.5 * w - step_rhs(rhs, n));
    }
    return e;
}

double spacetime_residual(const LagMatrixSequence& system, const RhsTimeSeries& rhs,
                          const DensityHistory& psi) {
    const int N = psi.n_steps();
    const bool single_layer = system.op == OperatorId::SingleLayer;
    std::vector<Eigen::VectorXd> diffs;
    if (single_layer) {
        diffs.resize(N);
        for (int m = 0; m < N; ++m)
            diffs[m] = m == 0 ? psi.steps[0] : (psi.steps[m] - psi.steps[m - 1]).eval();
    }
    double rr = 0.0, bb = 0.0;
    for (int n = 1; n <= N; ++n) {
        Eigen::VectorXd b = step_rhs(rhs, n);
        Eigen::VectorXd lhs;
        if (single_layer) {
            lhs = -shell_difference_convolution(system, diffs, n, 0);
        } else {
            lhs = Eigen::VectorXd::Zero(system.n_space);
            for (int l = 0; l <= std::min(n - 1, system.n_lags() - 1); ++l) {
                const auto* m = shell(system, l);
                if (m && m->nonZeros()) lhs += (*m) * psi.steps[n - 1 - l];
            }
        }
        rr += (lhs - b).squaredNorm();
        bb += b.squaredNorm();
    }
    return bb > 0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

}  // namespace tdbem
