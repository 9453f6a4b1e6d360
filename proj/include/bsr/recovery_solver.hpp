#pragma once

#include <vector>

#include "bsr/block_types.hpp"

namespace bsr::solver {

/// Parameters of the splitting iteration.
///
/// The iteration runs on a rescaled problem in which the minimum-norm feasible
/// point has root-mean-square block norm 1; `penalty` and both residual
/// tolerances are absolute in those units.
struct SolverConfig {
    double penalty = 1.0;
    int max_iters = 10'000;
    double primal_tol = 1e-6;
    double dual_tol = 1e-6;
    double success_tol = 1e-3;
    bool record_history = false;

    void validate() const;
};

struct SolveReport {
    BlockSignal estimate;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    // Filled when SolverConfig::record_history is set.
    std::vector<double> primal_history;
    std::vector<double> dual_history;
};

/// Proximal operator of lambda * ||.||_2: max(0, 1 - lambda / ||v||) v.
Vector block_soft_threshold(const Eigen::Ref<const Vector>& v, double lambda);

/// Euclidean projection onto {x : A x = y}.
///
/// Holds the Cholesky factor L of A A^T and the row-orthonormal W = L^-1 A,
/// so a projection costs two matrix-vector products.
class AffineProjector {
public:
    /// Throws RankDeficientError when A A^T is not numerically positive definite.
    explicit AffineProjector(const Matrix& a);

    /// point - A^T (A A^T)^-1 (A point - y).
    Vector project(const Eigen::Ref<const Vector>& point, const Eigen::Ref<const Vector>& y) const;

    /// L^-1 y.
    Vector whiten(const Eigen::Ref<const Vector>& y) const;
    /// point - W^T (W point - yw) for a whitened right-hand side yw.
    Vector project_whitened(const Eigen::Ref<const Vector>& point,
                            const Eigen::Ref<const Vector>& yw) const;

    Eigen::Index rows() const { return w_.rows(); }
    Eigen::Index cols() const { return w_.cols(); }

private:
    Eigen::LLT<Matrix> llt_;
    Matrix w_;
};

/// Minimizes sum_i ||x_i||_2 subject to A x = y over blocks of length d.
/// Non-convergence within max_iters is reported through `converged`, with the
/// best iterate returned; a rank-deficient A throws RankDeficientError.
SolveReport solve_l2l1(const Matrix& a, const Vector& y, int d, const SolverConfig& config);
SolveReport solve_l2l1(const ProblemInstance& instance, const SolverConfig& config);

/// ||estimate - planted||_2 / max(||planted||_2, 1e-300).
double relative_error(const BlockSignal& estimate, const BlockSignal& planted);

/// relative_error < tol. Throws on dimension mismatch.
bool recovery_success(const BlockSignal& estimate, const BlockSignal& planted, double tol);

}  // namespace bsr::solver
