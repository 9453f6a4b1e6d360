#include "bsr/recovery_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsr/errors.hpp"

namespace bsr::solver {
namespace {

constexpr double kPivotRatio = 1e-8;

// Applies the block prox in place on consecutive length-d segments.
void shrink_blocks(Vector& v, int d, double lambda) {
    const Eigen::Index blocks = v.size() / d;
    for (Eigen::Index i = 0; i < blocks; ++i) {
        auto seg = v.segment(i * d, d);
        const double norm = seg.norm();
        if (norm <= lambda) {
            seg.setZero();
        } else {
            seg *= 1.0 - lambda / norm;
        }
    }
}

double block_objective(const Vector& v, int d) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size() / d; ++i) sum += v.segment(i * d, d).norm();
    return sum;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(penalty > 0.0) || max_iters < 1 || !(primal_tol > 0.0) || !(dual_tol > 0.0) ||
        !(success_tol > 0.0)) {
        throw DomainError("solver config: penalty, max_iters and tolerances must be positive");
    }
}

Vector block_soft_threshold(const Eigen::Ref<const Vector>& v, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("block soft threshold: lambda must be >= 0");
    const double norm = v.norm();
    if (norm <= lambda) return Vector::Zero(v.size());
    return (1.0 - lambda / norm) * v;
}

AffineProjector::AffineProjector(const Matrix& a) {
    if (a.rows() == 0 || a.rows() > a.cols()) {
        std::ostringstream os;
        os << "affine projector: need 0 < rows <= cols, got " << a.rows() << "x" << a.cols();
        throw RankDeficientError(os.str());
    }
    Matrix gram = Matrix::Zero(a.rows(), a.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
        throw RankDeficientError("affine projector: A A^T is not positive definite");
    }
    const Vector diag = llt_.matrixLLT().diagonal();
    if (diag.minCoeff() <= kPivotRatio * diag.maxCoeff()) {
        throw RankDeficientError("affine projector: A is numerically rank deficient");
    }
    w_ = llt_.matrixL().solve(a);
}

Vector AffineProjector::whiten(const Eigen::Ref<const Vector>& y) const {
    if (y.size() != w_.rows()) throw Error(ErrorCode::kDimensionMismatch, "projector: bad y size");
    return llt_.matrixL().solve(y);
}

Vector AffineProjector::project_whitened(const Eigen::Ref<const Vector>& point,
                                         const Eigen::Ref<const Vector>& yw) const {
    if (point.size() != w_.cols()) {
        throw Error(ErrorCode::kDimensionMismatch, "projector: bad point size");
    }
    Vector gap = w_ * point - yw;
    return point - w_.transpose() * gap;
}

Vector AffineProjector::project(const Eigen::Ref<const Vector>& point,
                                const Eigen::Ref<const Vector>& y) const {
    return project_whitened(point, whiten(y));
}

SolveReport solve_l2l1(const Matrix& a, const Vector& y, int d, const SolverConfig& config) {
    config.validate();
    if (d < 1 || a.cols() % d != 0 || a.rows() != y.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "solve_l2l1: inconsistent A, y, d");
    }
    const AffineProjector projector(a);
    const Eigen::Index n_cols = a.cols();
    const double blocks = static_cast<double>(n_cols / d);

    // Rescale so the minimum-norm feasible point has RMS block norm 1.
    Vector yw = projector.whiten(y);
    const double scale = yw.norm() / std::sqrt(blocks);  // ||W^T yw|| = ||yw||
    SolveReport report;
    if (scale == 0.0) {
        report.estimate = BlockSignal(Vector::Zero(n_cols), d);
        report.converged = true;
        return report;
    }
    yw /= scale;
    const Vector offset = projector.project_whitened(Vector::Zero(n_cols), yw);

    const double rho = config.penalty;
    const double lambda = 1.0 / rho;
    Vector z = Vector::Zero(n_cols);
    Vector u = Vector::Zero(n_cols);
    Vector x(n_cols);
    Vector z_prev(n_cols);
    Vector best = offset;
    double best_score = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        // x-step: project z - u onto the affine set.
        const Vector v = z - u;
        x = projector.project_whitened(v, yw);
        // z-step: block prox of (x + u).
        z_prev.swap(z);
        z = x + u;
        shrink_blocks(z, d, lambda);
        u += x - z;

        const double primal = (x - z).norm();
        const double dual = rho * (z - z_prev).norm();
        report.iterations = iter;
        report.primal_residual = primal;
        report.dual_residual = dual;
        if (config.record_history) {
            report.primal_history.push_back(primal);
            report.dual_history.push_back(dual);
        }
        const double score = std::max(primal / config.primal_tol, dual / config.dual_tol);
        if (score < best_score) {
            best_score = score;
            best = x;
        }
        if (primal < config.primal_tol && dual < config.dual_tol) {
            report.converged = true;
            break;
        }
    }

    const Vector& chosen = report.converged ? x : best;
    report.estimate = BlockSignal(scale * chosen, d);
    report.objective = block_objective(report.estimate.values(), d);
    return report;
}

SolveReport solve_l2l1(const ProblemInstance& instance, const SolverConfig& config) {
    return solve_l2l1(instance.matrix, instance.measurements, instance.dims.d, config);
}

double relative_error(const BlockSignal& estimate, const BlockSignal& planted) {
    if (estimate.values().size() != planted.values().size() ||
        estimate.block_length() != planted.block_length()) {
        throw Error(ErrorCode::kDimensionMismatch, "recovery check: signal dimensions differ");
    }
    const double denom = std::max(planted.values().norm(), 1e-300);
    return (estimate.values() - planted.values()).norm() / denom;
}

bool recovery_success(const BlockSignal& estimate, const BlockSignal& planted, double tol) {
    return relative_error(estimate, planted) < tol;
}

}  // namespace bsr::solver
