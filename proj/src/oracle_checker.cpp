#include "bsr/oracle_checker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "bsr/errors.hpp"
#include "bsr/experiment_harness.hpp"
#include "parallel.hpp"

namespace bsr::oracle {
namespace {

void require_small(int p) {
    if (p > kMaxNullspaceDim) {
        std::ostringstream os;
        os << "null-space dimension " << p << " exceeds " << kMaxNullspaceDim
           << "; exhaustive sphere search is not tractable";
        throw DimensionTooLargeError(os.str());
    }
}

void validate_pattern(const SupportPattern& pattern, int n, int d, bool need_directions) {
    std::set<int> seen;
    for (int i : pattern.kappa) {
        if (i < 0 || i >= n || !seen.insert(i).second) {
            throw DomainError("support pattern: block index out of range or repeated");
        }
    }
    if (!need_directions) return;
    if (pattern.directions.size() != pattern.kappa.size()) {
        throw Error(ErrorCode::kMissingDirections,
                    "weak check needs one unit direction per support block");
    }
    for (const auto& u : pattern.directions) {
        if (u.size() != d || std::abs(u.norm() - 1.0) > 1e-9) {
            throw DomainError("support pattern: directions must be unit vectors of length d");
        }
    }
}

// Minimizes `margin_of(block_norms, w)` over the sphere grid.
CheckResult scan(const NullspaceBasis& basis, int d, int resolution,
                 const std::function<double(const Vector& norms, const Vector& w)>& margin_of) {
    CheckResult out;
    const int p = basis.dim();
    require_small(p);
    if (p == 0) {
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    const Matrix grid = sphere_grid(p, resolution);
    const Matrix points = basis.basis * grid;
    const int n = static_cast<int>(basis.basis.rows() / d);
    out.margin = std::numeric_limits<double>::infinity();
    Vector norms(n);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        const Vector w = points.col(j);
        for (int i = 0; i < n; ++i) norms[i] = w.segment(static_cast<Eigen::Index>(i) * d, d).norm();
        const double margin = margin_of(norms, w);
        if (margin < out.margin) {
            out.margin = margin;
            out.witness = w;
        }
    }
    out.points = points.cols();
    out.holds = out.margin > kMarginTol;
    out.indeterminate = std::abs(out.margin) <= kMarginTol;
    return out;
}

}  // namespace

NullspaceBasis nullspace_basis(const Matrix& a) {
    if (a.rows() > a.cols()) throw RankDeficientError("null space: more rows than columns");
    NullspaceBasis out;
    if (a.rows() == 0) {
        out.basis = Matrix::Identity(a.cols(), a.cols());
        return out;
    }
    const Matrix at = a.transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(at);
    if (qr.rank() < a.rows()) throw RankDeficientError("null space: A lacks full row rank");
    const Matrix q = qr.householderQ();
    out.basis = q.rightCols(a.cols() - a.rows());
    return out;
}

SupportPattern pattern_from_signal(const BlockSignal& signal) {
    SupportPattern p;
    p.kappa = signal.support();
    for (int i : p.kappa) p.directions.push_back(signal.block(i).normalized());
    return p;
}

Matrix sphere_grid(int p, int resolution) {
    require_small(p);
    if (p < 1) return Matrix(0, 0);
    if (p == 1) {
        Matrix g(1, 2);
        g << 1.0, -1.0;
        return g;
    }
    if (resolution < 1) throw DomainError("sphere grid: resolution must be >= 1");
    Matrix g(p, resolution);
    if (p == 2) {
        for (int j = 0; j < resolution; ++j) {
            const double angle = 2.0 * std::numbers::pi * j / resolution;
            g(0, j) = std::cos(angle);
            g(1, j) = std::sin(angle);
        }
        return g;
    }
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < resolution; ++j) {
        const double z = 1.0 - (2.0 * j + 1.0) / resolution;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * j;
        g(0, j) = r * std::cos(phi);
        g(1, j) = r * std::sin(phi);
        g(2, j) = z;
    }
    return g;
}

double grid_spacing(int p, int resolution) {
    if (p == 2) return 2.0 * std::numbers::pi / resolution;
    if (p == 3) return std::sqrt(4.0 * std::numbers::pi / resolution);
    return 0.0;
}

int default_resolution(int p) { return p >= 3 ? 100'000 : 10'000; }

CheckResult check_strong(const NullspaceBasis& basis, const BlockDims& dims, int resolution) {
    if (basis.basis.rows() != dims.ambient()) {
        throw Error(ErrorCode::kDimensionMismatch, "check_strong: basis does not match dims");
    }
    const int k = dims.k;
    return scan(basis, dims.d, resolution, [k](const Vector& norms, const Vector&) {
        std::vector<double> sorted(norms.data(), norms.data() + norms.size());
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double top = 0.0;
        double rest = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) (static_cast<int>(i) < k ? top : rest) += sorted[i];
        return rest - top;
    });
}

CheckResult check_sectional(const NullspaceBasis& basis, int d, const SupportPattern& pattern,
                            int resolution) {
    const int n = static_cast<int>(basis.basis.rows() / d);
    validate_pattern(pattern, n, d, false);
    std::vector<char> in_support(n, 0);
    for (int i : pattern.kappa) in_support[i] = 1;
    return scan(basis, d, resolution, [&](const Vector& norms, const Vector&) {
        double inside = 0.0;
        double outside = 0.0;
        for (int i = 0; i < n; ++i) (in_support[i] ? inside : outside) += norms[i];
        return outside - inside;
    });
}

CheckResult check_weak(const NullspaceBasis& basis, int d, const SupportPattern& pattern,
                       int resolution) {
    const int n = static_cast<int>(basis.basis.rows() / d);
    validate_pattern(pattern, n, d, true);
    std::vector<char> in_support(n, 0);
    for (int i : pattern.kappa) in_support[i] = 1;
    return scan(basis, d, resolution, [&](const Vector& norms, const Vector& w) {
        double aligned = 0.0;
        for (std::size_t j = 0; j < pattern.kappa.size(); ++j) {
            const int i = pattern.kappa[j];
            aligned -= pattern.directions[j].dot(w.segment(static_cast<Eigen::Index>(i) * d, d));
        }
        double outside = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!in_support[i]) outside += norms[i];
        }
        return outside - aligned;
    });
}

CrossValidation cross_validate(const BlockDims& dims, int trials, std::uint64_t seed,
                               int resolution, const solver::SolverConfig& config, int workers) {
    dims.validate();
    require_small(dims.d * (dims.n - dims.m));
    if (trials < 1) throw DomainError("cross validation: trials must be >= 1");

    struct Outcome {
        bool success = false;
        CheckResult check;
    };
    std::vector<Outcome> outcomes(trials);
    detail::parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
        const auto inst = experiment::generate_instance(dims, seed ^ static_cast<std::uint64_t>(t));
        const auto report = solver::solve_l2l1(inst, config);
        outcomes[t].success =
            solver::recovery_success(report.estimate, inst.planted, config.success_tol);
        const auto basis = nullspace_basis(inst.matrix);
        outcomes[t].check =
            check_weak(basis, dims.d, pattern_from_signal(inst.planted), resolution);
    });

    const double boundary = 10.0 * grid_spacing(dims.d * (dims.n - dims.m), resolution);
    CrossValidation cv;
    cv.trials = trials;
    for (const auto& o : outcomes) {
        cv.solver_successes += o.success;
        cv.oracle_holds += o.check.holds;
        cv.indeterminate += o.check.indeterminate;
        if (o.success == o.check.holds) {
            ++cv.agreements;
        } else {
            ++cv.disagreements;
            if (std::abs(o.check.margin) < boundary || o.check.indeterminate) {
                ++cv.boundary_disagreements;
            }
        }
    }
    return cv;
}

}  // namespace bsr::oracle
