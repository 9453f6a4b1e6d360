#pragma once

#include <cstdint>
#include <vector>

#include "bsr/block_types.hpp"
#include "bsr/recovery_solver.hpp"

namespace bsr::oracle {

/// Orthonormal basis of ker(A), one column per dimension.
struct NullspaceBasis {
    Matrix basis;  // dn x p
    int dim() const { return static_cast<int>(basis.cols()); }
};

/// Throws RankDeficientError unless A has full row rank.
NullspaceBasis nullspace_basis(const Matrix& a);

/// Block support kappa (0-based block indices) and, for the weak condition,
/// one unit direction per support block.
struct SupportPattern {
    std::vector<int> kappa;
    std::vector<Vector> directions;  // empty, or one per entry of kappa
};

/// Support and normalized block directions of a planted signal.
SupportPattern pattern_from_signal(const BlockSignal& signal);

inline constexpr double kMarginTol = 1e-9;
inline constexpr int kMaxNullspaceDim = 3;

/// Outcome of a grid search over the unit sphere of the null space.
///
/// margin = min over grid points of (right side - left side) of the
/// null-space inequality. The condition holds when margin > 1e-9 and is
/// boundary-indeterminate when |margin| <= 1e-9.
struct CheckResult {
    bool holds = true;
    bool indeterminate = false;
    double margin = 0.0;
    Vector witness;  // grid point attaining the margin (empty when p == 0)
    long points = 0;
};

/// Unit vectors in R^p covering the sphere: {+1, -1} for p = 1, `resolution`
/// equispaced angles for p = 2, a `resolution`-point Fibonacci lattice for
/// p = 3. Columns of the result. Throws DimensionTooLargeError for p > 3.
Matrix sphere_grid(int p, int resolution);

/// Angular spacing of sphere_grid (0 for p <= 1).
double grid_spacing(int p, int resolution);

/// For every grid w: sum of the k largest block norms < sum of the others.
CheckResult check_strong(const NullspaceBasis& basis, const BlockDims& dims, int resolution);

/// For every grid w: sum over kappa of ||W_i|| < sum over kappa^c of ||W_i||.
CheckResult check_sectional(const NullspaceBasis& basis, int d, const SupportPattern& pattern,
                            int resolution);

/// For every grid w: -sum over kappa of <u_i, W_i> < sum over kappa^c of ||W_i||
/// with u_i the fixed unit directions. Throws ErrorCode::kMissingDirections
/// when the pattern carries no directions.
CheckResult check_weak(const NullspaceBasis& basis, int d, const SupportPattern& pattern,
                       int resolution);

/// Default grid resolution for a null-space dimension (10^4 circle points,
/// 10^5 sphere points).
int default_resolution(int p);

struct CrossValidation {
    int trials = 0;
    int agreements = 0;
    int disagreements = 0;
    int boundary_disagreements = 0;  // disagreements with |margin| < 10 * spacing
    int indeterminate = 0;           // |margin| <= 1e-9
    int solver_successes = 0;
    int oracle_holds = 0;
    double agreement_rate() const { return trials ? double(agreements) / trials : 0.0; }
};

/// Generates `trials` instances of the given dims (seeds seed ^ t), solves each
/// and compares recovery success with check_weak on the planted pattern.
CrossValidation cross_validate(const BlockDims& dims, int trials, std::uint64_t seed,
                               int resolution, const solver::SolverConfig& config,
                               int workers = 1);

}  // namespace bsr::oracle
