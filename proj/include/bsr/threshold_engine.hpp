#pragma once

#include <optional>
#include <string_view>

namespace bsr::threshold {

/// Which recovery guarantee a threshold refers to.
///  - strong: every k-block-sparse signal is recovered;
///  - sectional: every signal with one fixed block support is recovered;
///  - weak: one signal with fixed support and fixed block directions.
enum class Kind { kStrong, kSectional, kWeak };

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view text);

struct Query {
    Kind kind = Kind::kWeak;
    int d = 1;
    double beta = 0.0;
    double epsilon = 0.0;
};

/// Outcome of solving the stationarity equation for theta and evaluating the
/// width expression there.
///
/// `delta_hat` = 1 - theta_hat is kept separately because the optimal theta
/// is frequently within 1e-12 of 1, where theta itself carries no digits.
struct Result {
    double theta_hat = 1.0;
    double delta_hat = 0.0;
    double required_alpha = 0.0;
    bool converged = false;
    double residual = 0.0;
    int root_count = 0;
    // Set when beta == 0 and the equation only vanishes in the limit
    // theta -> 0. theta_hat is then 0 and required_alpha its limit, 0.
    bool boundary_limit = false;
    // Set by required_alpha when the numerator is <= 0 for every theta (for
    // instance strong with beta near 1/2): no theta root exists and the bound
    // is the trivial alpha = 1. theta_hat is reported as 1.
    bool saturated = false;
};

/// Left-hand side of the theta equation for the given kind. Zero at the
/// optimal theta. Throws DomainError when an incomplete-gamma-inverse
/// argument leaves [0, 1).
double theta_equation(Kind kind, double beta, int d, double epsilon, double theta);

/// Same equation parametrized by delta = 1 - theta.
double theta_equation_lower(Kind kind, double beta, int d, double epsilon, double delta);

/// (1/d) times the squared-width bound evaluated at theta = 1 - delta.
double width_alpha(Kind kind, double beta, int d, double delta);

/// Finds theta_hat by a 1000-point sign-change scan over (beta, 1] followed by
/// bisection on the root closest to theta = 1. Throws NoRootError when the
/// scan has no sign change (except for the beta == 0 limit, see Result).
Result solve_theta(Kind kind, double beta, int d, double epsilon = 0.0);

/// Minimal alpha = m/n certified for block-sparsity beta = k/n. Returns the
/// saturated value 1 instead of NoRootError when no theta can improve on it.
Result required_alpha(Kind kind, double beta, int d, double epsilon = 0.0);
inline Result required_alpha(const Query& q) {
    return required_alpha(q.kind, q.beta, q.d, q.epsilon);
}

struct BetaThreshold {
    double beta = 0.0;
    // False when even beta -> 0 cannot be certified at this alpha.
    bool certified = false;
    Result at;
};

/// Largest beta (to 1e-6) whose required alpha is below `alpha`.
BetaThreshold threshold_beta(Kind kind, double alpha, int d, double epsilon = 0.0);

/// d -> infinity limits: 4 beta (1 - beta) for strong and sectional,
/// beta (2 - beta) for weak.
double asymptotic_required_alpha(Kind kind, double beta);

/// Inverse of asymptotic_required_alpha on the increasing branch.
double asymptotic_threshold_beta(Kind kind, double alpha);

/// Required alpha with theta_hat fixed at 1 (valid but suboptimal for finite d).
/// Saturates at 1 where the closed form would need a negative multiplier.
double simplified_required_alpha(Kind kind, double beta, int d);

/// Per-n expectation of the dual objective numerator at the solved theta
/// (the psi entering the finite-n slack).
double slack_psi(Kind kind, double beta, int d, const Result& solved);

inline constexpr double kGordonConstant = 3.5;
inline constexpr double kGordonConstantImproved = 2.5;

struct GaussianWidthBound {
    long dm = 1;
    double width = 0.0;
    double probability_lower_bound = 0.0;
    double constant = kGordonConstant;
};

/// Escape-through-a-mesh bound: a uniformly random d(n-m)-dimensional subspace
/// misses a set of Gaussian width `width` on the unit sphere of R^{dn} with
/// probability at least 1 - constant * exp(-(sqrt(dm) - 1/(4 sqrt(dm)) - width)^2 / 18).
/// Throws with ErrorCode::kPrecondition when the bound would be vacuous.
GaussianWidthBound escape_bound(long dm, double width, double constant = kGordonConstant);
double escape_prob_lower_bound(long dm, double width, double constant = kGordonConstant);

/// sqrt(n) (exp(-n eps^2 delta / (2 (1 + eps))) + exp(-eps^2 psi^2 n / 2)).
double finite_n_slack(long n, double delta, double psi, double epsilon);

}  // namespace bsr::threshold
