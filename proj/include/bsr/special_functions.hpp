#pragma once

// Regularized incomplete gamma function, its inverse, chi quantiles and the
// truncated chi / chi-square moments the threshold equations are built from.
//
// Argument order is always (shape, x). In the literature the regularized lower
// incomplete gamma is often written gamma_inc(x, shape); here that value is
// reg_inc_gamma(shape, x) = (1 / Gamma(shape)) * int_0^x t^(shape-1) e^(-t) dt.
//
// All functions are pure and reentrant.

namespace bsr::special {

/// Lower regularized incomplete gamma P(shape, x).
double reg_inc_gamma(double shape, double x);

/// Upper regularized incomplete gamma Q(shape, x) = 1 - P(shape, x), computed
/// directly so that small upper tails keep full relative precision.
double reg_inc_gamma_upper(double shape, double x);

/// x such that P(shape, x) = p. Requires 0 <= p < 1.
double inv_reg_inc_gamma(double shape, double p);

/// x such that Q(shape, x) = q. Requires 0 < q <= 1.
double inv_reg_inc_gamma_upper(double shape, double q);

/// Quantile of the chi distribution with d degrees of freedom:
/// sqrt(2 * inv_reg_inc_gamma(d / 2, p)).
double chi_inv_cdf(int d, double p);

/// E||g||_2 for g ~ N(0, I_d): sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
double chi_mean(int d);

/// Limit of (1/n) E(sum of the theta*n largest of n i.i.d. chi(d) variables),
/// i.e. E[H ; H > F^-1(1 - theta)] for H ~ chi(d).
double chi_upper_trunc_mean(int d, double theta);

/// Limit of (1/n) E(sum of squares of the theta*n largest chi(d) variables),
/// i.e. E[H^2 ; H > F^-1(1 - theta)]. Equals d at theta = 1.
double chisq_upper_trunc_mean(int d, double theta);

// The same two moments parametrized by the complementary mass
// lower_mass = 1 - theta. Use these when theta is within rounding of 1; the
// quantile is then computed from the lower tail without cancellation.
double chi_upper_trunc_mean_lower(int d, double lower_mass);
double chisq_upper_trunc_mean_lower(int d, double lower_mass);

/// Validates a probability-like argument: values within 1e-12 of [0, 1] are
/// clamped, anything further out raises DomainError naming `what`.
double clamp_unit(double value, const char* what);

}  // namespace bsr::special
