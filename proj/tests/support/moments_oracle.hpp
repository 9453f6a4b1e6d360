#pragma once

#include <cstdint>
#include <vector>

// Independent references for the chi-distribution quantities, built only on
// Boost.Math and direct simulation.
namespace bsr::testing {

/// Quantile of chi(d) from boost::math::gamma_p_inv.
double boost_chi_quantile(int d, double p);

/// E[H ; H > q] and E[H^2 ; H > q] with q the (1 - theta) quantile of chi(d),
/// by adaptive Gauss-Kronrod quadrature of the chi density.
double quad_chi_upper_trunc_mean(int d, double theta);
double quad_chisq_upper_trunc_mean(int d, double theta);

/// `count` i.i.d. chi(d) draws (norms of d standard normals), sorted descending.
std::vector<double> chi_samples_desc(int d, long count, std::uint64_t seed);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// (1/N) sum of the round(theta N) largest samples (power 1) or of their
/// squares (power 2), with the standard error of the per-sample indicator
/// contributions.
McEstimate mc_top_fraction(const std::vector<double>& sorted_desc, double theta, int power);

}  // namespace bsr::testing
