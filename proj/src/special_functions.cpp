#include "bsr/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bsr/errors.hpp"

namespace bsr::special {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxSeriesTerms = 1'000'000;
constexpr double kInverseResidualTol = 1e-13;

void require_shape(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        std::ostringstream os;
        os << "incomplete gamma: shape must be positive and finite, got " << shape;
        throw DomainError(os.str());
    }
}

void require_dof(int d) {
    if (d < 1) {
        std::ostringstream os;
        os << "chi distribution: degrees of freedom must be >= 1, got " << d;
        throw DomainError(os.str());
    }
}

// lgamma(a) - [(a - 1/2) log a - a + log(2 pi) / 2], asymptotic series for a >= 10.
double stirling_remainder(double a) {
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 -
                  inv2 * (1.0 / 360.0 -
                          inv2 * (1.0 / 1260.0 -
                                  inv2 * (1.0 / 1680.0 -
                                          inv2 * (1.0 / 1188.0 - inv2 * (691.0 / 360360.0))))));
}

// log(x^a e^-x / Gamma(a)). For large a the naive form cancels several
// thousand against each other; the Stirling split keeps it near ulp accuracy.
double log_prefactor(double a, double x) {
    if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
    const double t = (x - a) / a;
    return a * (std::log1p(t) - t) + 0.5 * std::log(a / (2.0 * std::numbers::pi)) -
           stirling_remainder(a);
}

// P(a, x) by the power series; valid and fast for x < a + 1.
double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxSeriesTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(log_prefactor(a, x));
        }
    }
    throw NonConvergenceError("incomplete gamma series did not converge");
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); x >= a + 1.
double upper_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxSeriesTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            return std::exp(log_prefactor(a, x)) * h;
        }
    }
    throw NonConvergenceError("incomplete gamma continued fraction did not converge");
}

// Density of the Gamma(a, 1) distribution at x > 0.
double gamma_density(double a, double x) { return std::exp(log_prefactor(a, x) - std::log(x)); }

// Rough standard normal upper quantile for tail mass t <= 0.5 (rational
// approximation, |error| < 5e-3); only used to seed the Newton iteration.
double approx_normal_upper_quantile(double tail) {
    const double t = std::sqrt(-2.0 * std::log(tail));
    return t - (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481));
}

// Initial guess for the gamma quantile. `mass` (<= 0.5) is the lower tail
// when !upper, the upper tail otherwise.
double initial_guess(double a, double mass, bool upper) {
    if (a > 1.0) {
        // P(a, x) <= x^a / Gamma(a + 1), so this never exceeds the root.
        const double power_guess = std::exp((std::log(mass) + std::lgamma(a + 1.0)) / a);
        if (!upper && mass < 1e-6) return power_guess;
        // Wilson-Hilferty cube-root normal approximation.
        double z = approx_normal_upper_quantile(std::max(mass, kTiny));
        if (!upper) z = -z;
        const double c = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
        const double wh = std::max(1e-3, a * c * c * c);
        return upper ? wh : std::max(wh, power_guess);
    }
    const double lower = upper ? 1.0 - mass : mass;
    const double t = 1.0 - a * (0.253 + a * 0.12);
    if (lower < t) return std::pow(lower / t, 1.0 / a);
    const double upper_mass = upper ? mass : 1.0 - mass;
    return 1.0 - std::log(upper_mass / (1.0 - t));
}

// Solves P(a, x) = mass (upper == false) or Q(a, x) = mass (upper == true)
// with a Halley-corrected Newton iteration safeguarded by a bracket.
double invert(double a, double mass, bool upper) {
    // residual(x) is increasing in x and vanishes at the root.
    auto residual = [&](double x) {
        return upper ? mass - reg_inc_gamma_upper(a, x) : reg_inc_gamma(a, x) - mass;
    };

    double lo = 0.0;
    double hi = std::max(2.0 * initial_guess(a, mass, upper), a + 1.0);
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NonConvergenceError("gamma quantile bracket overflow");
    }

    double x = std::clamp(initial_guess(a, mass, upper), lo, hi);
    if (x <= 0.0) x = 0.5 * hi;
    double r = residual(x);

    for (int iter = 0; iter < 1000; ++iter) {
        if (r == 0.0) return x;
        if (r < 0.0) {
            lo = x;
        } else {
            hi = x;
        }

        const double density = gamma_density(a, x);
        double next = x;
        if (density > 0.0 && std::isfinite(density)) {
            const double u = r / density;
            // d(log density)/dx = (a-1)/x - 1 gives the Halley correction.
            const double halley = 1.0 - 0.5 * std::min(1.0, u * ((a - 1.0) / x - 1.0));
            next = x - u / halley;
        }
        if (!(next > lo && next < hi)) {
            next = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        }
        const double step = std::abs(next - x);
        x = next;
        r = residual(x);
        if (step <= 4.0 * kEps * x || hi - lo <= 4.0 * kEps * hi) break;
    }

    if (!(std::abs(r) <= kInverseResidualTol)) {
        std::ostringstream os;
        os << "gamma quantile did not converge: shape=" << a << (upper ? " q=" : " p=") << mass
           << " residual=" << r;
        throw NonConvergenceError(os.str());
    }
    return x;
}

// E[H^power ; H > t] / normalization for H ~ chi(d), where t^2 / 2 = x:
// scale * Q((d + power) / 2, x).
double tail_moment(int d, int power, double x) {
    const double half = 0.5 * d;
    if (power == 1) return chi_mean(d) * reg_inc_gamma_upper(half + 0.5, x);
    // 2 Gamma((d + 2)/2) / Gamma(d/2) = d exactly.
    return static_cast<double>(d) * reg_inc_gamma_upper(half + 1.0, x);
}

double trunc_mean(int d, int power, double mass, bool mass_is_lower) {
    require_dof(d);
    mass = clamp_unit(mass, mass_is_lower ? "lower mass" : "theta");
    const double theta = mass_is_lower ? 1.0 - mass : mass;
    if (theta == 0.0) return 0.0;
    if (mass_is_lower ? mass == 0.0 : theta == 1.0) {
        return power == 1 ? chi_mean(d) : static_cast<double>(d);
    }
    const double half = 0.5 * d;
    const double x = mass_is_lower ? inv_reg_inc_gamma(half, mass)
                                   : inv_reg_inc_gamma_upper(half, theta);
    return tail_moment(d, power, x);
}

}  // namespace

double clamp_unit(double value, const char* what) {
    constexpr double kSlack = 1e-12;
    if (!(value >= -kSlack && value <= 1.0 + kSlack)) {
        std::ostringstream os;
        os << what << " must lie in [0, 1], got " << value;
        throw DomainError(os.str());
    }
    return std::clamp(value, 0.0, 1.0);
}

double reg_inc_gamma(double shape, double x) {
    require_shape(shape);
    if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < shape + 1.0) return lower_series(shape, x);
    return 1.0 - upper_continued_fraction(shape, x);
}

double reg_inc_gamma_upper(double shape, double x) {
    require_shape(shape);
    if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < shape + 1.0) return 1.0 - lower_series(shape, x);
    return upper_continued_fraction(shape, x);
}

double inv_reg_inc_gamma(double shape, double p) {
    require_shape(shape);
    if (!(p >= 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "inverse incomplete gamma: p must lie in [0, 1), got " << p;
        throw DomainError(os.str());
    }
    if (p == 0.0) return 0.0;
    // Invert whichever tail is smaller; 1 - p is exact for p > 0.5.
    if (p > 0.5) return invert(shape, 1.0 - p, true);
    return invert(shape, p, false);
}

double inv_reg_inc_gamma_upper(double shape, double q) {
    require_shape(shape);
    if (!(q > 0.0 && q <= 1.0)) {
        std::ostringstream os;
        os << "inverse upper incomplete gamma: q must lie in (0, 1], got " << q;
        throw DomainError(os.str());
    }
    if (q == 1.0) return 0.0;
    if (q > 0.5) return invert(shape, 1.0 - q, false);
    return invert(shape, q, true);
}

double chi_inv_cdf(int d, double p) {
    require_dof(d);
    return std::sqrt(2.0 * inv_reg_inc_gamma(0.5 * d, p));
}

double chi_mean(int d) {
    require_dof(d);
    return std::numbers::sqrt2 * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

double chi_upper_trunc_mean(int d, double theta) { return trunc_mean(d, 1, theta, false); }

double chisq_upper_trunc_mean(int d, double theta) { return trunc_mean(d, 2, theta, false); }

double chi_upper_trunc_mean_lower(int d, double lower_mass) {
    return trunc_mean(d, 1, lower_mass, true);
}

double chisq_upper_trunc_mean_lower(int d, double lower_mass) {
    return trunc_mean(d, 2, lower_mass, true);
}

}  // namespace bsr::special
