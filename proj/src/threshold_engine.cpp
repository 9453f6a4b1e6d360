#include "bsr/threshold_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bsr/errors.hpp"
#include "bsr/special_functions.hpp"

namespace bsr::threshold {
namespace {

namespace sf = bsr::special;

constexpr int kScanPoints = 1000;
constexpr double kRootTol = 1e-10;
constexpr double kBetaTol = 1e-6;

void require_inputs(double beta, int d, double epsilon) {
    if (d < 1) throw DomainError("block length d must be >= 1");
    if (!(beta >= 0.0 && beta < 1.0)) {
        std::ostringstream os;
        os << "beta must lie in [0, 1), got " << beta;
        throw DomainError(os.str());
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
}

// Lower-tail mass at which the incomplete-gamma inverse is evaluated for a
// given delta: delta itself for strong, delta / (1 - beta) otherwise.
double tail_mass(Kind kind, double beta, double delta) {
    return kind == Kind::kStrong ? delta : delta / (1.0 - beta);
}

// Numerator of the dual objective per n: E(sum over the blocks above the
// cut) minus what the support contributes, as a function of delta.
double numerator(Kind kind, double beta, int d, double delta) {
    switch (kind) {
        case Kind::kStrong:
            return sf::chi_upper_trunc_mean_lower(d, delta) -
                   2.0 * sf::chi_upper_trunc_mean(d, beta);
        case Kind::kSectional:
            return (1.0 - beta) * sf::chi_upper_trunc_mean_lower(d, delta / (1.0 - beta)) -
                   sf::chi_mean(d) * beta;
        case Kind::kWeak:
            return (1.0 - beta) * sf::chi_upper_trunc_mean_lower(d, delta / (1.0 - beta));
    }
    return 0.0;
}

struct ScanPoint {
    double delta;
    double value;
};

}  // namespace

std::string_view to_string(Kind kind) {
    switch (kind) {
        case Kind::kStrong: return "strong";
        case Kind::kSectional: return "sectional";
        case Kind::kWeak: return "weak";
    }
    return "unknown";
}

std::optional<Kind> parse_kind(std::string_view text) {
    if (text == "strong") return Kind::kStrong;
    if (text == "sectional") return Kind::kSectional;
    if (text == "weak") return Kind::kWeak;
    return std::nullopt;
}

double theta_equation_lower(Kind kind, double beta, int d, double epsilon, double delta) {
    require_inputs(beta, d, epsilon);
    if (!(delta >= 0.0 && delta < 1.0 - beta)) {
        std::ostringstream os;
        os << "theta equation: theta = 1 - " << delta << " must lie in (beta, 1]";
        throw DomainError(os.str());
    }
    const double quantile_mass = (1.0 + epsilon) * tail_mass(kind, beta, delta);
    if (!(quantile_mass < 1.0)) {
        std::ostringstream os;
        os << "theta equation: incomplete gamma inverse argument " << quantile_mass
           << " outside [0, 1)";
        throw DomainError(os.str());
    }
    const double theta = 1.0 - delta;
    const double quantile = std::sqrt(2.0 * sf::inv_reg_inc_gamma(0.5 * d, quantile_mass));
    return (1.0 - epsilon) * numerator(kind, beta, d, delta) / theta - quantile;
}

double theta_equation(Kind kind, double beta, int d, double epsilon, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("theta must lie in (0, 1]");
    return theta_equation_lower(kind, beta, d, epsilon, 1.0 - theta);
}

double width_alpha(Kind kind, double beta, int d, double delta) {
    require_inputs(beta, d, 0.0);
    if (!(delta >= 0.0 && delta <= 1.0 - beta)) throw DomainError("delta must lie in [0, 1 - beta]");
    const double theta = 1.0 - delta;
    const double n = numerator(kind, beta, d, delta);
    double squares = 0.0;
    if (kind == Kind::kStrong) {
        squares = sf::chisq_upper_trunc_mean_lower(d, delta);
    } else {
        squares = (1.0 - beta) * sf::chisq_upper_trunc_mean_lower(d, delta / (1.0 - beta)) +
                  beta * d;
    }
    return (squares - n * n / theta) / d;
}

Result solve_theta(Kind kind, double beta, int d, double epsilon) {
    require_inputs(beta, d, epsilon);

    // Scan theta_i = beta + (1 - beta) i / N, i = 1..N, in delta form. Points
    // where (1 + eps) * mass >= 1 lie outside the domain and are skipped.
    std::vector<ScanPoint> scan;
    scan.reserve(kScanPoints);
    for (int i = 1; i <= kScanPoints; ++i) {
        const double delta = (1.0 - beta) * (1.0 - static_cast<double>(i) / kScanPoints);
        if (!((1.0 + epsilon) * tail_mass(kind, beta, delta) < 1.0)) continue;
        scan.push_back({delta, theta_equation_lower(kind, beta, d, epsilon, delta)});
    }

    Result result;
    int bracket = -1;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        const double a = scan[i].value;
        const double b = scan[i + 1].value;
        if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
            ++result.root_count;
            bracket = static_cast<int>(i);
        }
    }

    if (bracket < 0) {
        bool all_positive = !scan.empty();
        for (const auto& p : scan) all_positive = all_positive && p.value > 0.0;
        if (beta == 0.0 && all_positive) {
            // E[H | H > q] - q > 0 for every finite q: the equation reaches zero
            // only as theta -> 0, where the width expression tends to 0.
            result.theta_hat = 0.0;
            result.delta_hat = 1.0;
            result.required_alpha = 0.0;
            result.residual = scan.front().value;
            result.boundary_limit = true;
            return result;
        }
        std::ostringstream os;
        os << to_string(kind) << " theta equation has no sign change on (beta, 1] for beta="
           << beta << " d=" << d << " epsilon=" << epsilon;
        throw NoRootError(os.str());
    }

    // The last bracket is nearest theta = 1, i.e. the largest root.
    // In delta: scan[bracket].delta > scan[bracket + 1].delta.
    double hi_delta = scan[bracket].delta;
    double lo_delta = scan[bracket + 1].delta;
    double lo_value = scan[bracket + 1].value;
    double best_delta = lo_delta;
    double best_value = lo_value;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo_delta + hi_delta);
        if (mid <= lo_delta || mid >= hi_delta) break;
        const double value = theta_equation_lower(kind, beta, d, epsilon, mid);
        if (std::abs(value) < std::abs(best_value)) {
            best_delta = mid;
            best_value = value;
        }
        if (value == 0.0) break;
        if ((value > 0.0) == (lo_value > 0.0)) {
            lo_delta = mid;
            lo_value = value;
        } else {
            hi_delta = mid;
        }
    }

    // delta <= 1 - beta keeps the top-beta tail inside the top-theta tail.
    if (best_delta > 1.0 - beta) throw DomainError("solved theta fell below beta");

    result.delta_hat = best_delta;
    result.theta_hat = 1.0 - best_delta;
    result.residual = best_value;
    result.converged = std::abs(best_value) < kRootTol;
    return result;
}

Result required_alpha(Kind kind, double beta, int d, double epsilon) {
    Result r;
    try {
        r = solve_theta(kind, beta, d, epsilon);
    } catch (const NoRootError&) {
        // The numerator peaks at theta = 1. When even that is <= 0 the optimal
        // multiplier is 0 and the bound degenerates to the trivial alpha = 1.
        if (numerator(kind, beta, d, 0.0) > 0.0) throw;
        r.required_alpha = 1.0;
        r.saturated = true;
        return r;
    }
    if (!r.boundary_limit) r.required_alpha = width_alpha(kind, beta, d, r.delta_hat);
    return r;
}

BetaThreshold threshold_beta(Kind kind, double alpha, int d, double epsilon) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "alpha must lie in (0, 1], got " << alpha;
        throw DomainError(os.str());
    }
    auto certify = [&](double beta) -> std::optional<Result> {
        try {
            Result r = required_alpha(kind, beta, d, epsilon);
            if (r.required_alpha < alpha) return r;
        } catch (const NoRootError&) {
        }
        return std::nullopt;
    };

    BetaThreshold out;
    auto at_zero = certify(0.0);
    if (!at_zero) return out;
    out.certified = true;
    out.at = *at_zero;

    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > kBetaTol) {
        const double mid = 0.5 * (lo + hi);
        if (auto r = certify(mid)) {
            lo = mid;
            out.at = *r;
        } else {
            hi = mid;
        }
    }
    out.beta = lo;
    return out;
}

double asymptotic_required_alpha(Kind kind, double beta) {
    beta = sf::clamp_unit(beta, "beta");
    if (kind == Kind::kWeak) return beta * (2.0 - beta);
    return 4.0 * beta * (1.0 - beta);
}

double asymptotic_threshold_beta(Kind kind, double alpha) {
    alpha = sf::clamp_unit(alpha, "alpha");
    const double root = std::sqrt(1.0 - alpha);
    if (kind == Kind::kWeak) return 1.0 - root;
    return 0.5 * (1.0 - root);
}

double simplified_required_alpha(Kind kind, double beta, int d) {
    require_inputs(beta, d, 0.0);
    const double mean = sf::chi_mean(d);
    const double mean_sq_over_d = mean * mean / d;
    double factor = 0.0;
    switch (kind) {
        case Kind::kStrong:
            factor = 1.0 - 2.0 * sf::chi_upper_trunc_mean(d, beta) / mean;
            break;
        case Kind::kSectional: factor = 1.0 - 2.0 * beta; break;
        case Kind::kWeak: factor = 1.0 - beta; break;
    }
    // The closed form needs a nonnegative multiplier; past that point the
    // best feasible choice is 0 and the bound is the trivial alpha = 1.
    factor = std::max(factor, 0.0);
    return 1.0 - factor * factor * mean_sq_over_d;
}

double slack_psi(Kind kind, double beta, int d, const Result& solved) {
    if (solved.boundary_limit) return 0.0;
    return numerator(kind, beta, d, solved.delta_hat);
}

GaussianWidthBound escape_bound(long dm, double width, double constant) {
    if (dm < 1) throw DomainError("dm must be >= 1");
    if (constant != kGordonConstant && constant != kGordonConstantImproved) {
        throw DomainError("escape bound constant must be 3.5 or 2.5");
    }
    const double root = std::sqrt(static_cast<double>(dm));
    const double limit = root - 1.0 / (4.0 * root);
    if (!(width >= 0.0 && width < limit)) {
        std::ostringstream os;
        os << "escape bound requires 0 <= width < " << limit << ", got " << width;
        throw Error(ErrorCode::kPrecondition, os.str());
    }
    const double gap = limit - width;
    GaussianWidthBound out;
    out.dm = dm;
    out.width = width;
    out.constant = constant;
    out.probability_lower_bound = std::max(0.0, 1.0 - constant * std::exp(-gap * gap / 18.0));
    return out;
}

double escape_prob_lower_bound(long dm, double width, double constant) {
    return escape_bound(dm, width, constant).probability_lower_bound;
}

double finite_n_slack(long n, double delta, double psi, double epsilon) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
    if (!(psi > 0.0)) throw DomainError("psi must be positive");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    const double nn = static_cast<double>(n);
    return std::sqrt(nn) * (std::exp(-nn * epsilon * epsilon * delta / (2.0 * (1.0 + epsilon))) +
                            std::exp(-epsilon * epsilon * psi * psi * nn / 2.0));
}

}  // namespace bsr::threshold
