// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [--only N]   (N = 1..8, runs a single criterion)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bsr/errors.hpp"
#include "bsr/experiment_harness.hpp"
#include "bsr/oracle_checker.hpp"
#include "bsr/recovery_solver.hpp"
#include "bsr/special_functions.hpp"
#include "bsr/threshold_engine.hpp"
#include "support/moments_oracle.hpp"
#include "support/reference_solver.hpp"

namespace sf = bsr::special;
namespace th = bsr::threshold;
namespace ex = bsr::experiment;
using th::Kind;

namespace {

constexpr Kind kKinds[] = {Kind::kStrong, Kind::kSectional, Kind::kWeak};

// Collects the first few violations of a criterion for the report line.
struct Outcome {
    int checks = 0;
    int failures = 0;
    std::string detail;
    std::string first_failures;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        if (++failures <= 3) first_failures += (first_failures.empty() ? "" : "; ") + what;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string name(Kind k) { return std::string(th::to_string(k)); }

// ---- 1 -------------------------------------------------------------------

Outcome large_d_limits() {
    Outcome o;
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
        const double strong = th::threshold_beta(Kind::kStrong, alpha, 500).beta;
        const double weak = th::threshold_beta(Kind::kWeak, alpha, 500).beta;
        const double strong_limit = (1.0 - std::sqrt(1.0 - alpha)) / 2.0;
        const double weak_limit = 1.0 - std::sqrt(1.0 - alpha);
        worst = std::max({worst, std::abs(strong - strong_limit), std::abs(weak - weak_limit)});
        o.expect(std::abs(strong - strong_limit) <= 0.03,
                 fmt("strong a=%.1f %.4f vs %.4f", alpha, strong, strong_limit));
        o.expect(std::abs(weak - weak_limit) <= 0.03,
                 fmt("weak a=%.1f %.4f vs %.4f", alpha, weak, weak_limit));
    }
    o.detail = fmt("max |beta(d=500) - limit| = %.4f (tol 0.03)", worst);
    return o;
}

// ---- 2 -------------------------------------------------------------------

Outcome gamma_identities() {
    Outcome o;
    double worst_round_trip = 0.0;
    for (double a : {0.5, 1.0, 2.5, 7.5, 50.0}) {
        for (double p : {0.0, 1e-6, 0.01, 0.5, 0.99, 1.0 - 1e-6}) {
            const double r = std::abs(sf::reg_inc_gamma(a, sf::inv_reg_inc_gamma(a, p)) - p);
            worst_round_trip = std::max(worst_round_trip, r);
            o.expect(r < 1e-12, fmt("round trip a=%g p=%g: %.2e", a, p, r));
        }
    }
    double worst_full = 0.0;
    for (int d : {1, 2, 15, 100, 1000}) {
        const double e = std::abs(sf::chisq_upper_trunc_mean(d, 1.0) - d);
        worst_full = std::max(worst_full, e);
        o.expect(e < 1e-10, fmt("chisq(%d, 1) off by %.2e", d, e));
    }
    o.detail = fmt("round trip %.1e (tol 1e-12), chisq(d,1)-d %.1e (tol 1e-10)", worst_round_trip,
                   worst_full);
    return o;
}

// ---- 3 -------------------------------------------------------------------

Outcome truncated_moments() {
    Outcome o;
    double worst = 0.0;
    for (int d : {1, 3, 15}) {
        const auto samples = bsr::testing::chi_samples_desc(d, 1'000'000, 1000 + d);
        for (double theta : {0.1, 0.5, 0.9}) {
            for (int power : {1, 2}) {
                const auto mc = bsr::testing::mc_top_fraction(samples, theta, power);
                const double v = power == 1 ? sf::chi_upper_trunc_mean(d, theta)
                                            : sf::chisq_upper_trunc_mean(d, theta);
                const double z = std::abs(v - mc.mean) / mc.standard_error;
                worst = std::max(worst, z);
                o.expect(z <= 3.0, fmt("d=%d theta=%.1f power=%d: %.3f SE", d, theta, power, z));
            }
        }
    }
    o.detail = fmt("18 cases, 1e6 samples, max deviation %.2f SE (tol 3)", worst);
    return o;
}

// ---- 4 -------------------------------------------------------------------

Outcome threshold_invariants() {
    Outcome o;
    int ordering = 0;
    for (int d : {1, 3, 15, 50}) {
        for (int i = 1; i <= 9; ++i) {
            const double alpha = i / 10.0;
            const double s = th::threshold_beta(Kind::kStrong, alpha, d).beta;
            const double c = th::threshold_beta(Kind::kSectional, alpha, d).beta;
            const double w = th::threshold_beta(Kind::kWeak, alpha, d).beta;
            o.expect(s <= c + 1e-6 && c <= w + 1e-6,
                     fmt("ordering d=%d a=%.1f: %.5f %.5f %.5f", d, alpha, s, c, w));
            ++ordering;
        }
    }

    int resubstituted = 0;
    for (Kind k : kKinds) {
        for (int d : {1, 3, 15, 50}) {
            double prev = 0.0;
            for (int i = 0; i <= 49; ++i) {
                const double beta = 0.01 + 0.02 * i;
                const auto r = th::required_alpha(k, beta, d);
                o.expect(r.required_alpha >= prev - 1e-12,
                         fmt("%s d=%d not monotone at beta=%.2f", name(k).c_str(), d, beta));
                prev = r.required_alpha;
                if (r.converged && !r.saturated && !r.boundary_limit) {
                    const double res = th::theta_equation_lower(k, beta, d, 0.0, r.delta_hat);
                    o.expect(std::abs(res) < 1e-10,
                             fmt("%s d=%d beta=%.2f residual %.2e", name(k).c_str(), d, beta, res));
                    ++resubstituted;
                }
            }
        }
    }

    double worst_limit = 0.0;
    for (Kind k : kKinds) {
        for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
            double last = 0.0;
            for (int d : {1, 5, 15, 50, 200, 500}) last = th::threshold_beta(k, alpha, d).beta;
            const double limit = th::asymptotic_threshold_beta(k, alpha);
            worst_limit = std::max(worst_limit, std::abs(last - limit));
            o.expect(std::abs(last - limit) <= 0.03,
                     fmt("%s a=%.1f d=500 %.4f vs %.4f", name(k).c_str(), alpha, last, limit));
        }
    }

    for (Kind k : kKinds) {
        for (int d : {1, 5, 15, 50}) {
            for (double beta : {0.05, 0.1, 0.2, 0.3, 0.4}) {
                const double opt = th::required_alpha(k, beta, d).required_alpha;
                const double simple = th::simplified_required_alpha(k, beta, d);
                o.expect(simple >= opt - 1e-9, fmt("dominance %s d=%d beta=%.2f", name(k).c_str(),
                                                   d, beta));
                const double slack = th::required_alpha(k, beta, d, 0.01).required_alpha;
                o.expect(slack >= opt - 1e-9,
                         fmt("epsilon %s d=%d beta=%.2f", name(k).c_str(), d, beta));
            }
        }
    }
    o.detail = fmt("%d ordering, 600 monotonicity, %d re-substitution, 12 d-limit (max %.4f), "
                   "60 dominance, 60 epsilon checks",
                   ordering, resubstituted, worst_limit);
    return o;
}

// ---- 5 -------------------------------------------------------------------

Outcome anchor_cells() {
    Outcome o;
    const auto cfg = ex::load_experiment_config(std::string(BSR_CONFIG_DIR) + "/phase_grid_full.ini");
    const auto easy = ex::run_cell({100, 15, 10, 3}, 100, cfg.solver,
                                   ex::cell_seed(cfg.master_seed, 10, 3), 0);
    const auto hard = ex::run_cell({100, 15, 10, 7}, 100, cfg.solver,
                                   ex::cell_seed(cfg.master_seed, 10, 7), 0);
    o.expect(easy.failures <= 5, fmt("m=10 k=3: %d failures", easy.failures));
    o.expect(hard.failures >= 95, fmt("m=10 k=7: %d failures", hard.failures));
    o.detail = fmt("m=10 k=3 %d/100 failures (<= 5), k=7 %d/100 failures (>= 95)", easy.failures,
                   hard.failures);
    return o;
}

// ---- 6 -------------------------------------------------------------------

Outcome crossing_at_half() {
    Outcome o;
    auto crossing = ex::load_experiment_config(std::string(BSR_CONFIG_DIR) + "/crossing_m50.ini");
    crossing.output.clear();
    o.expect(crossing.trials >= 50 && crossing.k_lists.at(50) == std::vector<int>{25, 26, 27, 28, 29, 30, 31},
             "crossing config does not match the required sweep");
    const auto table = ex::run_grid(crossing);
    const double k_theory = 100.0 * th::threshold_beta(Kind::kWeak, 0.5, 15).beta;
    std::string fractions;
    for (const auto& c : table.cells) fractions += fmt(" %d:%d", c.k, c.failures);
    double k50 = NAN;
    try {
        k50 = ex::empirical_k50(table.cells);
    } catch (const bsr::Error& e) {
        o.expect(false, e.what());
    }
    o.expect(std::abs(k50 - k_theory) <= 4.0, fmt("|k50 - k*| = %.3f", std::abs(k50 - k_theory)));

    auto reduced = ex::load_experiment_config(std::string(BSR_CONFIG_DIR) + "/reduced_n40_d5.ini");
    reduced.output.clear();
    const auto start = std::chrono::steady_clock::now();
    const auto small = ex::run_grid(reduced);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double beta_w = th::threshold_beta(Kind::kWeak, 0.5, 5).beta;
    double beta50 = NAN;
    try {
        beta50 = ex::empirical_k50(small.cells) / reduced.n;
    } catch (const bsr::Error& e) {
        o.expect(false, e.what());
    }
    o.expect(std::abs(beta50 - beta_w) <= 0.06, fmt("|beta50 - beta_w| = %.4f", beta50 - beta_w));
    o.expect(seconds <= 300.0, fmt("reduced run took %.0f s", seconds));

    o.detail = fmt("k50 = %.2f vs k* = %.2f (tol 4), failures/50 at k", k50, k_theory) + fractions +
               fmt("; reduced beta50 = %.4f vs %.4f (tol 0.06) in %.1f s", beta50, beta_w, seconds);
    return o;
}

// ---- 7 -------------------------------------------------------------------

Outcome solver_correctness() {
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst_excess = -1.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 10 + static_cast<int>(rng() % 31);
        const int d = 1 + static_cast<int>(rng() % 5);
        const int m = 2 + static_cast<int>(rng() % (n - 2));
        const int k = 1 + static_cast<int>(rng() % m);
        const auto inst = ex::generate_instance({n, d, m, k}, 7000 + t);
        const auto r = bsr::solver::solve_l2l1(inst, {});
        const double planted = inst.planted.l2l1_norm();
        const double excess = (r.objective - planted) / planted;
        worst_excess = std::max(worst_excess, excess);
        o.expect(excess <= 1e-6, fmt("instance %d (n=%d d=%d m=%d k=%d) excess %.2e", t, n, d, m, k,
                                     excess));
        const double infeas =
            (inst.matrix * r.estimate.values() - inst.measurements).norm() / inst.measurements.norm();
        if (r.converged) o.expect(infeas <= 1e-6, fmt("instance %d infeasible %.2e", t, infeas));
    }

    double worst_ref = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto inst = ex::generate_instance({6, 2, 4, 2}, 500 + t);
        const auto ours = bsr::solver::solve_l2l1(inst, {});
        const auto ref = bsr::testing::reference_l2l1(inst.matrix, inst.measurements, 2);
        const double rel = std::abs(ours.objective - ref.objective) / ref.objective;
        worst_ref = std::max(worst_ref, rel);
        o.expect(rel <= 1e-4, fmt("reference instance %d differs by %.2e", t, rel));
    }

    const auto inst = ex::generate_instance({30, 3, 15, 6}, 99);
    const auto r1 = bsr::solver::solve_l2l1(inst.matrix, inst.measurements, 3, {});
    const auto r10 = bsr::solver::solve_l2l1(inst.matrix, 10.0 * inst.measurements, 3, {});
    o.expect((r10.estimate.values() - 10.0 * r1.estimate.values()).norm() <=
                 1e-6 * 10.0 * r1.estimate.values().norm(),
             "scale equivariance");
    bsr::solver::SolverConfig traced;
    traced.record_history = true;
    const auto a = bsr::solver::solve_l2l1(inst, traced);
    const auto b = bsr::solver::solve_l2l1(inst, traced);
    o.expect(a.primal_history == b.primal_history && a.dual_history == b.dual_history &&
                 (a.estimate.values().array() == b.estimate.values().array()).all(),
             "determinism");

    o.detail = fmt("100 instances max relative excess over planted %.1e (tol 1e-6); "
                   "50 reference instances max gap %.1e (tol 1e-4); scale, determinism",
                   worst_excess, worst_ref);
    return o;
}

// ---- 8 -------------------------------------------------------------------

Outcome oracle_cross_validation() {
    Outcome o;
    const bsr::BlockDims dims{3, 2, 2, 1};
    const int resolution = bsr::oracle::default_resolution(2);
    const auto cv = bsr::oracle::cross_validate(dims, 200, 31337, resolution, {}, 0);
    const double rate = cv.agreement_rate();
    o.expect(rate >= 0.95, fmt("agreement %.3f", rate));
    o.detail = fmt("%d/%d agree (%.1f%%, tol 95%%); %d disagreements, %d near the boundary, "
                   "%d indeterminate",
                   cv.agreements, cv.trials, 100.0 * rate, cv.disagreements,
                   cv.boundary_disagreements, cv.indeterminate);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc == 3 && std::strcmp(argv[1], "--only") == 0) only = std::atoi(argv[2]);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"large-d limits", large_d_limits},
        {"gamma identities", gamma_identities},
        {"truncated moments vs Monte Carlo", truncated_moments},
        {"threshold ordering and monotonicity", threshold_invariants},
        {"anchor cells at m=10", anchor_cells},
        {"50% crossing at m=50", crossing_at_half},
        {"solver correctness", solver_correctness},
        {"oracle cross-validation", oracle_cross_validation},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && only != static_cast<int>(i + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.failures == 0;
        failed += !pass;
        std::printf("%s [%zu] %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), s);
        if (!pass) std::printf("     %d of %d checks failed: %s\n", o.failures, o.checks,
                               o.first_failures.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
