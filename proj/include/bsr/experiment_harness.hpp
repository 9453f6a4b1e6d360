#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsr/block_types.hpp"
#include "bsr/recovery_solver.hpp"

namespace bsr::experiment {

/// Distribution of the entries of the nonzero blocks of a planted signal.
enum class Amplitude {
    kGaussian,  // i.i.d. N(0, 1) entries
    kUnitNorm,  // uniformly random direction, unit block norm
};

/// A d m x d n matrix with i.i.d. N(0, 1) entries and a planted signal whose k
/// nonzero blocks sit at uniformly random positions; y = A x.
///
/// Draw order from a mt19937_64 seeded with splitmix64(seed): the entries of A
/// in column-major order, then a partial Fisher-Yates selection of the
/// support, then the block entries in ascending block order.
ProblemInstance generate_instance(const BlockDims& dims, std::uint64_t seed,
                                  Amplitude amplitude = Amplitude::kGaussian);

std::uint64_t splitmix64(std::uint64_t x);
/// Seed base of cell (m, k) under a master seed.
std::uint64_t cell_seed(std::uint64_t master, int m, int k);
/// Per-trial seed: seed_base XOR trial index.
inline std::uint64_t trial_seed(std::uint64_t seed_base, int trial) {
    return seed_base ^ static_cast<std::uint64_t>(trial);
}

struct PhaseCell {
    int m = 0;
    int k = 0;
    int trials = 0;
    int failures = 0;      // trials whose estimate missed the planted signal
    int nonconverged = 0;  // trials that hit max_iters (success or not)
    double tolerance_used = 0.0;
    std::uint64_t seed_base = 0;

    double failure_fraction() const { return trials > 0 ? double(failures) / trials : 0.0; }
};

struct ExperimentConfig {
    int n = 100;
    int d = 15;
    std::vector<int> m_list;
    std::map<int, std::vector<int>> k_lists;  // keyed by m
    int trials = 20;
    solver::SolverConfig solver;
    std::uint64_t master_seed = 1;
    Amplitude amplitude = Amplitude::kGaussian;
    double theory_epsilon = 0.0;
    std::string output;  // path prefix; empty disables persistence
    int workers = 0;     // 0 = hardware concurrency

    /// Throws ConfigError on k > n, m > n, trials < 1 and similar.
    void validate() const;
};

struct TheoryPoint {
    double alpha = 0.0;
    double beta_weak = 0.0;
};

struct PhaseTable {
    ExperimentConfig config;
    std::vector<PhaseCell> cells;
    std::vector<TheoryPoint> overlay;
};

struct RunOptions {
    int workers = 0;      // overrides config.workers when > 0
    bool resume = false;  // reuse cells from an interrupted run's CSV
    bool persist = true;  // write output files when config.output is set
    bool overlay = true;  // compute the weak-threshold overlay
};

/// One (m, k) cell: `trials` independent instances, seeds trial_seed(seed_base, t).
PhaseCell run_cell(const BlockDims& dims, int trials, const solver::SolverConfig& config,
                   std::uint64_t seed_base, int workers = 1,
                   Amplitude amplitude = Amplitude::kGaussian);

/// Runs every configured cell. With persistence enabled, completed cells are
/// appended to <output>.csv as they finish and <output>.csv.partial marks an
/// unfinished run; an interrupted run throws ErrorCode::kInterrupted and can
/// be resumed with RunOptions::resume.
PhaseTable run_grid(const ExperimentConfig& config, const RunOptions& options = {});

/// Cooperative cancellation for run_grid / run_cell (async-signal-safe).
void request_stop() noexcept;
void clear_stop() noexcept;
bool stop_requested() noexcept;

/// k at which the failure fraction crosses 1/2, linearly interpolated between
/// the first cell at or above 1/2 and its predecessor. `cells` must share one
/// m. Throws ErrorCode::kNoBracket when the sweep does not straddle 1/2.
double empirical_k50(std::vector<PhaseCell> cells);

struct TheoryComparison {
    int m = 0;
    double alpha = 0.0;
    std::optional<double> k50;
    double k_theory = 0.0;
    std::optional<double> delta;  // k50 - k_theory
    std::string error;            // set when k50 is missing
};

/// Per-m empirical crossing vs n * (weak threshold at alpha = m / n).
std::vector<TheoryComparison> compare_to_theory(const PhaseTable& table, int d);

// Serialization. Every file starts with a '#' comment line carrying the
// version and the full parameter echo.
std::string table_csv_path(const std::string& prefix);
std::string sidecar_path(const std::string& prefix);
std::string overlay_path(const std::string& prefix);

void write_table_csv(const PhaseTable& table, const std::string& path);
void write_sidecar_json(const ExperimentConfig& config, const std::string& path, bool complete);
void write_overlay_csv(const PhaseTable& table, const std::string& path);
std::vector<PhaseCell> read_table_csv(const std::string& path);

std::string parameter_echo(const ExperimentConfig& config);

/// INI-style experiment file (see configs/*.ini). Throws ConfigError.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace bsr::experiment
