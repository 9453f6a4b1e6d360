#include "bsr/bsr.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bsr/errors.hpp"
#include "bsr/experiment_harness.hpp"
#include "bsr/oracle_checker.hpp"
#include "bsr/recovery_solver.hpp"
#include "bsr/special_functions.hpp"
#include "bsr/threshold_engine.hpp"

struct bsr_instance {
    bsr::ProblemInstance inner;
    bool has_planted = false;
};

struct bsr_solution {
    bsr::solver::SolveReport report;
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    bool success = false;
};

struct bsr_experiment {
    bsr::experiment::ExperimentConfig config;
};

struct bsr_phase_table {
    bsr::experiment::PhaseTable table;
    std::vector<bsr::experiment::TheoryComparison> comparisons;
};

namespace {

thread_local std::string g_last_error;

class InvalidArgument : public std::exception {
public:
    explicit InvalidArgument(std::string what) : what_(std::move(what)) {}
    const char* what() const noexcept override { return what_.c_str(); }

private:
    std::string what_;
};

template <typename F>
bsr_status guarded(F&& body) noexcept {
    try {
        g_last_error.clear();
        body();
        return BSR_OK;
    } catch (const bsr::Error& e) {
        g_last_error = e.what();
        return static_cast<bsr_status>(static_cast<int>(e.code()));
    } catch (const InvalidArgument& e) {
        g_last_error = e.what();
        return BSR_E_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return BSR_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return BSR_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return BSR_E_INTERNAL;
    }
}

template <typename T>
void require(const T* p, const char* what) {
    if (p == nullptr) throw InvalidArgument(std::string(what) + " must not be NULL");
}

bsr::threshold::Kind to_kind(bsr_kind kind) {
    switch (kind) {
        case BSR_STRONG: return bsr::threshold::Kind::kStrong;
        case BSR_SECTIONAL: return bsr::threshold::Kind::kSectional;
        case BSR_WEAK: return bsr::threshold::Kind::kWeak;
    }
    throw InvalidArgument("unknown kind " + std::to_string(static_cast<int>(kind)));
}

bsr::experiment::Amplitude to_amplitude(bsr_amplitude a) {
    switch (a) {
        case BSR_AMPLITUDE_GAUSSIAN: return bsr::experiment::Amplitude::kGaussian;
        case BSR_AMPLITUDE_UNIT_NORM: return bsr::experiment::Amplitude::kUnitNorm;
    }
    throw InvalidArgument("unknown amplitude " + std::to_string(static_cast<int>(a)));
}

bsr_theta_result to_c(const bsr::threshold::Result& r) {
    bsr_theta_result out{};
    out.theta_hat = r.theta_hat;
    out.delta_hat = r.delta_hat;
    out.required_alpha = r.required_alpha;
    out.residual = r.residual;
    out.converged = r.converged;
    out.root_count = r.root_count;
    out.boundary_limit = r.boundary_limit;
    out.saturated = r.saturated;
    return out;
}

bsr::solver::SolverConfig from_c(const bsr_solver_config* c) {
    bsr::solver::SolverConfig cfg;
    if (c != nullptr) {
        cfg.penalty = c->penalty;
        cfg.max_iters = c->max_iters;
        cfg.primal_tol = c->primal_tol;
        cfg.dual_tol = c->dual_tol;
        cfg.success_tol = c->success_tol;
    }
    cfg.validate();
    return cfg;
}

void copy_out(const bsr::Vector& v, double* out, size_t len, const char* what) {
    require(out, what);
    if (len < static_cast<size_t>(v.size())) {
        throw InvalidArgument(std::string(what) + ": buffer holds " + std::to_string(len) +
                              " values, need " + std::to_string(v.size()));
    }
    std::memcpy(out, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

template <typename F>
bsr_status scalar(double* out, F&& f) noexcept {
    return guarded([&] {
        require(out, "out");
        *out = f();
    });
}

}  // namespace

extern "C" {

const char* bsr_version(void) { return BSR_VERSION_STRING; }

const char* bsr_status_string(bsr_status status) {
    switch (status) {
        case BSR_OK: return "ok";
        case BSR_E_DOMAIN: return "domain error";
        case BSR_E_NO_ROOT: return "no root";
        case BSR_E_NON_CONVERGENCE: return "non-convergence";
        case BSR_E_RANK_DEFICIENT: return "rank deficient";
        case BSR_E_DIMENSION_TOO_LARGE: return "dimension too large";
        case BSR_E_MISSING_DIRECTIONS: return "missing directions";
        case BSR_E_NO_BRACKET: return "no bracket";
        case BSR_E_DIMENSION_MISMATCH: return "dimension mismatch";
        case BSR_E_CONFIG: return "configuration error";
        case BSR_E_IO: return "i/o error";
        case BSR_E_INTERRUPTED: return "interrupted";
        case BSR_E_PRECONDITION: return "precondition violated";
        case BSR_E_INVALID_ARGUMENT: return "invalid argument";
        case BSR_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* bsr_last_error(void) { return g_last_error.c_str(); }

bsr_status bsr_reg_inc_gamma(double shape, double x, double* out) {
    return scalar(out, [&] { return bsr::special::reg_inc_gamma(shape, x); });
}
bsr_status bsr_reg_inc_gamma_upper(double shape, double x, double* out) {
    return scalar(out, [&] { return bsr::special::reg_inc_gamma_upper(shape, x); });
}
bsr_status bsr_inv_reg_inc_gamma(double shape, double p, double* out) {
    return scalar(out, [&] { return bsr::special::inv_reg_inc_gamma(shape, p); });
}
bsr_status bsr_chi_inv_cdf(int d, double p, double* out) {
    return scalar(out, [&] { return bsr::special::chi_inv_cdf(d, p); });
}
bsr_status bsr_chi_mean(int d, double* out) {
    return scalar(out, [&] { return bsr::special::chi_mean(d); });
}
bsr_status bsr_chi_upper_trunc_mean(int d, double theta, double* out) {
    return scalar(out, [&] { return bsr::special::chi_upper_trunc_mean(d, theta); });
}
bsr_status bsr_chisq_upper_trunc_mean(int d, double theta, double* out) {
    return scalar(out, [&] { return bsr::special::chisq_upper_trunc_mean(d, theta); });
}

bsr_status bsr_parse_kind(const char* text, bsr_kind* out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        const auto kind = bsr::threshold::parse_kind(text);
        if (!kind) throw InvalidArgument(std::string("unknown kind '") + text + "'");
        *out = static_cast<bsr_kind>(static_cast<int>(*kind));
    });
}

const char* bsr_kind_name(bsr_kind kind) {
    switch (kind) {
        case BSR_STRONG: return "strong";
        case BSR_SECTIONAL: return "sectional";
        case BSR_WEAK: return "weak";
    }
    return "unknown";
}

bsr_status bsr_required_alpha(bsr_kind kind, double beta, int d, double epsilon,
                              bsr_theta_result* out) {
    return guarded([&] {
        require(out, "out");
        *out = to_c(bsr::threshold::required_alpha(to_kind(kind), beta, d, epsilon));
    });
}

bsr_status bsr_threshold_beta(bsr_kind kind, double alpha, int d, double epsilon,
                              bsr_beta_threshold* out) {
    return guarded([&] {
        require(out, "out");
        const auto t = bsr::threshold::threshold_beta(to_kind(kind), alpha, d, epsilon);
        out->beta = t.beta;
        out->certified = t.certified;
        out->at = to_c(t.at);
    });
}

bsr_status bsr_asymptotic_required_alpha(bsr_kind kind, double beta, double* out) {
    return scalar(out, [&] { return bsr::threshold::asymptotic_required_alpha(to_kind(kind), beta); });
}
bsr_status bsr_asymptotic_threshold_beta(bsr_kind kind, double alpha, double* out) {
    return scalar(out, [&] { return bsr::threshold::asymptotic_threshold_beta(to_kind(kind), alpha); });
}
bsr_status bsr_simplified_required_alpha(bsr_kind kind, double beta, int d, double* out) {
    return scalar(out,
                  [&] { return bsr::threshold::simplified_required_alpha(to_kind(kind), beta, d); });
}
bsr_status bsr_escape_prob_lower_bound(long dm, double width, double constant, double* out) {
    return scalar(out, [&] { return bsr::threshold::escape_prob_lower_bound(dm, width, constant); });
}
bsr_status bsr_finite_n_slack(long n, double delta, double psi, double epsilon, double* out) {
    return scalar(out, [&] { return bsr::threshold::finite_n_slack(n, delta, psi, epsilon); });
}

bsr_status bsr_instance_generate(int n, int d, int m, int k, uint64_t seed,
                                 bsr_amplitude amplitude, bsr_instance** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        const bsr::BlockDims dims{n, d, m, k};
        auto inst = std::make_unique<bsr_instance>();
        inst->inner = bsr::experiment::generate_instance(dims, seed, to_amplitude(amplitude));
        inst->has_planted = true;
        *out = inst.release();
    });
}

bsr_status bsr_instance_create(int n, int d, int m, const double* matrix,
                               const double* measurements, bsr_instance** out) {
    return guarded([&] {
        require(out, "out");
        require(matrix, "matrix");
        require(measurements, "measurements");
        *out = nullptr;
        const bsr::BlockDims dims{n, d, m, 0};
        dims.validate();
        auto inst = std::make_unique<bsr_instance>();
        inst->inner.dims = dims;
        inst->inner.matrix = Eigen::Map<const bsr::Matrix>(matrix, dims.rows(), dims.ambient());
        inst->inner.measurements = Eigen::Map<const bsr::Vector>(measurements, dims.rows());
        inst->inner.planted = bsr::BlockSignal(bsr::Vector::Zero(dims.ambient()), d);
        *out = inst.release();
    });
}

void bsr_instance_free(bsr_instance* instance) { delete instance; }

bsr_status bsr_instance_dims(const bsr_instance* instance, int* n, int* d, int* m, int* k) {
    return guarded([&] {
        require(instance, "instance");
        const auto& dims = instance->inner.dims;
        if (n) *n = dims.n;
        if (d) *d = dims.d;
        if (m) *m = dims.m;
        if (k) *k = dims.k;
    });
}

bsr_status bsr_instance_copy_matrix(const bsr_instance* instance, double* out, size_t len) {
    return guarded([&] {
        require(instance, "instance");
        const auto& a = instance->inner.matrix;
        require(out, "out");
        if (len < static_cast<size_t>(a.size())) throw InvalidArgument("matrix: buffer too short");
        std::memcpy(out, a.data(), sizeof(double) * static_cast<size_t>(a.size()));
    });
}

bsr_status bsr_instance_copy_measurements(const bsr_instance* instance, double* out, size_t len) {
    return guarded([&] {
        require(instance, "instance");
        copy_out(instance->inner.measurements, out, len, "measurements");
    });
}

bsr_status bsr_instance_copy_planted(const bsr_instance* instance, double* out, size_t len) {
    return guarded([&] {
        require(instance, "instance");
        if (!instance->has_planted) {
            throw bsr::Error(bsr::ErrorCode::kPrecondition, "instance has no planted signal");
        }
        copy_out(instance->inner.planted.values(), out, len, "planted");
    });
}

void bsr_solver_config_default(bsr_solver_config* out) {
    if (out == nullptr) return;
    const bsr::solver::SolverConfig cfg;
    out->penalty = cfg.penalty;
    out->max_iters = cfg.max_iters;
    out->primal_tol = cfg.primal_tol;
    out->dual_tol = cfg.dual_tol;
    out->success_tol = cfg.success_tol;
}

bsr_status bsr_solve(const bsr_instance* instance, const bsr_solver_config* config,
                     bsr_solution** out) {
    return guarded([&] {
        require(instance, "instance");
        require(out, "out");
        *out = nullptr;
        const auto cfg = from_c(config);
        auto sol = std::make_unique<bsr_solution>();
        sol->report = bsr::solver::solve_l2l1(instance->inner, cfg);
        if (instance->has_planted) {
            sol->relative_error =
                bsr::solver::relative_error(sol->report.estimate, instance->inner.planted);
            sol->success = sol->relative_error < cfg.success_tol;
        }
        *out = sol.release();
    });
}

void bsr_solution_free(bsr_solution* solution) { delete solution; }

bsr_status bsr_solution_info_get(const bsr_solution* solution, bsr_solution_info* out) {
    return guarded([&] {
        require(solution, "solution");
        require(out, "out");
        const auto& r = solution->report;
        out->iterations = r.iterations;
        out->converged = r.converged;
        out->objective = r.objective;
        out->primal_residual = r.primal_residual;
        out->dual_residual = r.dual_residual;
        out->relative_error = solution->relative_error;
        out->success = solution->success;
    });
}

bsr_status bsr_solution_copy_estimate(const bsr_solution* solution, double* out, size_t len) {
    return guarded([&] {
        require(solution, "solution");
        copy_out(solution->report.estimate.values(), out, len, "estimate");
    });
}

bsr_status bsr_experiment_load(const char* path, bsr_experiment** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto e = std::make_unique<bsr_experiment>();
        e->config = bsr::experiment::load_experiment_config(path);
        *out = e.release();
    });
}

bsr_status bsr_experiment_parse(const char* text, bsr_experiment** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = nullptr;
        auto e = std::make_unique<bsr_experiment>();
        e->config = bsr::experiment::parse_experiment_config(text);
        *out = e.release();
    });
}

void bsr_experiment_free(bsr_experiment* experiment) { delete experiment; }

bsr_status bsr_experiment_summary_get(const bsr_experiment* experiment,
                                      bsr_experiment_summary* out) {
    return guarded([&] {
        require(experiment, "experiment");
        require(out, "out");
        const auto& c = experiment->config;
        out->n = c.n;
        out->d = c.d;
        out->trials = c.trials;
        int cells = 0;
        for (int m : c.m_list) {
            const auto it = c.k_lists.find(m);
            if (it != c.k_lists.end()) cells += static_cast<int>(it->second.size());
        }
        out->cells = cells;
        out->seed = c.master_seed;
        out->output = c.output.c_str();
    });
}

bsr_status bsr_experiment_run(const bsr_experiment* experiment, const bsr_run_options* options,
                              bsr_phase_table** out) {
    return guarded([&] {
        require(experiment, "experiment");
        require(out, "out");
        *out = nullptr;
        bsr::experiment::RunOptions opts;
        if (options != nullptr) {
            if (options->workers < 0) throw InvalidArgument("workers must be >= 0");
            opts.workers = options->workers;
            opts.resume = options->resume != 0;
            opts.persist = options->persist != 0;
        }
        auto t = std::make_unique<bsr_phase_table>();
        t->table = bsr::experiment::run_grid(experiment->config, opts);
        t->comparisons = bsr::experiment::compare_to_theory(t->table, experiment->config.d);
        *out = t.release();
    });
}

void bsr_phase_table_free(bsr_phase_table* table) { delete table; }

size_t bsr_phase_table_size(const bsr_phase_table* table) {
    return table ? table->table.cells.size() : 0;
}

bsr_status bsr_phase_table_cell(const bsr_phase_table* table, size_t index, bsr_phase_cell* out) {
    return guarded([&] {
        require(table, "table");
        require(out, "out");
        if (index >= table->table.cells.size()) throw InvalidArgument("cell index out of range");
        const auto& c = table->table.cells[index];
        out->m = c.m;
        out->k = c.k;
        out->trials = c.trials;
        out->failures = c.failures;
        out->nonconverged = c.nonconverged;
        out->seed_base = c.seed_base;
    });
}

size_t bsr_phase_table_comparison_count(const bsr_phase_table* table) {
    return table ? table->comparisons.size() : 0;
}

bsr_status bsr_phase_table_comparison(const bsr_phase_table* table, size_t index,
                                      bsr_comparison* out) {
    return guarded([&] {
        require(table, "table");
        require(out, "out");
        if (index >= table->comparisons.size()) throw InvalidArgument("comparison index out of range");
        const auto& c = table->comparisons[index];
        out->m = c.m;
        out->alpha = c.alpha;
        out->has_k50 = c.k50.has_value();
        out->k50 = c.k50.value_or(std::numeric_limits<double>::quiet_NaN());
        out->k_theory = c.k_theory;
        out->delta = c.delta.value_or(std::numeric_limits<double>::quiet_NaN());
        out->error = c.error.c_str();
    });
}

void bsr_request_stop(void) { bsr::experiment::request_stop(); }
void bsr_clear_stop(void) { bsr::experiment::clear_stop(); }

bsr_status bsr_oracle_check(const bsr_instance* instance, bsr_kind kind, int resolution,
                            bsr_check_result* out) {
    return guarded([&] {
        require(instance, "instance");
        require(out, "out");
        const auto& inst = instance->inner;
        const int p = inst.dims.d * (inst.dims.n - inst.dims.m);
        if (p > bsr::oracle::kMaxNullspaceDim) {
            throw bsr::DimensionTooLargeError("null-space dimension " + std::to_string(p) +
                                              " exceeds " +
                                              std::to_string(bsr::oracle::kMaxNullspaceDim));
        }
        const int res = resolution > 0 ? resolution : bsr::oracle::default_resolution(p);
        const auto basis = bsr::oracle::nullspace_basis(inst.matrix);
        bsr::oracle::CheckResult r;
        switch (to_kind(kind)) {
            case bsr::threshold::Kind::kStrong:
                r = bsr::oracle::check_strong(basis, inst.dims, res);
                break;
            case bsr::threshold::Kind::kSectional:
                r = bsr::oracle::check_sectional(basis, inst.dims.d,
                                                 bsr::oracle::pattern_from_signal(inst.planted), res);
                break;
            case bsr::threshold::Kind::kWeak:
                r = bsr::oracle::check_weak(basis, inst.dims.d,
                                            bsr::oracle::pattern_from_signal(inst.planted), res);
                break;
        }
        out->holds = r.holds;
        out->indeterminate = r.indeterminate;
        out->margin = r.margin;
        out->points = r.points;
        out->nullspace_dim = basis.dim();
    });
}

bsr_status bsr_oracle_cross_validate(int n, int d, int m, int k, int trials, uint64_t seed,
                                     int resolution, const bsr_solver_config* config, int workers,
                                     bsr_cross_validation* out) {
    return guarded([&] {
        require(out, "out");
        const bsr::BlockDims dims{n, d, m, k};
        dims.validate();
        const int p = d * (n - m);
        if (p > bsr::oracle::kMaxNullspaceDim) {
            throw bsr::DimensionTooLargeError("null-space dimension " + std::to_string(p) +
                                              " exceeds " +
                                              std::to_string(bsr::oracle::kMaxNullspaceDim));
        }
        const int res = resolution > 0 ? resolution : bsr::oracle::default_resolution(p);
        const auto cv =
            bsr::oracle::cross_validate(dims, trials, seed, res, from_c(config), workers);
        out->trials = cv.trials;
        out->agreements = cv.agreements;
        out->disagreements = cv.disagreements;
        out->boundary_disagreements = cv.boundary_disagreements;
        out->indeterminate = cv.indeterminate;
        out->solver_successes = cv.solver_successes;
        out->oracle_holds = cv.oracle_holds;
    });
}

}  // extern "C"
