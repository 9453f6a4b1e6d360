/* C interface to the block-sparse recovery library.
 *
 * Every function that can fail returns a bsr_status; on failure a message is
 * available from bsr_last_error() on the calling thread until the next call.
 * Handles are opaque and owned by the caller once returned; release them with
 * the matching *_free function (NULL is accepted). Matrices cross the boundary
 * in column-major order.
 */
#ifndef BSR_BSR_H
#define BSR_BSR_H

#include <stddef.h>
#include <stdint.h>

#if defined(BSR_BUILDING_LIBRARY)
#define BSR_API __attribute__((visibility("default")))
#else
#define BSR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsr_status {
    BSR_OK = 0,
    BSR_E_DOMAIN = 1,
    BSR_E_NO_ROOT = 2,
    BSR_E_NON_CONVERGENCE = 3,
    BSR_E_RANK_DEFICIENT = 4,
    BSR_E_DIMENSION_TOO_LARGE = 5,
    BSR_E_MISSING_DIRECTIONS = 6,
    BSR_E_NO_BRACKET = 7,
    BSR_E_DIMENSION_MISMATCH = 8,
    BSR_E_CONFIG = 9,
    BSR_E_IO = 10,
    BSR_E_INTERRUPTED = 11,
    BSR_E_PRECONDITION = 12,
    BSR_E_INVALID_ARGUMENT = 13, /* NULL pointer, bad enum value, short buffer */
    BSR_E_INTERNAL = 14
} bsr_status;

BSR_API const char* bsr_version(void);
BSR_API const char* bsr_status_string(bsr_status status);
BSR_API const char* bsr_last_error(void);

/* ---- special functions ------------------------------------------------ */

BSR_API bsr_status bsr_reg_inc_gamma(double shape, double x, double* out);
BSR_API bsr_status bsr_reg_inc_gamma_upper(double shape, double x, double* out);
BSR_API bsr_status bsr_inv_reg_inc_gamma(double shape, double p, double* out);
BSR_API bsr_status bsr_chi_inv_cdf(int d, double p, double* out);
BSR_API bsr_status bsr_chi_mean(int d, double* out);
BSR_API bsr_status bsr_chi_upper_trunc_mean(int d, double theta, double* out);
BSR_API bsr_status bsr_chisq_upper_trunc_mean(int d, double theta, double* out);

/* ---- thresholds ------------------------------------------------------- */

typedef enum bsr_kind { BSR_STRONG = 0, BSR_SECTIONAL = 1, BSR_WEAK = 2 } bsr_kind;

/* Accepts "strong", "sectional", "weak". */
BSR_API bsr_status bsr_parse_kind(const char* text, bsr_kind* out);
BSR_API const char* bsr_kind_name(bsr_kind kind);

typedef struct bsr_theta_result {
    double theta_hat;
    double delta_hat; /* 1 - theta_hat, carried at full precision */
    double required_alpha;
    double residual;
    int converged;
    int root_count;
    int boundary_limit; /* beta == 0: theta_hat -> 0, required_alpha -> 0 */
    int saturated;      /* no theta improves on the trivial required_alpha = 1 */
} bsr_theta_result;

typedef struct bsr_beta_threshold {
    double beta;
    int certified;
    bsr_theta_result at;
} bsr_beta_threshold;

BSR_API bsr_status bsr_required_alpha(bsr_kind kind, double beta, int d, double epsilon,
                                      bsr_theta_result* out);
BSR_API bsr_status bsr_threshold_beta(bsr_kind kind, double alpha, int d, double epsilon,
                                      bsr_beta_threshold* out);
BSR_API bsr_status bsr_asymptotic_required_alpha(bsr_kind kind, double beta, double* out);
BSR_API bsr_status bsr_asymptotic_threshold_beta(bsr_kind kind, double alpha, double* out);
BSR_API bsr_status bsr_simplified_required_alpha(bsr_kind kind, double beta, int d, double* out);
BSR_API bsr_status bsr_escape_prob_lower_bound(long dm, double width, double constant,
                                               double* out);
BSR_API bsr_status bsr_finite_n_slack(long n, double delta, double psi, double epsilon,
                                      double* out);

/* ---- instances and the l2/l1 solver ----------------------------------- */

typedef struct bsr_instance bsr_instance;
typedef struct bsr_solution bsr_solution;

typedef enum bsr_amplitude { BSR_AMPLITUDE_GAUSSIAN = 0, BSR_AMPLITUDE_UNIT_NORM = 1 } bsr_amplitude;

BSR_API bsr_status bsr_instance_generate(int n, int d, int m, int k, uint64_t seed,
                                         bsr_amplitude amplitude, bsr_instance** out);
/* A user problem: `matrix` is dm x dn column-major, `measurements` has dm
 * entries. The instance carries no planted signal. */
BSR_API bsr_status bsr_instance_create(int n, int d, int m, const double* matrix,
                                       const double* measurements, bsr_instance** out);
BSR_API void bsr_instance_free(bsr_instance* instance);
BSR_API bsr_status bsr_instance_dims(const bsr_instance* instance, int* n, int* d, int* m, int* k);
BSR_API bsr_status bsr_instance_copy_matrix(const bsr_instance* instance, double* out, size_t len);
BSR_API bsr_status bsr_instance_copy_measurements(const bsr_instance* instance, double* out,
                                                  size_t len);
/* Fails with BSR_E_PRECONDITION for instances without a planted signal. */
BSR_API bsr_status bsr_instance_copy_planted(const bsr_instance* instance, double* out, size_t len);

typedef struct bsr_solver_config {
    double penalty;
    int max_iters;
    double primal_tol;
    double dual_tol;
    double success_tol;
} bsr_solver_config;

BSR_API void bsr_solver_config_default(bsr_solver_config* out);

typedef struct bsr_solution_info {
    int iterations;
    int converged;
    double objective;
    double primal_residual;
    double dual_residual;
    double relative_error; /* NaN without a planted signal */
    int success;           /* relative_error < success_tol */
} bsr_solution_info;

/* config may be NULL for the defaults. */
BSR_API bsr_status bsr_solve(const bsr_instance* instance, const bsr_solver_config* config,
                             bsr_solution** out);
BSR_API void bsr_solution_free(bsr_solution* solution);
BSR_API bsr_status bsr_solution_info_get(const bsr_solution* solution, bsr_solution_info* out);
BSR_API bsr_status bsr_solution_copy_estimate(const bsr_solution* solution, double* out,
                                              size_t len);

/* ---- phase experiments ------------------------------------------------ */

typedef struct bsr_experiment bsr_experiment;
typedef struct bsr_phase_table bsr_phase_table;

BSR_API bsr_status bsr_experiment_load(const char* path, bsr_experiment** out);
BSR_API bsr_status bsr_experiment_parse(const char* text, bsr_experiment** out);
BSR_API void bsr_experiment_free(bsr_experiment* experiment);

typedef struct bsr_experiment_summary {
    int n;
    int d;
    int trials;
    int cells;
    uint64_t seed;
    const char* output; /* valid while the handle lives; "" when not persisted */
} bsr_experiment_summary;

BSR_API bsr_status bsr_experiment_summary_get(const bsr_experiment* experiment,
                                              bsr_experiment_summary* out);

typedef struct bsr_run_options {
    int workers; /* 0 keeps the configured value */
    int resume;
    int persist;
} bsr_run_options;

/* Returns BSR_E_INTERRUPTED after bsr_request_stop(); completed cells are on
 * disk when persistence is enabled. */
BSR_API bsr_status bsr_experiment_run(const bsr_experiment* experiment,
                                      const bsr_run_options* options, bsr_phase_table** out);
BSR_API void bsr_phase_table_free(bsr_phase_table* table);

typedef struct bsr_phase_cell {
    int m;
    int k;
    int trials;
    int failures;
    int nonconverged;
    uint64_t seed_base;
} bsr_phase_cell;

BSR_API size_t bsr_phase_table_size(const bsr_phase_table* table);
BSR_API bsr_status bsr_phase_table_cell(const bsr_phase_table* table, size_t index,
                                        bsr_phase_cell* out);

typedef struct bsr_comparison {
    int m;
    double alpha;
    int has_k50;
    double k50;
    double k_theory;
    double delta; /* k50 - k_theory when has_k50 */
    const char* error; /* reason k50 is missing; valid while the table lives */
} bsr_comparison;

/* Empirical 50% crossing vs theory, one entry per m. */
BSR_API size_t bsr_phase_table_comparison_count(const bsr_phase_table* table);
BSR_API bsr_status bsr_phase_table_comparison(const bsr_phase_table* table, size_t index,
                                              bsr_comparison* out);

/* Async-signal-safe. */
BSR_API void bsr_request_stop(void);
BSR_API void bsr_clear_stop(void);

/* ---- null-space oracle ------------------------------------------------ */

typedef struct bsr_check_result {
    int holds;
    int indeterminate;
    double margin;
    long points;
    int nullspace_dim;
} bsr_check_result;

/* Strong uses the instance's k; sectional and weak use its planted support
 * (and, for weak, its block directions). resolution <= 0 picks the default. */
BSR_API bsr_status bsr_oracle_check(const bsr_instance* instance, bsr_kind kind, int resolution,
                                    bsr_check_result* out);

typedef struct bsr_cross_validation {
    int trials;
    int agreements;
    int disagreements;
    int boundary_disagreements;
    int indeterminate;
    int solver_successes;
    int oracle_holds;
} bsr_cross_validation;

BSR_API bsr_status bsr_oracle_cross_validate(int n, int d, int m, int k, int trials, uint64_t seed,
                                             int resolution, const bsr_solver_config* config,
                                             int workers, bsr_cross_validation* out);

#ifdef __cplusplus
}
#endif

#endif /* BSR_BSR_H */
