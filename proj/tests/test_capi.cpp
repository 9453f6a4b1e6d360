#include <cmath>
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "bsr/bsr.h"

TEST(CApi, VersionAndStatusStrings) {
    EXPECT_STREQ(bsr_version(), "0.1.0");
    EXPECT_STREQ(bsr_status_string(BSR_OK), "ok");
    EXPECT_NE(std::strlen(bsr_status_string(BSR_E_NO_ROOT)), 0u);
    EXPECT_NE(std::strlen(bsr_status_string(static_cast<bsr_status>(99))), 0u);
}

TEST(CApi, SpecialFunctions) {
    double v = 0.0;
    ASSERT_EQ(bsr_reg_inc_gamma(1.0, 1.0, &v), BSR_OK);
    EXPECT_NEAR(v, 1.0 - std::exp(-1.0), 1e-15);
    ASSERT_EQ(bsr_reg_inc_gamma_upper(1.0, 1.0, &v), BSR_OK);
    EXPECT_NEAR(v, std::exp(-1.0), 1e-15);
    ASSERT_EQ(bsr_inv_reg_inc_gamma(1.0, 1.0 - std::exp(-1.0), &v), BSR_OK);
    EXPECT_NEAR(v, 1.0, 1e-13);
    ASSERT_EQ(bsr_chi_inv_cdf(2, 1.0 - std::exp(-0.5), &v), BSR_OK);
    EXPECT_NEAR(v, 1.0, 1e-13);
    ASSERT_EQ(bsr_chi_mean(1, &v), BSR_OK);
    EXPECT_NEAR(v, std::sqrt(2.0 / M_PI), 1e-15);
    ASSERT_EQ(bsr_chisq_upper_trunc_mean(15, 1.0, &v), BSR_OK);
    EXPECT_EQ(v, 15.0);
    ASSERT_EQ(bsr_chi_upper_trunc_mean(15, 0.0, &v), BSR_OK);
    EXPECT_EQ(v, 0.0);
}

TEST(CApi, ErrorsSetLastError) {
    double v = 0.0;
    EXPECT_EQ(bsr_reg_inc_gamma(-1.0, 1.0, &v), BSR_E_DOMAIN);
    EXPECT_NE(std::strlen(bsr_last_error()), 0u);
    EXPECT_EQ(bsr_chi_mean(3, nullptr), BSR_E_INVALID_ARGUMENT);
    EXPECT_EQ(bsr_chi_upper_trunc_mean(15, 1.5, &v), BSR_E_DOMAIN);
    bsr_theta_result r;
    EXPECT_EQ(bsr_required_alpha(static_cast<bsr_kind>(7), 0.1, 15, 0.0, &r),
              BSR_E_INVALID_ARGUMENT);
}

TEST(CApi, Kinds) {
    bsr_kind k;
    ASSERT_EQ(bsr_parse_kind("sectional", &k), BSR_OK);
    EXPECT_EQ(k, BSR_SECTIONAL);
    EXPECT_STREQ(bsr_kind_name(BSR_WEAK), "weak");
    EXPECT_EQ(bsr_parse_kind("medium", &k), BSR_E_INVALID_ARGUMENT);
    EXPECT_EQ(bsr_parse_kind(nullptr, &k), BSR_E_INVALID_ARGUMENT);
}

TEST(CApi, Thresholds) {
    bsr_theta_result r;
    ASSERT_EQ(bsr_required_alpha(BSR_WEAK, 0.3, 15, 0.0, &r), BSR_OK);
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.required_alpha, 0.3);
    EXPECT_LT(r.required_alpha, 1.0);
    EXPECT_NEAR(r.theta_hat + r.delta_hat, 1.0, 1e-15);

    bsr_beta_threshold t;
    ASSERT_EQ(bsr_threshold_beta(BSR_WEAK, r.required_alpha, 15, 0.0, &t), BSR_OK);
    EXPECT_TRUE(t.certified);
    EXPECT_NEAR(t.beta, 0.3, 1e-5);

    double a = 0.0;
    ASSERT_EQ(bsr_asymptotic_threshold_beta(BSR_STRONG, 1.0, &a), BSR_OK);
    EXPECT_NEAR(a, 0.5, 1e-12);
    ASSERT_EQ(bsr_asymptotic_required_alpha(BSR_WEAK, 0.5, &a), BSR_OK);
    EXPECT_NEAR(a, 0.75, 1e-12);

    double s = 0.0;
    ASSERT_EQ(bsr_finite_n_slack(100, 1.0, 1.0, 0.1, &s), BSR_OK);
    EXPECT_GT(s, 0.0);
    double e = 0.0;
    EXPECT_EQ(bsr_escape_prob_lower_bound(1000, 1.0, 2.0, &e), BSR_E_DOMAIN);
    EXPECT_EQ(bsr_escape_prob_lower_bound(4, 3.0, 3.5, &e), BSR_E_PRECONDITION);
    ASSERT_EQ(bsr_escape_prob_lower_bound(1000, 1.0, 2.5, &e), BSR_OK);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
}

TEST(CApi, InstanceRoundTrip) {
    bsr_instance* inst = nullptr;
    ASSERT_EQ(bsr_instance_generate(10, 3, 8, 2, 11, BSR_AMPLITUDE_GAUSSIAN, &inst), BSR_OK);
    int n, d, m, k;
    ASSERT_EQ(bsr_instance_dims(inst, &n, &d, &m, &k), BSR_OK);
    EXPECT_EQ(n * 100 + d * 10 + m, 1038);
    EXPECT_EQ(k, 2);

    std::vector<double> a(24 * 30), y(24), x(30);
    EXPECT_EQ(bsr_instance_copy_matrix(inst, a.data(), 10), BSR_E_INVALID_ARGUMENT);
    ASSERT_EQ(bsr_instance_copy_matrix(inst, a.data(), a.size()), BSR_OK);
    ASSERT_EQ(bsr_instance_copy_measurements(inst, y.data(), y.size()), BSR_OK);
    ASSERT_EQ(bsr_instance_copy_planted(inst, x.data(), x.size()), BSR_OK);
    for (int i = 0; i < 24; ++i) {
        double row = 0.0;
        for (int j = 0; j < 30; ++j) row += a[j * 24 + i] * x[j];
        EXPECT_NEAR(row, y[i], 1e-12 * (1.0 + std::abs(y[i])));
    }

    bsr_solution* sol = nullptr;
    ASSERT_EQ(bsr_solve(inst, nullptr, &sol), BSR_OK);
    bsr_solution_info info;
    ASSERT_EQ(bsr_solution_info_get(sol, &info), BSR_OK);
    EXPECT_TRUE(info.converged);
    EXPECT_TRUE(info.success);
    EXPECT_LT(info.relative_error, 1e-3);
    std::vector<double> est(30);
    ASSERT_EQ(bsr_solution_copy_estimate(sol, est.data(), est.size()), BSR_OK);
    bsr_solution_free(sol);

    // The same problem handed in by value has no planted signal.
    bsr_instance* user = nullptr;
    ASSERT_EQ(bsr_instance_create(10, 3, 8, a.data(), y.data(), &user), BSR_OK);
    EXPECT_EQ(bsr_instance_copy_planted(user, x.data(), x.size()), BSR_E_PRECONDITION);
    ASSERT_EQ(bsr_solve(user, nullptr, &sol), BSR_OK);
    ASSERT_EQ(bsr_solution_info_get(sol, &info), BSR_OK);
    EXPECT_TRUE(std::isnan(info.relative_error));
    std::vector<double> est2(30);
    ASSERT_EQ(bsr_solution_copy_estimate(sol, est2.data(), est2.size()), BSR_OK);
    EXPECT_EQ(est, est2);
    bsr_solution_free(sol);

    bsr_instance_free(user);
    bsr_instance_free(inst);
    bsr_instance_free(nullptr);
}

TEST(CApi, InvalidInstances) {
    bsr_instance* inst = nullptr;
    EXPECT_EQ(bsr_instance_generate(10, 3, 8, 11, 1, BSR_AMPLITUDE_GAUSSIAN, &inst), BSR_E_DOMAIN);
    EXPECT_EQ(inst, nullptr);
    EXPECT_EQ(bsr_instance_generate(10, 3, 8, 2, 1, BSR_AMPLITUDE_GAUSSIAN, nullptr),
              BSR_E_INVALID_ARGUMENT);
    bsr_solution* sol = nullptr;
    EXPECT_EQ(bsr_solve(nullptr, nullptr, &sol), BSR_E_INVALID_ARGUMENT);

    ASSERT_EQ(bsr_instance_generate(6, 2, 4, 2, 1, BSR_AMPLITUDE_GAUSSIAN, &inst), BSR_OK);
    bsr_solver_config cfg;
    bsr_solver_config_default(&cfg);
    EXPECT_EQ(cfg.max_iters > 0, true);
    cfg.penalty = -1.0;
    EXPECT_EQ(bsr_solve(inst, &cfg, &sol), BSR_E_DOMAIN);
    bsr_instance_free(inst);
}

TEST(CApi, Experiment) {
    bsr_experiment* exp = nullptr;
    EXPECT_EQ(bsr_experiment_parse("[experiment]\nn=10\nd=2\n[sweep]\nm=5\nk=11\n", &exp),
              BSR_E_CONFIG);
    EXPECT_EQ(bsr_experiment_load("/nonexistent.ini", &exp), BSR_E_CONFIG);
    ASSERT_EQ(bsr_experiment_parse(
                  "[experiment]\nn=20\nd=2\ntrials=4\nseed=3\n[sweep]\nm=10\nk=1,3,9\n", &exp),
              BSR_OK);
    bsr_experiment_summary s;
    ASSERT_EQ(bsr_experiment_summary_get(exp, &s), BSR_OK);
    EXPECT_EQ(s.cells, 3);
    EXPECT_STREQ(s.output, "");

    bsr_run_options opt{1, 0, 0};
    bsr_phase_table* table = nullptr;
    ASSERT_EQ(bsr_experiment_run(exp, &opt, &table), BSR_OK);
    ASSERT_EQ(bsr_phase_table_size(table), 3u);
    bsr_phase_cell c;
    ASSERT_EQ(bsr_phase_table_cell(table, 0, &c), BSR_OK);
    EXPECT_EQ(c.k, 1);
    EXPECT_EQ(c.trials, 4);
    EXPECT_EQ(bsr_phase_table_cell(table, 3, &c), BSR_E_INVALID_ARGUMENT);
    ASSERT_EQ(bsr_phase_table_comparison_count(table), 1u);
    bsr_comparison cmp;
    ASSERT_EQ(bsr_phase_table_comparison(table, 0, &cmp), BSR_OK);
    EXPECT_EQ(cmp.m, 10);
    EXPECT_DOUBLE_EQ(cmp.alpha, 0.5);
    EXPECT_GT(cmp.k_theory, 0.0);
    bsr_phase_table_free(table);

    bsr_request_stop();
    EXPECT_EQ(bsr_experiment_run(exp, &opt, &table), BSR_E_INTERRUPTED);
    bsr_clear_stop();
    bsr_experiment_free(exp);
}

TEST(CApi, Oracle) {
    bsr_instance* inst = nullptr;
    ASSERT_EQ(bsr_instance_generate(3, 2, 2, 1, 5, BSR_AMPLITUDE_GAUSSIAN, &inst), BSR_OK);
    bsr_check_result strong, weak;
    ASSERT_EQ(bsr_oracle_check(inst, BSR_STRONG, 2000, &strong), BSR_OK);
    ASSERT_EQ(bsr_oracle_check(inst, BSR_WEAK, 2000, &weak), BSR_OK);
    EXPECT_EQ(strong.nullspace_dim, 2);
    EXPECT_EQ(strong.points, 2000);
    if (strong.holds) {
        EXPECT_TRUE(weak.holds);
    }
    bsr_instance_free(inst);

    ASSERT_EQ(bsr_instance_generate(10, 2, 5, 1, 5, BSR_AMPLITUDE_GAUSSIAN, &inst), BSR_OK);
    EXPECT_EQ(bsr_oracle_check(inst, BSR_WEAK, 100, &weak), BSR_E_DIMENSION_TOO_LARGE);
    bsr_instance_free(inst);

    bsr_cross_validation cv;
    ASSERT_EQ(bsr_oracle_cross_validate(3, 2, 2, 1, 20, 1, 0, nullptr, 1, &cv), BSR_OK);
    EXPECT_EQ(cv.trials, 20);
    EXPECT_EQ(cv.agreements + cv.disagreements, 20);
}
