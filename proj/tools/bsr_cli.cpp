// bsr: thresholds, curves, phase experiments and the null-space oracle.
//
//   bsr threshold --kind weak --alpha 0.75 --d 500 [--epsilon 0] [--json]
//   bsr threshold --kind strong --beta 0.5 --d inf
//   bsr curve --kind strong --d 1,15,inf --points 50 --out curves/
//   bsr simulate configs/phase_grid_desk.ini [--workers 4] [--resume]
//   bsr oracle --n 3 --d 2 --m 2 --trials 200 --seed 1
//
// Exit codes: 0 success, 2 usage or configuration error, 3 mathematical
// failure (no root, null space too large), 130 interrupted, 1 anything else.

#include <csignal>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsr/bsr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMath = 3;
constexpr int kExitInterrupted = 130;

// Raised for any failure after parsing; carries the process exit code.
struct CliFailure {
    int code;
    std::string message;
};

int exit_code_for(bsr_status s) {
    switch (s) {
        case BSR_OK: return kExitOk;
        case BSR_E_DOMAIN:
        case BSR_E_CONFIG:
        case BSR_E_PRECONDITION:
        case BSR_E_INVALID_ARGUMENT:
        case BSR_E_DIMENSION_MISMATCH: return kExitUsage;
        case BSR_E_NO_ROOT:
        case BSR_E_DIMENSION_TOO_LARGE: return kExitMath;
        case BSR_E_INTERRUPTED: return kExitInterrupted;
        default: return kExitFailure;
    }
}

void check(bsr_status s) {
    if (s == BSR_OK) return;
    throw CliFailure{exit_code_for(s), std::string(bsr_status_string(s)) + ": " + bsr_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw CliFailure{kExitUsage, message}; }

// Block length: a positive integer or "inf" (the closed-form d -> infinity limit).
struct BlockLength {
    std::optional<int> value;  // empty for inf
    std::string label() const { return value ? std::to_string(*value) : "inf"; }
};

BlockLength parse_block_length(const std::string& text) {
    if (text == "inf" || text == "infinity") return {};
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size() && v >= 1 && v <= std::numeric_limits<int>::max()) {
            return {static_cast<int>(v)};
        }
    } catch (const std::exception&) {
    }
    usage("--d must be a positive integer or 'inf', got '" + text + "'");
}

bsr_kind parse_kind(const std::string& text) {
    bsr_kind kind{};
    if (bsr_parse_kind(text.c_str(), &kind) != BSR_OK) {
        usage("--kind must be strong, sectional or weak, got '" + text + "'");
    }
    return kind;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(' ');
        const auto b = item.find_last_not_of(' ');
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// ---- threshold -----------------------------------------------------------

struct ThresholdArgs {
    std::string kind = "weak";
    std::optional<double> alpha;
    std::optional<double> beta;
    std::string d = "15";
    double epsilon = 0.0;
    bool json = false;
};

struct ThresholdRow {
    double alpha = 0.0;
    double beta = 0.0;
    double theta_hat = 1.0;
};

ThresholdRow beta_for_alpha(bsr_kind kind, double alpha, const BlockLength& d, double epsilon) {
    ThresholdRow row;
    row.alpha = alpha;
    if (!d.value) {
        check(bsr_asymptotic_threshold_beta(kind, alpha, &row.beta));
        return row;
    }
    bsr_beta_threshold t{};
    check(bsr_threshold_beta(kind, alpha, *d.value, epsilon, &t));
    row.beta = t.beta;
    row.theta_hat = t.certified ? t.at.theta_hat : std::numeric_limits<double>::quiet_NaN();
    return row;
}

int run_threshold(const ThresholdArgs& a) {
    const bsr_kind kind = parse_kind(a.kind);
    const BlockLength d = parse_block_length(a.d);
    if (a.alpha.has_value() == a.beta.has_value()) usage("give exactly one of --alpha and --beta");
    if (!(a.epsilon >= 0.0 && a.epsilon < 1.0)) usage("--epsilon must lie in [0, 1)");
    if (a.alpha && !(*a.alpha > 0.0 && *a.alpha <= 1.0)) usage("--alpha must lie in (0, 1]");
    if (a.beta && !(*a.beta >= 0.0 && *a.beta < 1.0)) usage("--beta must lie in [0, 1)");

    ThresholdRow row;
    if (a.alpha) {
        row = beta_for_alpha(kind, *a.alpha, d, a.epsilon);
    } else {
        row.beta = *a.beta;
        if (!d.value) {
            check(bsr_asymptotic_required_alpha(kind, row.beta, &row.alpha));
        } else {
            bsr_theta_result r{};
            check(bsr_required_alpha(kind, row.beta, *d.value, a.epsilon, &r));
            row.alpha = r.required_alpha;
            row.theta_hat = r.theta_hat;
        }
    }

    if (a.json) {
        nlohmann::json j;
        j["kind"] = bsr_kind_name(kind);
        if (d.value) {
            j["d"] = *d.value;
        } else {
            j["d"] = "inf";
        }
        j["alpha"] = row.alpha;
        j["beta"] = row.beta;
        if (std::isfinite(row.theta_hat)) {
            j["theta_hat"] = row.theta_hat;
        } else {
            j["theta_hat"] = nullptr;
        }
        j["epsilon"] = a.epsilon;
        std::cout << j.dump() << '\n';
    } else {
        std::cout << format_number(a.alpha ? row.beta : row.alpha) << '\n';
    }
    return kExitOk;
}

// ---- curve ---------------------------------------------------------------

struct CurveArgs {
    std::vector<std::string> kinds{"strong"};
    std::string d_list = "1,15,inf";
    std::string alphas;  // explicit comma list, overrides the range
    double alpha_start = 0.02;
    double alpha_stop = 1.0;
    int points = 50;
    double epsilon = 0.0;
    std::string out = ".";
};

std::vector<double> alpha_grid(const CurveArgs& a) {
    std::vector<double> grid;
    if (!a.alphas.empty()) {
        for (const auto& s : split_list(a.alphas)) {
            try {
                std::size_t used = 0;
                grid.push_back(std::stod(s, &used));
                if (used != s.size()) throw std::invalid_argument(s);
            } catch (const std::exception&) {
                usage("--alphas: not a number: '" + s + "'");
            }
        }
    } else {
        if (a.points < 0) usage("--points must be >= 0");
        for (int i = 0; i < a.points; ++i) {
            const double t = a.points == 1 ? 0.0 : double(i) / (a.points - 1);
            grid.push_back(a.alpha_start + t * (a.alpha_stop - a.alpha_start));
        }
    }
    if (grid.empty()) usage("the alpha grid is empty");
    for (double alpha : grid) {
        if (!(alpha > 0.0 && alpha <= 1.0)) usage("alpha grid values must lie in (0, 1]");
    }
    return grid;
}

int run_curve(const CurveArgs& a) {
    std::vector<bsr_kind> kinds;
    for (const auto& k : a.kinds) {
        for (const auto& item : split_list(k)) kinds.push_back(parse_kind(item));
    }
    std::vector<BlockLength> lengths;
    for (const auto& item : split_list(a.d_list)) lengths.push_back(parse_block_length(item));
    if (kinds.empty() || lengths.empty()) usage("--kind and --d must be nonempty");
    const auto grid = alpha_grid(a);
    if (!(a.epsilon >= 0.0 && a.epsilon < 1.0)) usage("--epsilon must lie in [0, 1)");

    std::error_code ec;
    std::filesystem::create_directories(a.out, ec);
    if (ec) throw CliFailure{kExitFailure, "cannot create directory " + a.out + ": " + ec.message()};

    for (bsr_kind kind : kinds) {
        for (const auto& d : lengths) {
            const auto path = std::filesystem::path(a.out) /
                              (std::string(bsr_kind_name(kind)) + "_d" + d.label() + ".csv");
            std::ofstream out(path);
            if (!out) throw CliFailure{kExitFailure, "cannot write " + path.string()};
            out << "# bsr " << bsr_version() << " curve kind=" << bsr_kind_name(kind)
                << " d=" << d.label() << " epsilon=" << format_number(a.epsilon)
                << " points=" << grid.size() << " alpha_min=" << format_number(grid.front())
                << " alpha_max=" << format_number(grid.back()) << '\n';
            out << "alpha,beta,theta_hat\n";
            for (double alpha : grid) {
                const auto row = beta_for_alpha(kind, alpha, d, a.epsilon);
                out << format_number(row.alpha) << ',' << format_number(row.beta) << ','
                    << (std::isfinite(row.theta_hat) ? format_number(row.theta_hat) : "nan")
                    << '\n';
            }
            out.close();
            if (!out) throw CliFailure{kExitFailure, "write failed: " + path.string()};
            std::cout << path.string() << '\n';
        }
    }
    return kExitOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    int workers = 0;
    bool resume = false;
    bool no_persist = false;
};

extern "C" void on_interrupt(int) { bsr_request_stop(); }

struct Experiment {
    bsr_experiment* handle = nullptr;
    ~Experiment() { bsr_experiment_free(handle); }
};
struct Table {
    bsr_phase_table* handle = nullptr;
    ~Table() { bsr_phase_table_free(handle); }
};

int run_simulate(const SimulateArgs& a) {
    if (a.workers < 0) usage("--workers must be >= 0");
    Experiment exp;
    check(bsr_experiment_load(a.config.c_str(), &exp.handle));
    bsr_experiment_summary summary{};
    check(bsr_experiment_summary_get(exp.handle, &summary));
    std::cerr << "simulate: n=" << summary.n << " d=" << summary.d << " cells=" << summary.cells
              << " trials=" << summary.trials << " seed=" << summary.seed << '\n';

    bsr_clear_stop();
    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);
    bsr_run_options opts{a.workers, a.resume ? 1 : 0, a.no_persist ? 0 : 1};
    Table table;
    const bsr_status s = bsr_experiment_run(exp.handle, &opts, &table.handle);
    std::signal(SIGINT, SIG_DFL);
    std::signal(SIGTERM, SIG_DFL);
    if (s == BSR_E_INTERRUPTED && summary.output[0] != '\0' && !a.no_persist) {
        std::cerr << "interrupted; completed cells kept in " << summary.output
                  << ".csv, rerun with --resume\n";
    }
    check(s);

    std::cout << "m,k,trials,failures,nonconverged\n";
    for (size_t i = 0; i < bsr_phase_table_size(table.handle); ++i) {
        bsr_phase_cell c{};
        check(bsr_phase_table_cell(table.handle, i, &c));
        std::cout << c.m << ',' << c.k << ',' << c.trials << ',' << c.failures << ','
                  << c.nonconverged << '\n';
    }
    std::cout << "\nm,alpha,k50,k_theory,delta\n";
    for (size_t i = 0; i < bsr_phase_table_comparison_count(table.handle); ++i) {
        bsr_comparison c{};
        check(bsr_phase_table_comparison(table.handle, i, &c));
        std::cout << c.m << ',' << format_number(c.alpha) << ',';
        if (c.has_k50) {
            std::cout << std::setprecision(4) << c.k50 << ',' << c.k_theory << ',' << c.delta;
        } else {
            std::cout << "," << std::setprecision(4) << c.k_theory << ",  # " << c.error;
        }
        std::cout << '\n';
    }
    return kExitOk;
}

// ---- oracle --------------------------------------------------------------

struct OracleArgs {
    int n = 3;
    int d = 2;
    int m = 2;
    int k = 1;
    int trials = 200;
    std::uint64_t seed = 1;
    int grid = 0;
    int workers = 0;
    bool json = false;
};

int run_oracle(const OracleArgs& a) {
    if (a.n < 1 || a.d < 1 || a.m < 1 || a.m > a.n) usage("need n, d >= 1 and 1 <= m <= n");
    if (a.k < 0 || a.k > a.n) usage("--k must lie in [0, n]");
    if (a.trials < 1) usage("--trials must be >= 1");
    if (a.grid < 0 || a.workers < 0) usage("--grid and --workers must be >= 0");

    bsr_solver_config cfg;
    bsr_solver_config_default(&cfg);
    bsr_cross_validation cv{};
    check(bsr_oracle_cross_validate(a.n, a.d, a.m, a.k, a.trials, a.seed, a.grid, &cfg, a.workers,
                                    &cv));
    const double rate = double(cv.agreements) / cv.trials;
    if (a.json) {
        nlohmann::json j{{"n", a.n},
                         {"d", a.d},
                         {"m", a.m},
                         {"k", a.k},
                         {"seed", a.seed},
                         {"trials", cv.trials},
                         {"agreements", cv.agreements},
                         {"agreement_rate", rate},
                         {"disagreements", cv.disagreements},
                         {"boundary_disagreements", cv.boundary_disagreements},
                         {"indeterminate", cv.indeterminate},
                         {"solver_successes", cv.solver_successes},
                         {"oracle_holds", cv.oracle_holds}};
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "trials " << cv.trials << "\nagreement " << cv.agreements << '/' << cv.trials
                  << " (" << std::fixed << std::setprecision(1) << 100.0 * rate << "%)\n"
                  << "disagreements " << cv.disagreements << " (boundary "
                  << cv.boundary_disagreements << ")\n"
                  << "indeterminate " << cv.indeterminate << '\n'
                  << "solver successes " << cv.solver_successes << ", oracle holds "
                  << cv.oracle_holds << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-sparse l2/l1 recovery thresholds and phase experiments"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string("bsr ") + bsr_version());

    ThresholdArgs ta;
    auto* threshold = app.add_subcommand("threshold", "beta threshold for an alpha, or alpha for a beta");
    threshold->add_option("--kind", ta.kind, "strong, sectional or weak")->capture_default_str();
    threshold->add_option("--alpha", ta.alpha, "measurement ratio m/n in (0, 1]");
    threshold->add_option("--beta", ta.beta, "block sparsity k/n in [0, 1)");
    threshold->add_option("--d", ta.d, "block length, or inf")->capture_default_str();
    threshold->add_option("--epsilon", ta.epsilon, "slack in [0, 1)")->capture_default_str();
    threshold->add_flag("--json", ta.json, "emit a JSON object");

    CurveArgs ca;
    auto* curve = app.add_subcommand("curve", "write alpha,beta,theta_hat CSVs per kind and d");
    curve->add_option("--kind", ca.kinds, "kinds (repeat or comma separate)")->capture_default_str();
    curve->add_option("--d", ca.d_list, "comma separated block lengths, inf allowed")->capture_default_str();
    curve->add_option("--alphas", ca.alphas, "explicit comma separated alpha grid");
    curve->add_option("--alpha-start", ca.alpha_start)->capture_default_str();
    curve->add_option("--alpha-stop", ca.alpha_stop)->capture_default_str();
    curve->add_option("--points", ca.points, "number of grid points")->capture_default_str();
    curve->add_option("--epsilon", ca.epsilon)->capture_default_str();
    curve->add_option("--out", ca.out, "output directory")->capture_default_str();

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "run a phase-transition experiment");
    simulate->add_option("config", sa.config, "experiment file (INI)")->required();
    simulate->add_option("--workers", sa.workers, "worker threads, 0 = configured value");
    simulate->add_flag("--resume", sa.resume, "continue an interrupted run");
    simulate->add_flag("--no-persist", sa.no_persist, "do not write output files");

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "solver vs null-space condition on tiny instances");
    oracle->add_option("--n", oa.n)->capture_default_str();
    oracle->add_option("--d", oa.d)->capture_default_str();
    oracle->add_option("--m", oa.m)->capture_default_str();
    oracle->add_option("--k", oa.k)->capture_default_str();
    oracle->add_option("--trials", oa.trials)->capture_default_str();
    oracle->add_option("--seed", oa.seed)->capture_default_str();
    oracle->add_option("--grid", oa.grid, "sphere grid points, 0 = default")->capture_default_str();
    oracle->add_option("--workers", oa.workers)->capture_default_str();
    oracle->add_flag("--json", oa.json, "emit a JSON object");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (threshold->parsed()) return run_threshold(ta);
        if (curve->parsed()) return run_curve(ca);
        if (simulate->parsed()) return run_simulate(sa);
        if (oracle->parsed()) return run_oracle(oa);
    } catch (const CliFailure& f) {
        std::cerr << "bsr: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "bsr: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
