#include "bsr/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bsr/errors.hpp"
#include "bsr/threshold_engine.hpp"
#include "bsr/version.hpp"
#include "parallel.hpp"

namespace bsr::experiment {
namespace {

std::atomic<bool> g_stop{false};

struct TrialOutcome {
    bool success = false;
    bool converged = false;
};

std::string join(const std::vector<int>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
    return os.str();
}

std::string_view amplitude_name(Amplitude a) {
    return a == Amplitude::kGaussian ? "gaussian" : "unit_norm";
}

void write_cell_row(std::ostream& os, const PhaseCell& c) {
    os << c.m << ',' << c.k << ',' << c.trials << ',' << c.failures << ',' << c.nonconverged
       << ',' << c.seed_base << '\n';
}

constexpr const char* kTableHeader = "m,k,trials,failures,nonconverged,seed_base";

std::ofstream open_for_write(const std::string& path, std::ios::openmode mode = std::ios::out) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, mode);
    if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
    out << std::setprecision(17);
    return out;
}

}  // namespace

void request_stop() noexcept { g_stop.store(true); }
void clear_stop() noexcept { g_stop.store(false); }
bool stop_requested() noexcept { return g_stop.load(); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t master, int m, int k) {
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 32) |
                              static_cast<std::uint32_t>(k);
    return splitmix64(master ^ splitmix64(key));
}

ProblemInstance generate_instance(const BlockDims& dims, std::uint64_t seed, Amplitude amplitude) {
    dims.validate();
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);

    ProblemInstance inst;
    inst.dims = dims;
    inst.seed = seed;
    inst.matrix.resize(dims.rows(), dims.ambient());
    for (Eigen::Index i = 0; i < inst.matrix.size(); ++i) inst.matrix.data()[i] = normal(rng);

    std::vector<int> order(dims.n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < dims.k; ++i) {
        std::uniform_int_distribution<int> pick(i, dims.n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::vector<int> support(order.begin(), order.begin() + dims.k);
    std::sort(support.begin(), support.end());

    Vector x = Vector::Zero(dims.ambient());
    for (int block : support) {
        auto seg = x.segment(static_cast<Eigen::Index>(block) * dims.d, dims.d);
        do {
            for (int j = 0; j < dims.d; ++j) seg[j] = normal(rng);
        } while (seg.squaredNorm() == 0.0);
        if (amplitude == Amplitude::kUnitNorm) seg.normalize();
    }
    inst.planted = BlockSignal(std::move(x), dims.d);
    inst.measurements = inst.matrix * inst.planted.values();
    return inst;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (n < 1 || d < 1) fail("n and d must be >= 1");
    if (trials < 1) fail("trials must be >= 1");
    if (m_list.empty()) fail("at least one m is required");
    for (int m : m_list) {
        if (m < 1 || m > n) fail("m=" + std::to_string(m) + " outside [1, n]");
    }
    for (const auto& [m, ks] : k_lists) {
        if (std::find(m_list.begin(), m_list.end(), m) == m_list.end()) {
            fail("k list given for m=" + std::to_string(m) + " which is not in the m list");
        }
        for (int k : ks) {
            if (k < 0 || k > n) fail("k=" + std::to_string(k) + " outside [0, n]");
        }
    }
    if (!(theory_epsilon >= 0.0 && theory_epsilon < 1.0)) fail("theory epsilon outside [0, 1)");
    try {
        solver.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
}

PhaseCell run_cell(const BlockDims& dims, int trials, const solver::SolverConfig& config,
                   std::uint64_t seed_base, int workers, Amplitude amplitude) {
    dims.validate();
    config.validate();
    if (trials < 1) throw DomainError("run_cell: trials must be >= 1");

    std::vector<TrialOutcome> outcomes(trials);
    detail::parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
        if (stop_requested()) throw Error(ErrorCode::kInterrupted, "interrupted");
        const auto inst = generate_instance(dims, trial_seed(seed_base, static_cast<int>(t)), amplitude);
        const auto report = solver::solve_l2l1(inst, config);
        outcomes[t].converged = report.converged;
        outcomes[t].success =
            solver::recovery_success(report.estimate, inst.planted, config.success_tol);
    });

    PhaseCell cell;
    cell.m = dims.m;
    cell.k = dims.k;
    cell.trials = trials;
    cell.tolerance_used = config.success_tol;
    cell.seed_base = seed_base;
    for (const auto& o : outcomes) {
        cell.failures += o.success ? 0 : 1;
        cell.nonconverged += o.converged ? 0 : 1;
    }
    return cell;
}

std::string table_csv_path(const std::string& prefix) { return prefix + ".csv"; }
std::string sidecar_path(const std::string& prefix) { return prefix + ".json"; }
std::string overlay_path(const std::string& prefix) { return prefix + "_theory.csv"; }

std::string parameter_echo(const ExperimentConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17) << "n=" << c.n << " d=" << c.d << " trials=" << c.trials
       << " seed=" << c.master_seed << " m=" << join(c.m_list);
    for (const auto& [m, ks] : c.k_lists) os << " k[" << m << "]=" << join(ks);
    os << " penalty=" << c.solver.penalty << " max_iters=" << c.solver.max_iters
       << " primal_tol=" << c.solver.primal_tol << " dual_tol=" << c.solver.dual_tol
       << " success_tol=" << c.solver.success_tol << " amplitude=" << amplitude_name(c.amplitude)
       << " theory_epsilon=" << c.theory_epsilon;
    return os.str();
}

void write_table_csv(const PhaseTable& table, const std::string& path) {
    auto out = open_for_write(path);
    out << "# bsr " << kVersion << " phase-table " << parameter_echo(table.config) << '\n'
        << kTableHeader << '\n';
    for (const auto& c : table.cells) write_cell_row(out, c);
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_overlay_csv(const PhaseTable& table, const std::string& path) {
    auto out = open_for_write(path);
    out << "# bsr " << kVersion << " weak-threshold-overlay " << parameter_echo(table.config)
        << '\n'
        << "alpha,beta_weak_theory\n";
    for (const auto& p : table.overlay) out << p.alpha << ',' << p.beta_weak << '\n';
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_sidecar_json(const ExperimentConfig& c, const std::string& path, bool complete) {
    nlohmann::json j;
    j["comment"] = "bsr " + std::string(kVersion) + " phase-table config " + parameter_echo(c);
    j["version"] = std::string(kVersion);
    j["n"] = c.n;
    j["d"] = c.d;
    j["trials"] = c.trials;
    j["seed"] = c.master_seed;
    j["m_list"] = c.m_list;
    nlohmann::json ks = nlohmann::json::object();
    for (const auto& [m, list] : c.k_lists) ks[std::to_string(m)] = list;
    j["k_lists"] = ks;
    j["solver"] = {{"penalty", c.solver.penalty},       {"max_iters", c.solver.max_iters},
                   {"primal_tol", c.solver.primal_tol}, {"dual_tol", c.solver.dual_tol},
                   {"success_tol", c.solver.success_tol}};
    j["amplitude"] = std::string(amplitude_name(c.amplitude));
    j["theory_epsilon"] = c.theory_epsilon;
    j["output"] = c.output;
    j["complete"] = complete;
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::vector<PhaseCell> read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path);
    std::vector<PhaseCell> cells;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == kTableHeader) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        PhaseCell c;
        if (!(row >> c.m >> c.k >> c.trials >> c.failures >> c.nonconverged >> c.seed_base)) {
            throw Error(ErrorCode::kIo, "malformed phase-table row in " + path);
        }
        cells.push_back(c);
    }
    return cells;
}

PhaseTable run_grid(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const int workers = options.workers > 0 ? options.workers : config.workers;
    const bool persist = options.persist && !config.output.empty();
    const std::string csv = table_csv_path(config.output);
    const std::string marker = csv + ".partial";

    PhaseTable table;
    table.config = config;

    std::map<std::pair<int, int>, PhaseCell> done;
    if (persist && options.resume && std::filesystem::exists(marker) &&
        std::filesystem::exists(csv)) {
        for (const auto& c : read_table_csv(csv)) {
            if (c.trials == config.trials && c.seed_base == cell_seed(config.master_seed, c.m, c.k)) {
                done[{c.m, c.k}] = c;
            }
        }
    }

    std::ofstream sink;
    if (persist) {
        write_sidecar_json(config, sidecar_path(config.output), false);
        open_for_write(marker) << "resume marker: " << csv << '\n';
        sink = open_for_write(csv);
        sink << "# bsr " << kVersion << " phase-table " << parameter_echo(config) << '\n'
             << kTableHeader << '\n';
    }

    for (int m : config.m_list) {
        const auto it = config.k_lists.find(m);
        if (it == config.k_lists.end()) continue;
        for (int k : it->second) {
            PhaseCell cell;
            if (auto hit = done.find({m, k}); hit != done.end()) {
                cell = hit->second;
                cell.tolerance_used = config.solver.success_tol;
            } else {
                if (stop_requested()) throw Error(ErrorCode::kInterrupted, "interrupted");
                const BlockDims dims{config.n, config.d, m, k};
                cell = run_cell(dims, config.trials, config.solver,
                                cell_seed(config.master_seed, m, k), workers, config.amplitude);
            }
            table.cells.push_back(cell);
            if (persist) {
                write_cell_row(sink, cell);
                sink.flush();
            }
        }
    }

    if (options.overlay) {
        std::set<int> ms(config.m_list.begin(), config.m_list.end());
        for (int m : ms) {
            const double alpha = static_cast<double>(m) / config.n;
            const auto t = threshold::threshold_beta(threshold::Kind::kWeak, alpha, config.d,
                                                     config.theory_epsilon);
            table.overlay.push_back({alpha, t.beta});
        }
    }

    if (persist) {
        sink.close();
        if (options.overlay) write_overlay_csv(table, overlay_path(config.output));
        write_sidecar_json(config, sidecar_path(config.output), true);
        std::filesystem::remove(marker);
    }
    return table;
}

double empirical_k50(std::vector<PhaseCell> cells) {
    std::sort(cells.begin(), cells.end(),
              [](const PhaseCell& a, const PhaseCell& b) { return a.k < b.k; });
    for (std::size_t j = 0; j < cells.size(); ++j) {
        const double f = cells[j].failure_fraction();
        if (f < 0.5) continue;
        if (j == 0) break;
        const double f0 = cells[j - 1].failure_fraction();
        const double k0 = cells[j - 1].k;
        return k0 + (0.5 - f0) / (f - f0) * (cells[j].k - k0);
    }
    std::ostringstream os;
    os << "failure fractions do not straddle 50%";
    if (!cells.empty()) os << " for m=" << cells.front().m;
    throw Error(ErrorCode::kNoBracket, os.str());
}

std::vector<TheoryComparison> compare_to_theory(const PhaseTable& table, int d) {
    std::map<int, std::vector<PhaseCell>> by_m;
    for (const auto& c : table.cells) by_m[c.m].push_back(c);

    const int n = table.config.n;
    std::vector<TheoryComparison> out;
    for (const auto& [m, cells] : by_m) {
        TheoryComparison row;
        row.m = m;
        row.alpha = static_cast<double>(m) / n;
        std::optional<double> beta;
        if (d == table.config.d) {
            for (const auto& p : table.overlay) {
                if (p.alpha == row.alpha) beta = p.beta_weak;
            }
        }
        if (!beta) {
            beta = threshold::threshold_beta(threshold::Kind::kWeak, row.alpha, d,
                                             table.config.theory_epsilon)
                       .beta;
        }
        row.k_theory = n * *beta;
        try {
            row.k50 = empirical_k50(cells);
            row.delta = *row.k50 - row.k_theory;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoBracket) throw;
            row.error = e.what();
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace bsr::experiment
