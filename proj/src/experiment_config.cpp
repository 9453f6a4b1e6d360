// INI-style experiment configuration:
//
//   [experiment]  n, d, trials, seed, amplitude, output, workers, theory_epsilon
//   [sweep]       m = <list>; k = <list> (default k list for every m)
//   [k]           <m> = <list>   (k list for one m, overrides the default)
//   [solver]      penalty, max_iters, primal_tol, dual_tol, success_tol
//
// A <list> is comma or space separated integers and inclusive ranges a..b.
// '#' and ';' start comments. Unknown sections or keys are rejected.

#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bsr/errors.hpp"
#include "bsr/experiment_harness.hpp"

namespace bsr::experiment {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

long long parse_integer(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
    }
    return value;
}

std::uint64_t parse_seed(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("'" + key + "': expected an unsigned 64-bit integer, got '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
    }
    return value;
}

int parse_int(const std::string& text, const std::string& key) {
    const long long v = parse_integer(text, key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("'" + key + "': value out of range");
    }
    return static_cast<int>(v);
}

std::vector<int> parse_list(const std::string& text, const std::string& key) {
    std::string s = text;
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<int> out;
    std::string token;
    while (in >> token) {
        if (const auto dots = token.find(".."); dots != std::string::npos) {
            const int lo = parse_int(token.substr(0, dots), key);
            const int hi = parse_int(token.substr(dots + 2), key);
            if (hi < lo) throw ConfigError("'" + key + "': empty range '" + token + "'");
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(parse_int(token, key));
        }
    }
    return out;
}

void reject_unknown(const pt::ptree& section, const std::string& name,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, _] : section) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
}

std::string strip_comments(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        out << line << '\n';
    }
    return out.str();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(strip_comments(text));
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }

    for (const auto& [name, _] : tree) {
        if (name != "experiment" && name != "sweep" && name != "k" && name != "solver") {
            throw ConfigError("unknown section [" + name + "]");
        }
    }

    ExperimentConfig cfg;
    const pt::ptree exp = tree.get_child("experiment", pt::ptree());
    reject_unknown(exp, "experiment",
                   {"n", "d", "trials", "seed", "amplitude", "output", "workers", "theory_epsilon"});
    if (!exp.count("n") || !exp.count("d")) throw ConfigError("[experiment] requires n and d");
    cfg.n = parse_int(exp.get<std::string>("n"), "n");
    cfg.d = parse_int(exp.get<std::string>("d"), "d");
    if (auto v = exp.get_optional<std::string>("trials")) cfg.trials = parse_int(*v, "trials");
    if (auto v = exp.get_optional<std::string>("seed")) cfg.master_seed = parse_seed(*v, "seed");
    if (auto v = exp.get_optional<std::string>("workers")) cfg.workers = parse_int(*v, "workers");
    if (auto v = exp.get_optional<std::string>("output")) cfg.output = trim(*v);
    if (auto v = exp.get_optional<std::string>("theory_epsilon")) {
        cfg.theory_epsilon = parse_real(*v, "theory_epsilon");
    }
    if (auto v = exp.get_optional<std::string>("amplitude")) {
        const std::string a = trim(*v);
        if (a == "gaussian") {
            cfg.amplitude = Amplitude::kGaussian;
        } else if (a == "unit_norm") {
            cfg.amplitude = Amplitude::kUnitNorm;
        } else {
            throw ConfigError("amplitude must be 'gaussian' or 'unit_norm', got '" + a + "'");
        }
    }

    const pt::ptree sweep = tree.get_child("sweep", pt::ptree());
    reject_unknown(sweep, "sweep", {"m", "k"});
    if (!sweep.count("m")) throw ConfigError("[sweep] requires m");
    cfg.m_list = parse_list(sweep.get<std::string>("m"), "m");
    if (auto v = sweep.get_optional<std::string>("k")) {
        const auto ks = parse_list(*v, "k");
        for (int m : cfg.m_list) cfg.k_lists[m] = ks;
    }
    const pt::ptree klists = tree.get_child("k", pt::ptree());
    for (const auto& [key, value] : klists) {
        const int m = parse_int(key, "[k] key");
        cfg.k_lists[m] = parse_list(value.data(), "k." + key);
    }

    const pt::ptree sol = tree.get_child("solver", pt::ptree());
    reject_unknown(sol, "solver", {"penalty", "max_iters", "primal_tol", "dual_tol", "success_tol"});
    if (auto v = sol.get_optional<std::string>("penalty")) cfg.solver.penalty = parse_real(*v, "penalty");
    if (auto v = sol.get_optional<std::string>("max_iters")) cfg.solver.max_iters = parse_int(*v, "max_iters");
    if (auto v = sol.get_optional<std::string>("primal_tol")) cfg.solver.primal_tol = parse_real(*v, "primal_tol");
    if (auto v = sol.get_optional<std::string>("dual_tol")) cfg.solver.dual_tol = parse_real(*v, "dual_tol");
    if (auto v = sol.get_optional<std::string>("success_tol")) cfg.solver.success_tol = parse_real(*v, "success_tol");

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

}  // namespace bsr::experiment
