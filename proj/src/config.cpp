#include "loanpool/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace loanpool {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, "cannot parse number for '" + key + "': " + v);
    }
    if (used != v.size()) fail(line, "trailing characters after number for '" + key + "': " + v);
    return x;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        fail(line, "cannot parse integer for '" + key + "': " + v);
    }
    if (used != v.size()) fail(line, "trailing characters after integer for '" + key + "': " + v);
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    static const std::set<std::string> known = {"I",        "mu",         "B",       "epsilon",
                                                "r",        "alpha",      "grid_points",
                                                "quad_tol", "bisect_tol", "n_paths",
                                                "seed",     "u0",         "shirk"};
    std::map<std::string, std::pair<std::string, int>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key=value, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        if (!known.count(key)) fail(lineno, "unknown key '" + key + "'");
        if (kv.count(key)) fail(lineno, "duplicate key '" + key + "' (first on line " +
                                            std::to_string(kv[key].second) + ")");
        if (val.empty()) fail(lineno, "empty value for '" + key + "'");
        kv[key] = {val, lineno};
    }

    for (const char* req : {"I", "mu", "B", "epsilon", "r", "alpha"})
        if (!kv.count(req)) throw ConfigError("config is missing required key '" + std::string(req) + "'");

    RunConfig cfg;
    auto get = [&](const char* key) -> const std::pair<std::string, int>& { return kv.at(key); };

    {
        const auto& [v, ln] = get("I");
        const long long loans = parse_int(v, ln, "I");
        if (loans < 1) fail(ln, "I must be >= 1");
        cfg.params.loans = static_cast<int>(loans);
    }
    cfg.params.mu = parse_double(get("mu").first, get("mu").second, "mu");
    cfg.params.private_benefit = parse_double(get("B").first, get("B").second, "B");
    cfg.params.epsilon = parse_double(get("epsilon").first, get("epsilon").second, "epsilon");
    cfg.params.rate = parse_double(get("r").first, get("r").second, "r");

    {
        const auto& [v, ln] = get("alpha");
        const auto items = split_list(v);
        if (items.size() != static_cast<std::size_t>(cfg.params.loans))
            fail(ln, "alpha must list exactly I=" + std::to_string(cfg.params.loans) +
                         " values, got " + std::to_string(items.size()));
        for (const auto& it : items) cfg.params.alpha.push_back(parse_double(it, ln, "alpha"));
    }

    if (kv.count("grid_points")) {
        const auto& [v, ln] = get("grid_points");
        const long long g = parse_int(v, ln, "grid_points");
        if (g < 16) fail(ln, "grid_points must be >= 16");
        cfg.solver.grid_points = static_cast<int>(g);
    }
    if (kv.count("quad_tol")) {
        const auto& [v, ln] = get("quad_tol");
        cfg.solver.quad_tol = parse_double(v, ln, "quad_tol");
        if (!(cfg.solver.quad_tol > 0.0)) fail(ln, "quad_tol must be > 0");
    }
    if (kv.count("bisect_tol")) {
        const auto& [v, ln] = get("bisect_tol");
        cfg.solver.bisect_tol = parse_double(v, ln, "bisect_tol");
        if (!(cfg.solver.bisect_tol > 0.0)) fail(ln, "bisect_tol must be > 0");
    }
    if (kv.count("n_paths")) {
        const auto& [v, ln] = get("n_paths");
        const long long n = parse_int(v, ln, "n_paths");
        if (n < 1) fail(ln, "n_paths must be >= 1");
        cfg.sim.n_paths = n;
    }
    if (kv.count("seed")) {
        const auto& [v, ln] = get("seed");
        cfg.sim.seed = static_cast<std::uint64_t>(parse_int(v, ln, "seed"));
    }
    if (kv.count("u0")) {
        const auto& [v, ln] = get("u0");
        if (v == "auto") {
            cfg.u0_auto = true;
        } else {
            cfg.u0_auto = false;
            cfg.sim.u0 = parse_double(v, ln, "u0");
        }
    }
    if (kv.count("shirk")) {
        const auto& [v, ln] = get("shirk");
        const auto items = split_list(v);
        if (items.size() != static_cast<std::size_t>(cfg.params.loans))
            fail(ln, "shirk must list exactly I=" + std::to_string(cfg.params.loans) +
                         " values (level I first), got " + std::to_string(items.size()));
        // first entry belongs to the full pool: shirk[level j] = items[I - j]
        cfg.sim.shirk.assign(static_cast<std::size_t>(cfg.params.loans) + 1, 0);
        for (int j = cfg.params.loans; j >= 1; --j) {
            const auto& it = items[static_cast<std::size_t>(cfg.params.loans - j)];
            const long long k = parse_int(it, ln, "shirk");
            if (k < 0 || k > j)
                fail(ln, "shirk entry for level " + std::to_string(j) + " must lie in {0.." +
                             std::to_string(j) + "}, got " + it);
            cfg.sim.shirk[static_cast<std::size_t>(j)] = static_cast<int>(k);
        }
    }
    return cfg;
}

}  // namespace loanpool
