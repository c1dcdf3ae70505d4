#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "loanpool/config.hpp"
#include "loanpool/export.hpp"
#include "loanpool/mcsim.hpp"
#include "loanpool/params.hpp"
#include "loanpool/policy.hpp"
#include "loanpool/sha256.hpp"
#include "loanpool/solver.hpp"

namespace {

using namespace loanpool;

constexpr int kExitOk = 0;
constexpr int kExitCondition = 1;
constexpr int kExitStatistical = 2;
constexpr int kExitIo = 3;

struct Cli {
    std::string config_path;
    std::string out_dir = "out";
    long long paths_override = -1;
    long long seed_override = -1;
    double u0_override = std::numeric_limits<double>::quiet_NaN();
    int threads = 1;
    bool events = false;
};

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

RunConfig load_config(const Cli& cli) {
    RunConfig cfg = parse_config(cli.config_path);
    if (cli.paths_override > 0) cfg.sim.n_paths = cli.paths_override;
    if (cli.seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(cli.seed_override);
    if (!std::isnan(cli.u0_override)) {
        cfg.u0_auto = false;
        cfg.sim.u0 = cli.u0_override;
    }
    cfg.sim.threads = cli.threads;
    cfg.sim.record_events = cli.events;
    return cfg;
}

void print_assumptions(const AssumptionReport& rep) {
    for (const auto& c : rep.conditions)
        std::printf("  %-34s %s  margin=%s\n", c.name.c_str(), c.holds ? "holds " : "FAILED",
                    format_full(c.margin).c_str());
    std::printf("overall: %s\n", rep.overall ? "PASS" : "FAIL");
}

int cmd_check(const Cli& cli) {
    const RunConfig cfg = load_config(cli);
    const auto derived = derive(cfg.params);
    const auto rep = check_assumptions(cfg.params, derived);
    std::printf("derived: first-best = %s\n", format_full(derived.first_best).c_str());
    for (int j = 1; j <= cfg.params.loans; ++j)
        std::printf("  level %d: b=%s lambda=%s alpha_bar=%s\n", j,
                    format_full(derived.b[static_cast<std::size_t>(j)]).c_str(),
                    format_full(derived.lambda[static_cast<std::size_t>(j)]).c_str(),
                    format_full(derived.alpha_bar[static_cast<std::size_t>(j)]).c_str());
    print_assumptions(rep);
    return rep.overall ? kExitOk : kExitCondition;
}

int cmd_solve(const Cli& cli) {
    RunConfig cfg = load_config(cli);
    const auto derived = derive(cfg.params);
    const auto rep = check_assumptions(cfg.params, derived);

    std::map<std::string, double> timings;
    const double t0 = now_ms();
    const auto vf = build_all(cfg.params, derived, cfg.solver);
    timings["solve"] = now_ms() - t0;

    const double u0 = cfg.u0_auto ? vf.level(vf.loans()).gamma : cfg.sim.u0;

    std::filesystem::create_directories(cli.out_dir);
    const std::string value_csv = cli.out_dir + "/value_functions.csv";
    write_value_csv(vf, value_csv);
    write_boundaries_csv(vf, cli.out_dir + "/boundaries.csv");
    write_manifest(cli.out_dir + "/manifest.txt", cfg, u0, vf, rep, timings,
                   sha256_file_hex(value_csv));

    for (int j = 1; j <= vf.loans(); ++j)
        std::printf("level %d: gamma=%s vbar=%s v(gamma)=%s\n", j,
                    format_full(vf.level(j).gamma).c_str(), format_full(vf.level(j).vbar).c_str(),
                    format_full(vf.level(j).value_gamma).c_str());
    std::printf("wrote %s, boundaries.csv, manifest.txt\n", value_csv.c_str());
    return kExitOk;
}

int cmd_simulate(const Cli& cli) {
    RunConfig cfg = load_config(cli);
    const auto derived = derive(cfg.params);
    const auto vf = build_all(cfg.params, derived, cfg.solver);
    const auto pol = make_policy(vf);
    if (cfg.u0_auto) cfg.sim.u0 = pol.gamma.back();
    cfg.sim.shirk.clear();  // simulate verifies the monitored contract

    std::vector<PathRecord> paths;
    const auto rep = estimate(cfg.params, vf, pol, cfg.sim, cli.events ? &paths : nullptr);

    std::printf("simulate: paths=%lld seed=%llu u0=%s\n", rep.stats.n_paths,
                static_cast<unsigned long long>(cfg.sim.seed), format_full(cfg.sim.u0).c_str());
    if (rep.stats.n_flagged > 0)
        std::printf("warning: %lld paths exceeded the horizon cap and were excluded\n",
                    rep.stats.n_flagged);
    std::printf("bank:     mean=%s se=%s target=%s %s\n", format_full(rep.stats.mean_bank).c_str(),
                format_full(rep.stats.se_bank).c_str(), format_full(rep.target_bank).c_str(),
                rep.bank_ok ? "PASS" : "FAIL");
    std::printf("investor: mean=%s se=%s target=%s %s\n",
                format_full(rep.stats.mean_investor).c_str(),
                format_full(rep.stats.se_investor).c_str(), format_full(rep.target_investor).c_str(),
                rep.investor_ok ? "PASS" : "FAIL");

    if (cli.events) {
        std::filesystem::create_directories(cli.out_dir);
        write_events_csv(paths, cli.out_dir + "/events.csv");
        std::printf("wrote %s/events.csv\n", cli.out_dir.c_str());
    }
    const bool ok = rep.bank_ok && rep.investor_ok;
    std::printf("result: %s\n", ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitStatistical;
}

int cmd_ictest(const Cli& cli) {
    RunConfig cfg = load_config(cli);
    const auto derived = derive(cfg.params);
    const auto vf = build_all(cfg.params, derived, cfg.solver);
    const auto pol = make_policy(vf);
    if (cfg.u0_auto) cfg.sim.u0 = pol.gamma.back();

    std::vector<std::pair<std::string, std::vector<int>>> profiles;
    if (!cfg.sim.shirk.empty() && !cfg.sim.shirk_all_zero())
        profiles.emplace_back("configured", cfg.sim.shirk);
    std::vector<int> full(static_cast<std::size_t>(cfg.params.loans) + 1, 0);
    for (int j = 1; j <= cfg.params.loans; ++j) full[static_cast<std::size_t>(j)] = j;
    profiles.emplace_back("full-shirk", full);

    bool all_ok = true;
    for (const auto& [name, shirk] : profiles) {
        SimConfig sim = cfg.sim;
        sim.shirk = shirk;
        const auto rep = deviation_utility(cfg.params, vf, pol, sim);
        all_ok = all_ok && rep.ic_ok;
        std::printf("ictest[%s]: mean=%s se=%s u0=%s %s\n", name.c_str(),
                    format_full(rep.stats.mean_bank).c_str(),
                    format_full(rep.stats.se_bank).c_str(), format_full(rep.u0).c_str(),
                    rep.ic_ok ? "PASS" : "FAIL");
    }
    std::printf("result: %s\n", all_ok ? "PASS" : "FAIL");
    return all_ok ? kExitOk : kExitStatistical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver and Monte Carlo verifier for the optimal loan-pool monitoring contract"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config", cli.config_path, "key=value configuration file")->required();
    app.add_option("--out", cli.out_dir, "output directory (default: out)");
    app.add_option("--paths", cli.paths_override, "override n_paths");
    app.add_option("--seed", cli.seed_override, "override seed");
    app.add_option("--u0", cli.u0_override, "override the initial bank utility");
    app.add_option("--threads", cli.threads, "simulation worker threads (default: 1)");
    app.add_flag("--events", cli.events, "write a per-path event log CSV");

    auto* check = app.add_subcommand("check", "validate parameters and standing assumptions");
    auto* solve = app.add_subcommand("solve", "build the value functions and export them");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo verification of the contract");
    auto* ictest = app.add_subcommand("ictest", "Monte Carlo incentive-compatibility test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;  // usage errors count as parse failures
    }

    try {
        if (check->parsed()) return cmd_check(cli);
        if (solve->parsed()) return cmd_solve(cli);
        if (simulate->parsed()) return cmd_simulate(cli);
        if (ictest->parsed()) return cmd_ictest(cli);
    } catch (const loanpool::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const loanpool::ConditionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCondition;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCondition;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCondition;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitOk;
}
