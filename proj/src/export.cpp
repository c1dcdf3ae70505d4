#include "loanpool/export.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace loanpool {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

const char* region_of(const ValueFunctionLevel& lvl, double x) {
    if (x < lvl.b) return "linear-low";
    if (x >= lvl.gamma) return "linear-high";
    if (lvl.level >= 2 && x < lvl.b + lvl.b_prev) return "probation";
    return "interior";
}

const char* event_name(EventKind k) {
    switch (k) {
        case EventKind::default_maintained: return "default-maintained";
        case EventKind::default_liquidated: return "default-liquidated";
        case EventKind::cap_reached: return "cap-reached";
    }
    return "?";
}

}  // namespace

std::string format_full(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

void write_value_csv(const ValueFunctions& vf, const std::string& path) {
    auto out = open_out(path);
    out << "j,u,v,dv_left,dv_right,region\n";
    for (int j = 1; j <= vf.loans(); ++j) {
        const auto& lvl = vf.level(j);
        for (std::size_t i = 0; i < lvl.u.size(); ++i)
            out << j << ',' << format_full(lvl.u[i]) << ',' << format_full(lvl.v[i]) << ','
                << format_full(lvl.dv_left[i]) << ',' << format_full(lvl.dv_right[i]) << ','
                << region_of(lvl, lvl.u[i]) << '\n';
    }
}

void write_boundaries_csv(const ValueFunctions& vf, const std::string& path) {
    auto out = open_out(path);
    out << "j,b,probation_end,gamma,vbar\n";
    for (int j = 1; j <= vf.loans(); ++j) {
        const auto& lvl = vf.level(j);
        out << j << ',' << format_full(lvl.b) << ',' << format_full(lvl.b + lvl.b_prev) << ','
            << format_full(lvl.gamma) << ',' << format_full(lvl.vbar) << '\n';
    }
}

void write_events_csv(const std::vector<PathRecord>& paths, const std::string& path) {
    auto out = open_out(path);
    out << "path,time,level_before,event,u_before,u_after\n";
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (const auto& e : paths[p].events)
            out << p << ',' << format_full(e.time) << ',' << e.level_before << ','
                << event_name(e.kind) << ',' << format_full(e.u_before) << ','
                << format_full(e.u_after) << '\n';
}

void write_manifest(const std::string& path, const RunConfig& cfg, double u0_resolved,
                    const ValueFunctions& vf, const AssumptionReport& assumptions,
                    const std::map<std::string, double>& timings_ms,
                    const std::string& value_csv_sha256) {
    auto out = open_out(path);
    out << "tool=loanpool 0.1.0\n";
    out << "I=" << cfg.params.loans << '\n';
    out << "mu=" << format_full(cfg.params.mu) << '\n';
    out << "B=" << format_full(cfg.params.private_benefit) << '\n';
    out << "epsilon=" << format_full(cfg.params.epsilon) << '\n';
    out << "r=" << format_full(cfg.params.rate) << '\n';
    out << "alpha=";
    for (std::size_t i = 0; i < cfg.params.alpha.size(); ++i)
        out << (i ? "," : "") << format_full(cfg.params.alpha[i]);
    out << '\n';
    out << "grid_points=" << cfg.solver.grid_points << '\n';
    out << "quad_tol=" << format_full(cfg.solver.quad_tol) << '\n';
    out << "bisect_tol=" << format_full(cfg.solver.bisect_tol) << '\n';
    out << "n_paths=" << cfg.sim.n_paths << '\n';
    out << "seed=" << cfg.sim.seed << '\n';
    out << "u0=" << (cfg.u0_auto ? std::string("auto") : format_full(cfg.sim.u0)) << '\n';
    out << "u0_resolved=" << format_full(u0_resolved) << '\n';
    out << "shirk=";
    for (int j = cfg.params.loans; j >= 1; --j)
        out << (j < cfg.params.loans ? "," : "") << cfg.sim.shirk_at(j);
    out << '\n';
    out << "regime=" << (vf.zero_rate ? "zero-rate" : "positive-rate") << '\n';
    for (int j = 1; j <= vf.loans(); ++j) {
        out << "gamma_" << j << '=' << format_full(vf.level(j).gamma) << '\n';
        out << "vbar_" << j << '=' << format_full(vf.level(j).vbar) << '\n';
    }
    for (int j = 2; j <= vf.loans(); ++j)
        out << "hyp_lambda_" << j << '='
            << format_full(vf.hyp_lambda_lhs[static_cast<std::size_t>(j)]) << " <= "
            << format_full(vf.hyp_lambda_rhs[static_cast<std::size_t>(j)]) << '\n';
    for (const auto& c : assumptions.conditions)
        out << "assumption." << c.name << '=' << (c.holds ? "pass" : "fail")
            << " margin=" << format_full(c.margin) << '\n';
    for (const auto& [name, ms] : timings_ms)
        out << "timing." << name << "_ms=" << format_full(ms) << '\n';
    out << "sha256=" << value_csv_sha256 << '\n';
}

}  // namespace loanpool
