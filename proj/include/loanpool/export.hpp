#pragma once

#include <map>
#include <string>
#include <vector>

#include "loanpool/config.hpp"
#include "loanpool/mcsim.hpp"
#include "loanpool/params.hpp"
#include "loanpool/value_function.hpp"

namespace loanpool {

/// Shortest decimal form that round-trips the double exactly.
std::string format_full(double x);

/// Per-level plot data: j,u,v,dv_left,dv_right,region with
/// region in {linear-low, probation, interior, linear-high}.
void write_value_csv(const ValueFunctions& vf, const std::string& path);

/// One row per level: j,b,probation_end,gamma,vbar.
void write_boundaries_csv(const ValueFunctions& vf, const std::string& path);

/// Per-path event log: path,time,level_before,event,u_before,u_after.
void write_events_csv(const std::vector<PathRecord>& paths, const std::string& path);

/// Key=value manifest holding the full resolved configuration, solver
/// outputs, assumption report, wall-clock timings and the content hash of
/// the value-function CSV.
void write_manifest(const std::string& path, const RunConfig& cfg, double u0_resolved,
                    const ValueFunctions& vf, const AssumptionReport& assumptions,
                    const std::map<std::string, double>& timings_ms,
                    const std::string& value_csv_sha256);

}  // namespace loanpool
