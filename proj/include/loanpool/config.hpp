#pragma once

#include <stdexcept>
#include <string>

#include "loanpool/mcsim.hpp"
#include "loanpool/params.hpp"
#include "loanpool/value_function.hpp"

namespace loanpool {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    PoolParams params;
    SolverSettings solver;
    SimConfig sim;
    bool u0_auto = true;  // u0 resolves to gamma_I once the solve is done
};

/// Parses a flat key=value file. Keys: I, mu, B, epsilon, r, alpha (comma
/// list of length I), grid_points, quad_tol, bisect_tol, n_paths, seed,
/// u0 (number or "auto"), shirk (comma list, level I first). Blank lines and
/// '#' comments are ignored; unknown or duplicate keys are errors that name
/// the offending line.
RunConfig parse_config(const std::string& path);

}  // namespace loanpool
