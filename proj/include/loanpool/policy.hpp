#pragma once

#include <vector>

#include "loanpool/params.hpp"
#include "loanpool/value_function.hpp"

namespace loanpool {

/// Feedback form of the optimal contract: fee flow, maintenance probability
/// and the two utility drops, all as functions of (level, promised utility).
/// b_0 and v_0 are zero, so the single-loan level has no probation band.
struct ContractPolicy {
    DerivedQuantities derived;
    std::vector<double> gamma;  // fee boundaries by level, gamma[0] = 0
    double rate = 0.0;
    bool zero_rate = false;
    double u_tol = 0.0;  // absolute tolerance for "u equals gamma_j"
};

ContractPolicy make_policy(const ValueFunctions& vf);

struct PolicyDecision {
    double fee = 0.0;    // delta, nonzero only at the cap
    double theta = 0.0;  // probability the pool survives a default
    double h1 = 0.0;     // drop if maintained
    double h2 = 0.0;     // additional drop if liquidated
};

/// Contract maps at state (j, u), u in [b_j, gamma_j]:
///   theta = (u - b_j)/b_{j-1} on the probation band [b_j, b_j + b_{j-1}), else 1
///   h1    = u - b_{j-1} on the probation band, else b_j; h2 = u - h1
///   fee   = lambda_j b_j + r gamma_j exactly at the cap.
PolicyDecision policy_eval(const ContractPolicy& pol, int level, double u);

/// Deterministic between-default flow du = (r u + lambda_j b_j) dt, absorbed at
/// gamma_j: u(dt) = min(gamma_j, (u0 + lambda_j b_j / r) e^{r dt} - lambda_j b_j / r).
double drift_position(const ContractPolicy& pol, int level, double u0, double dt);

/// First time the flow reaches gamma_j from u0 (0 if already there).
double time_to_cap(const ContractPolicy& pol, int level, double u0);

struct PostDefaultOutcome {
    bool maintained = false;
    double new_u = 0.0;  // meaningful only when maintained
};

/// Resolves a default at state (j, u) with a uniform draw: liquidated when
/// unif >= theta, and always when the defaulting loan was the last one.
/// When maintained, new_u = u - h1 lies in [b_{j-1}, gamma_{j-1}].
PostDefaultOutcome post_default(const ContractPolicy& pol, int level, double u, double unif);

}  // namespace loanpool
