#pragma once

#include <string>
#include <vector>

namespace loanpool {

/// Exogenous primitives of the monitored loan pool.
///
/// `alpha[j-1]` is the baseline per-loan hazard when j loans remain, so the
/// list runs from the smallest pool (j=1) up to the full pool (j=I).
/// Contagion requires the list to be non-increasing in the pool size, i.e.
/// alpha_j <= alpha_{j-1}.
struct PoolParams {
    int loans = 0;                 // I, pool size at inception
    double mu = 0.0;               // cash flow per performing loan per unit time
    double private_benefit = 0.0;  // B, flow gained per unmonitored loan
    double epsilon = 0.0;          // proportional hazard impact of shirking
    double rate = 0.0;             // r, bank's internal discount rate
    std::vector<double> alpha;     // baseline hazards alpha_1..alpha_I

    double alpha_at(int level) const { return alpha[static_cast<std::size_t>(level) - 1]; }
};

/// Per-level constants implied by PoolParams. Vectors are indexed by level
/// (number of remaining loans); index 0 is the empty pool and stays zero.
struct DerivedQuantities {
    int loans = 0;
    double mu = 0.0;                // copied from PoolParams for convenience
    std::vector<double> b;          // b_j = B / (epsilon * alpha_j), minimum utility drop
    std::vector<double> lambda;     // lambda_j = j * alpha_j, pool intensity under full monitoring
    std::vector<double> alpha_bar;  // harmonic mean of alpha_1..alpha_j
    double first_best = 0.0;        // I * mu / alpha_bar_I
};

struct AssumptionCheck {
    std::string name;
    bool holds = false;
    double margin = 0.0;  // signed slack, >= 0 means satisfied
};

struct AssumptionReport {
    std::vector<AssumptionCheck> conditions;
    bool overall = false;

    const AssumptionCheck* find(const std::string& name) const;
};

/// Validates PoolParams structural invariants and computes all per-level
/// constants. Throws std::invalid_argument naming the violated invariant.
DerivedQuantities derive(const PoolParams& params);

/// Checks pool profitability (mu >= alpha_bar_I), monitoring efficiency
/// (r/alpha_bar_j <= (mu*eps - B)/B * eps/(1+eps) for every j) and contagion
/// monotonicity. Margins are the literal differences, positive when satisfied.
AssumptionReport check_assumptions(const PoolParams& params, const DerivedQuantities& derived);

/// phi_beta(x) = ((1+x) / (1+(1+beta)x))^(1/x - 1), evaluated in log space.
/// For x below 1e-10 returns the analytic limit exp(-beta).
double phi_beta(double x, double beta);

/// Continuous extension of (phi_beta(x) - x) / ((1-x) phi_beta(x)).
/// psi_beta(0) = 1 and psi_beta(1) = 1 - log(1 + beta/2), both removable
/// singularities of the literal formula.
double psi_beta(double x, double beta);

}  // namespace loanpool
