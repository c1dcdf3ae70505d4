#pragma once

#include <cstdint>
#include <vector>

#include "loanpool/params.hpp"
#include "loanpool/policy.hpp"
#include "loanpool/value_function.hpp"

namespace loanpool {

struct SimConfig {
    long long n_paths = 100000;
    std::uint64_t seed = 42;
    double u0 = 0.0;
    std::vector<int> shirk;        // unmonitored loans per level, shirk[j] for level j; empty = none
    double horizon_cap = 1e4;      // safety valve; exceeding it flags the path
    double shirk_epsilon = -1.0;   // hazard response to shirking in the simulated world;
                                   // negative means "use the contract's epsilon"
    int threads = 1;
    bool record_events = false;

    int shirk_at(int level) const {
        return shirk.empty() ? 0 : shirk[static_cast<std::size_t>(level)];
    }
    bool shirk_all_zero() const;
};

enum class EventKind { default_maintained, default_liquidated, cap_reached };

struct PathEvent {
    double time = 0.0;
    int level_before = 0;
    EventKind kind{};
    double u_before = 0.0;
    double u_after = 0.0;
};

struct DefaultRecord {
    double time = 0.0;
    int level = 0;  // remaining loans when the default hit
    bool maintained = false;
};

struct PathRecord {
    double liquidation_time = 0.0;
    std::vector<DefaultRecord> defaults;
    double bank_payoff = 0.0;        // discounted transfers + private benefit (+ lump at 0)
    double investor_payoff = 0.0;    // undiscounted pool cash minus all transfers
    double fees_discounted = 0.0;    // discounted transfers alone (no private benefit)
    double fees_undiscounted = 0.0;  // total transfers to the bank, undiscounted
    double lump_transfer = 0.0;      // immediate payment when u0 exceeds gamma_I
    bool horizon_exceeded = false;
    std::vector<PathEvent> events;  // populated only when record_events is set
};

/// Exact event-driven simulation of one path: between defaults the state
/// follows the deterministic flow and every integral (fees, private benefit,
/// pool cash) is accumulated in closed form; the only randomness is the
/// default times and the liquidation coin flips. The default waiting time at
/// level j under deviation k_j is exponential with rate alpha_j (j + eps k_j).
PathRecord simulate_path(const PoolParams& params, const DerivedQuantities& derived,
                         const ContractPolicy& pol, const SimConfig& cfg, long long path_index);

struct SimResult {
    double mean_bank = 0.0;
    double se_bank = 0.0;
    double mean_investor = 0.0;
    double se_investor = 0.0;
    long long n_paths = 0;    // paths included in the statistics
    long long n_flagged = 0;  // horizon-capped paths, excluded and reported
};

/// Runs cfg.n_paths independent paths (parallel across threads, merged in
/// path order) and returns sample means and standard errors. When `keep` is
/// given, the full per-path records are stored there, indexed by path.
SimResult run_paths(const PoolParams& params, const DerivedQuantities& derived,
                    const ContractPolicy& pol, const SimConfig& cfg,
                    std::vector<PathRecord>* keep = nullptr);

struct EstimateReport {
    SimResult stats;
    double target_bank = 0.0;      // u0
    double target_investor = 0.0;  // v_I(u0)
    bool bank_ok = false;          // |mean - target| <= 3 se
    bool investor_ok = false;
};

/// Monte Carlo check of the solved contract under full monitoring: the bank
/// must recover u0 and the investors v_I(u0), each within three standard
/// errors. Requires a shirk-free configuration.
EstimateReport estimate(const PoolParams& params, const ValueFunctions& vf,
                        const ContractPolicy& pol, const SimConfig& cfg,
                        std::vector<PathRecord>* keep = nullptr);

struct DeviationReport {
    SimResult stats;
    double u0 = 0.0;
    bool ic_ok = false;  // mean bank payoff <= u0 + 3 se
};

/// Simulates a shirking bank against the unchanged contract: defaults arrive
/// faster, the bank pockets the private benefit, and incentive compatibility
/// requires the mean payoff not to exceed u0 (the drops price the benefit
/// exactly, so near-equality is the expected outcome).
DeviationReport deviation_utility(const PoolParams& params, const ValueFunctions& vf,
                                  const ContractPolicy& pol, const SimConfig& cfg);

}  // namespace loanpool
