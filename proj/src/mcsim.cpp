#include "loanpool/mcsim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "loanpool/rng.hpp"

namespace loanpool {

namespace {

// integral of e^{-r s} ds over [a, b]
double discount_integral(double r, double a, double b) {
    if (r == 0.0) return b - a;
    return (std::exp(-r * a) - std::exp(-r * b)) / r;
}

void validate(const PoolParams& params, const ContractPolicy& pol, const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw std::domain_error("simulation needs at least one path");
    if (!(cfg.u0 >= pol.derived.b[static_cast<std::size_t>(params.loans)] - pol.u_tol))
        throw std::domain_error("u0 must be at least b_I (limited liability at the start)");
    if (!(cfg.horizon_cap > 0.0)) throw std::domain_error("horizon_cap must be positive");
    if (!cfg.shirk.empty()) {
        if (cfg.shirk.size() != static_cast<std::size_t>(params.loans) + 1)
            throw std::domain_error("shirk profile must cover levels 1..I");
        for (int j = 1; j <= params.loans; ++j)
            if (cfg.shirk_at(j) < 0 || cfg.shirk_at(j) > j)
                throw std::domain_error("shirk count at level " + std::to_string(j) +
                                        " must lie in {0.." + std::to_string(j) + "}");
    }
}

}  // namespace

bool SimConfig::shirk_all_zero() const {
    for (int k : shirk)
        if (k != 0) return false;
    return true;
}

PathRecord simulate_path(const PoolParams& params, const DerivedQuantities& derived,
                         const ContractPolicy& pol, const SimConfig& cfg, long long path_index) {
    PathRng rng = PathRng::for_path(cfg.seed, static_cast<std::uint64_t>(path_index));
    PathRecord rec;
    const double r = pol.rate;
    const double eps_sim = cfg.shirk_epsilon < 0.0 ? params.epsilon : cfg.shirk_epsilon;

    double u = cfg.u0;
    double t = 0.0;
    const double cap_top = pol.gamma[static_cast<std::size_t>(params.loans)];
    if (u > cap_top) {  // promise above the top cap: pay the excess up front
        rec.lump_transfer = u - cap_top;
        rec.bank_payoff += rec.lump_transfer;
        rec.investor_payoff -= rec.lump_transfer;
        rec.fees_discounted += rec.lump_transfer;
        rec.fees_undiscounted += rec.lump_transfer;
        u = cap_top;
    }

    for (int j = params.loans; j >= 1; --j) {
        const std::size_t js = static_cast<std::size_t>(j);
        const int k = cfg.shirk_at(j);
        const double hazard = params.alpha_at(j) * (j + eps_sim * k);
        const double wait = rng.exponential(hazard);
        const double t_cap = time_to_cap(pol, j, u);
        const double fee = derived.lambda[js] * derived.b[js] + r * pol.gamma[js];

        if (k > 0)
            rec.bank_payoff += params.private_benefit * k * discount_integral(r, t, t + wait);
        rec.investor_payoff += j * params.mu * wait;
        if (wait > t_cap) {
            const double fee_pv = fee * discount_integral(r, t + t_cap, t + wait);
            rec.bank_payoff += fee_pv;
            rec.fees_discounted += fee_pv;
            rec.fees_undiscounted += fee * (wait - t_cap);
            rec.investor_payoff -= fee * (wait - t_cap);
            if (cfg.record_events && t_cap > 0.0)
                rec.events.push_back(
                    {t + t_cap, j, EventKind::cap_reached, pol.gamma[js], pol.gamma[js]});
        }

        const double u_pre = drift_position(pol, j, u, wait);
        t += wait;
        if (t > cfg.horizon_cap) {
            rec.horizon_exceeded = true;
            rec.liquidation_time = t;
            return rec;
        }

        if (j == 1) {
            rec.defaults.push_back({t, 1, false});
            if (cfg.record_events)
                rec.events.push_back({t, 1, EventKind::default_liquidated, u_pre, 0.0});
            break;
        }

        const auto outcome = post_default(pol, j, u_pre, rng.uniform());
        rec.defaults.push_back({t, j, outcome.maintained});
        if (!outcome.maintained) {
            if (cfg.record_events)
                rec.events.push_back({t, j, EventKind::default_liquidated, u_pre, 0.0});
            break;
        }
        double w = outcome.new_u;
        const double cap_next = pol.gamma[js - 1];
        if (w > cap_next) {
            // landing above the next cap: pay the excess immediately (only
            // perturbed boundaries trigger this; the solved ones satisfy
            // gamma_j <= b_j + gamma_{j-1})
            const double lump = w - cap_next;
            rec.bank_payoff += lump * std::exp(-r * t);
            rec.fees_discounted += lump * std::exp(-r * t);
            rec.investor_payoff -= lump;
            rec.fees_undiscounted += lump;
            w = cap_next;
        }
        if (cfg.record_events)
            rec.events.push_back({t, j, EventKind::default_maintained, u_pre, w});
        u = w;
    }
    rec.liquidation_time = t;
    return rec;
}

SimResult run_paths(const PoolParams& params, const DerivedQuantities& derived,
                    const ContractPolicy& pol, const SimConfig& cfg,
                    std::vector<PathRecord>* keep) {
    validate(params, pol, cfg);
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> bank(n), inv(n);
    std::vector<unsigned char> flagged(n, 0);
    if (keep) keep->resize(n);

    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            PathRecord rec =
                simulate_path(params, derived, pol, cfg, static_cast<long long>(i));
            bank[i] = rec.bank_payoff;
            inv[i] = rec.investor_payoff;
            flagged[i] = rec.horizon_exceeded ? 1 : 0;
            if (keep) (*keep)[i] = std::move(rec);
        }
    };

    const int workers = std::max(1, cfg.threads);
    if (workers == 1 || n < 2) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) /
                                  static_cast<std::size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = std::min(n, static_cast<std::size_t>(w) * chunk);
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // merge in path order so the result is independent of the thread count
    SimResult res;
    double sum_b = 0.0, sum_i = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (flagged[i]) {
            ++res.n_flagged;
            continue;
        }
        ++res.n_paths;
        sum_b += bank[i];
        sum_i += inv[i];
    }
    if (res.n_paths == 0) return res;
    res.mean_bank = sum_b / static_cast<double>(res.n_paths);
    res.mean_investor = sum_i / static_cast<double>(res.n_paths);
    if (res.n_paths < 2) {
        res.se_bank = res.se_investor = std::numeric_limits<double>::infinity();
        return res;
    }
    double var_b = 0.0, var_i = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (flagged[i]) continue;
        var_b += (bank[i] - res.mean_bank) * (bank[i] - res.mean_bank);
        var_i += (inv[i] - res.mean_investor) * (inv[i] - res.mean_investor);
    }
    const double denom = static_cast<double>(res.n_paths) * static_cast<double>(res.n_paths - 1);
    res.se_bank = std::sqrt(var_b / denom);
    res.se_investor = std::sqrt(var_i / denom);
    return res;
}

EstimateReport estimate(const PoolParams& params, const ValueFunctions& vf,
                        const ContractPolicy& pol, const SimConfig& cfg,
                        std::vector<PathRecord>* keep) {
    if (!cfg.shirk_all_zero())
        throw std::domain_error("estimate runs under full monitoring; use deviation_utility");
    EstimateReport rep;
    rep.stats = run_paths(params, vf.derived, pol, cfg, keep);
    rep.target_bank = cfg.u0;
    rep.target_investor = eval(vf, params.loans, cfg.u0);
    rep.bank_ok = std::abs(rep.stats.mean_bank - rep.target_bank) <= 3.0 * rep.stats.se_bank;
    rep.investor_ok =
        std::abs(rep.stats.mean_investor - rep.target_investor) <= 3.0 * rep.stats.se_investor;
    return rep;
}

DeviationReport deviation_utility(const PoolParams& params, const ValueFunctions& vf,
                                  const ContractPolicy& pol, const SimConfig& cfg) {
    if (cfg.shirk_all_zero())
        throw std::domain_error("deviation_utility needs a nonzero shirk profile");
    DeviationReport rep;
    rep.stats = run_paths(params, vf.derived, pol, cfg, nullptr);
    rep.u0 = cfg.u0;
    rep.ic_ok = rep.stats.mean_bank <= rep.u0 + 3.0 * rep.stats.se_bank;
    return rep;
}

}  // namespace loanpool
