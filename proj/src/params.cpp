#include "loanpool/params.hpp"

#include <cmath>
#include <stdexcept>

namespace loanpool {

namespace {

void fail(const std::string& what) { throw std::invalid_argument("invalid parameters: " + what); }

}  // namespace

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

DerivedQuantities derive(const PoolParams& p) {
    if (p.loans < 1) fail("I must be >= 1");
    if (!(p.mu > 0.0)) fail("mu must be > 0");
    if (!(p.private_benefit > 0.0)) fail("B must be > 0");
    if (!(p.epsilon > 0.0)) fail("epsilon must be > 0");
    if (!(p.rate >= 0.0)) fail("r must be >= 0");
    if (p.alpha.size() != static_cast<std::size_t>(p.loans))
        fail("alpha must list exactly I=" + std::to_string(p.loans) + " hazards");
    for (int j = 1; j <= p.loans; ++j) {
        if (!(p.alpha_at(j) > 0.0)) fail("alpha_" + std::to_string(j) + " must be > 0");
        if (!std::isfinite(p.alpha_at(j))) fail("alpha_" + std::to_string(j) + " must be finite");
    }
    for (int j = 2; j <= p.loans; ++j)
        if (p.alpha_at(j) > p.alpha_at(j - 1))
            fail("hazards must be non-increasing in the pool size: alpha_" + std::to_string(j) +
                 " > alpha_" + std::to_string(j - 1));

    DerivedQuantities d;
    d.loans = p.loans;
    d.mu = p.mu;
    d.b.assign(static_cast<std::size_t>(p.loans) + 1, 0.0);
    d.lambda.assign(static_cast<std::size_t>(p.loans) + 1, 0.0);
    d.alpha_bar.assign(static_cast<std::size_t>(p.loans) + 1, 0.0);
    double inv_sum = 0.0;
    for (int j = 1; j <= p.loans; ++j) {
        const double a = p.alpha_at(j);
        d.b[j] = p.private_benefit / (p.epsilon * a);
        d.lambda[j] = j * a;
        inv_sum += 1.0 / a;
        d.alpha_bar[j] = j / inv_sum;
    }
    d.first_best = p.loans * p.mu / d.alpha_bar[p.loans];
    return d;
}

AssumptionReport check_assumptions(const PoolParams& p, const DerivedQuantities& d) {
    AssumptionReport rep;
    auto add = [&rep](std::string name, double margin) {
        rep.conditions.push_back({std::move(name), margin >= 0.0, margin});
    };

    add("pool-profitability", p.mu - d.alpha_bar[p.loans]);

    const double efficiency_rhs =
        (p.mu * p.epsilon - p.private_benefit) / p.private_benefit * p.epsilon / (1.0 + p.epsilon);
    for (int j = 1; j <= p.loans; ++j)
        add("monitoring-efficiency[j=" + std::to_string(j) + "]",
            efficiency_rhs - p.rate / d.alpha_bar[j]);

    for (int j = 2; j <= p.loans; ++j)
        add("contagion-monotonicity[j=" + std::to_string(j) + "]", p.alpha_at(j - 1) - p.alpha_at(j));

    rep.overall = true;
    for (const auto& c : rep.conditions) rep.overall = rep.overall && c.holds;
    return rep;
}

double phi_beta(double x, double beta) {
    if (!(beta > 0.0) || beta > 1.0) throw std::domain_error("phi_beta: beta must lie in (0,1]");
    if (!(x > 0.0)) throw std::domain_error("phi_beta: x must be > 0");
    if (x < 1e-10) return std::exp(-beta);
    // log of (1+x)/(1+(1+beta)x), stable near x=0
    const double log_ratio = std::log1p(x) - std::log1p((1.0 + beta) * x);
    return std::exp((1.0 / x - 1.0) * log_ratio);
}

double psi_beta(double x, double beta) {
    if (!(beta > 0.0) || beta > 1.0) throw std::domain_error("psi_beta: beta must lie in (0,1]");
    if (!(x >= 0.0)) throw std::domain_error("psi_beta: x must be >= 0");
    if (x < 1e-10) return 1.0;
    if (std::abs(x - 1.0) < 1e-7) return 1.0 - std::log1p(0.5 * beta);
    const double phi = phi_beta(x, beta);
    return (phi - x) / ((1.0 - x) * phi);
}

}  // namespace loanpool
