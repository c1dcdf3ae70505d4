#include "loanpool/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace loanpool {

namespace {

double clamp_state(const ContractPolicy& pol, int j, double u, const char* who) {
    if (j < 1 || j > pol.derived.loans)
        throw std::domain_error(std::string(who) + ": unknown level j=" + std::to_string(j));
    const double bj = pol.derived.b[static_cast<std::size_t>(j)];
    const double g = pol.gamma[static_cast<std::size_t>(j)];
    if (u < bj - pol.u_tol || u > g + pol.u_tol)
        throw std::domain_error(std::string(who) + ": u=" + std::to_string(u) +
                                " outside [b_j, gamma_j] = [" + std::to_string(bj) + ", " +
                                std::to_string(g) + "] at level " + std::to_string(j));
    return std::clamp(u, bj, g);
}

}  // namespace

ContractPolicy make_policy(const ValueFunctions& vf) {
    ContractPolicy pol;
    pol.derived = vf.derived;
    pol.rate = vf.rate;
    pol.zero_rate = vf.zero_rate;
    pol.gamma.assign(static_cast<std::size_t>(vf.loans()) + 1, 0.0);
    for (int j = 1; j <= vf.loans(); ++j)
        pol.gamma[static_cast<std::size_t>(j)] = vf.level(j).gamma;
    pol.u_tol = 1e-9 * std::max(1.0, pol.gamma.back());
    return pol;
}

PolicyDecision policy_eval(const ContractPolicy& pol, int j, double u) {
    u = clamp_state(pol, j, u, "policy_eval");
    const double bj = pol.derived.b[static_cast<std::size_t>(j)];
    const double g = pol.gamma[static_cast<std::size_t>(j)];
    const double lam = pol.derived.lambda[static_cast<std::size_t>(j)];

    PolicyDecision dec;
    dec.fee = (g - u <= pol.u_tol) ? lam * bj + pol.rate * g : 0.0;
    if (j == 1) {  // b_0 = 0: no probation band, theta = 1 throughout
        dec.theta = 1.0;
        dec.h1 = bj;
    } else {
        const double bp = pol.derived.b[static_cast<std::size_t>(j) - 1];
        if (u < bj + bp) {
            dec.theta = (u - bj) / bp;
            dec.h1 = u - bp;
        } else {
            dec.theta = 1.0;
            dec.h1 = bj;
        }
    }
    dec.h2 = u - dec.h1;
    return dec;
}

double drift_position(const ContractPolicy& pol, int j, double u0, double dt) {
    u0 = clamp_state(pol, j, u0, "drift_position");
    if (!(dt >= 0.0)) throw std::domain_error("drift_position: dt must be >= 0");
    const double g = pol.gamma[static_cast<std::size_t>(j)];
    const double lb =
        pol.derived.lambda[static_cast<std::size_t>(j)] * pol.derived.b[static_cast<std::size_t>(j)];
    if (pol.rate == 0.0) return std::min(g, u0 + lb * dt);
    const double c = lb / pol.rate;
    return std::min(g, (u0 + c) * std::exp(pol.rate * dt) - c);
}

double time_to_cap(const ContractPolicy& pol, int j, double u0) {
    u0 = clamp_state(pol, j, u0, "time_to_cap");
    const double g = pol.gamma[static_cast<std::size_t>(j)];
    if (u0 >= g) return 0.0;
    const double lb =
        pol.derived.lambda[static_cast<std::size_t>(j)] * pol.derived.b[static_cast<std::size_t>(j)];
    if (pol.rate == 0.0) return (g - u0) / lb;
    return std::log((pol.rate * g + lb) / (pol.rate * u0 + lb)) / pol.rate;
}

PostDefaultOutcome post_default(const ContractPolicy& pol, int j, double u, double unif) {
    if (!(unif >= 0.0) || !(unif < 1.0))
        throw std::domain_error("post_default: unif must lie in [0, 1)");
    if (j == 1) {
        clamp_state(pol, j, u, "post_default");
        return {false, 0.0};  // pool is empty, the whole promise is forfeited
    }
    const auto dec = policy_eval(pol, j, u);
    if (unif >= dec.theta) return {false, 0.0};
    double w = u - dec.h1;
    const double bp = pol.derived.b[static_cast<std::size_t>(j) - 1];
    if (w < bp - pol.u_tol)
        throw std::logic_error("post_default: landing point below the liability floor");
    return {true, std::max(w, bp)};
}

}  // namespace loanpool
