#pragma once

// Shared test fixtures: the reference parameter set, closed-form oracles that
// are independent of the solver's quadrature path, and a generator of random
// parameter sets satisfying the standing assumptions.

#include <cmath>
#include <stdexcept>

#include "loanpool/params.hpp"
#include "loanpool/rng.hpp"

namespace testsupport {

inline loanpool::PoolParams reference_params(double rate = 0.05) {
    loanpool::PoolParams p;
    p.loans = 3;
    p.mu = 1.0;
    p.private_benefit = 0.1;
    p.epsilon = 0.5;
    p.rate = rate;
    p.alpha = {0.25, 0.25, 0.25};
    return p;
}

// Analytic solution of the level-2 equation for the reference set on
// (b_2, gamma_2] = (0.8, 1.6], where the level-1 source is affine:
//   v_2(u) = A u + C + K (r u + lambda_2 b_2)^(lambda_2 / r)
// with A, C from matching the affine terms and K pinned by v_2'(1.6) = -1.
struct Level2Oracle {
    double r = 0.05;
    double lam = 0.5;
    double b = 0.8;
    double slope1 = 3.8;  // v_1 slope on [0, b_1]
    double A, C, K, p;

    Level2Oracle() {
        p = lam / r;                                           // 10
        A = lam * slope1 / (lam - r);                          // 38/9
        C = (lam * b * A + 2.0 - slope1 * b * lam) / lam;      // 39.04/9
        K = (-1.0 - A) / (p * r * std::pow(0.48, p - 1.0));
    }
    double v2(double u) const { return A * u + C + K * std::pow(r * u + lam * b, p); }
    double dv2(double u) const { return A + K * p * r * std::pow(r * u + lam * b, p - 1.0); }

    // gamma_3 = b_3 + root of v_2'(x) = r/lambda_3 - 1, by bisection on the
    // analytic derivative
    double gamma3() const {
        const double target = r / 0.75 - 1.0;
        double lo = 0.8, hi = 1.6;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (dv2(mid) > target ? lo : hi) = mid;
        }
        return 0.8 + 0.5 * (lo + hi);
    }
};

// Random parameter set satisfying profitability, monitoring efficiency and
// contagion monotonicity by construction (the per-level intensity condition
// is checked by attempting the build and resampling on failure).
inline loanpool::PoolParams random_admissible(loanpool::PathRng& rng, int loans) {
    loanpool::PoolParams p;
    p.loans = loans;
    p.alpha.assign(static_cast<std::size_t>(loans), 0.0);
    p.alpha[static_cast<std::size_t>(loans) - 1] = 0.1 + 0.4 * rng.uniform();
    for (int j = loans - 1; j >= 1; --j)
        p.alpha[static_cast<std::size_t>(j) - 1] =
            p.alpha[static_cast<std::size_t>(j)] * (1.0 + 0.5 * rng.uniform());

    double inv_sum = 0.0;
    for (double a : p.alpha) inv_sum += 1.0 / a;
    const double abar_last = loans / inv_sum;

    p.epsilon = 0.3 + 0.7 * rng.uniform();
    p.mu = abar_last * (1.2 + 1.8 * rng.uniform());
    p.rate = abar_last * (0.02 + 0.08 * rng.uniform());
    // pick B so the efficiency bound holds with slack factor s > 1 at the
    // binding level (alpha_bar decreases in j, so the last level binds)
    const double s = 1.5 + 1.5 * rng.uniform();
    p.private_benefit =
        p.mu * p.epsilon /
        (1.0 + s * (p.rate / abar_last) * (1.0 + p.epsilon) / p.epsilon);
    return p;
}

}  // namespace testsupport
