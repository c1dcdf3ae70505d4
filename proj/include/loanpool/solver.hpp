#pragma once

#include <stdexcept>

#include "loanpool/params.hpp"
#include "loanpool/value_function.hpp"

namespace loanpool {

/// A solvability condition of the recursion failed (continuation decision or
/// the per-level intensity condition). The message names the level and both
/// sides of the violated inequality.
struct ConditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Single-loan level: v_1(u) = b_1 - u + (mu - b_1(r + lambda_1))/lambda_1 for
/// u >= b_1, linear through the origin below, gamma_1 = b_1.
ValueFunctionLevel solve_v1(const DerivedQuantities& derived, double rate);

/// Closed-form solution of the level-j ODE for a trial boundary `gamma`:
///   v(u) = W(u,gamma) [ v_{j-1}(gamma-b_j) + (j mu - (r gamma + lambda_j b_j))/lambda_j ]
///        + int_u^gamma W(u,x) (j mu + lambda_j v_{j-1}(x-b_j)) / (r x + lambda_j b_j) dx,
/// with W(u,x) = ((r u + lambda_j b_j)/(r x + lambda_j b_j))^(lambda_j/r)
/// computed in log space; the exponential kernel replaces W when r < 1e-8.
/// Quadrature splits at every kink of v_{j-1}(. - b_j).
double eval_candidate(int level, double u, double gamma, const ValueFunctionLevel& prev,
                      const DerivedQuantities& derived, double rate, double quad_tol);

/// Locates gamma_j through r/lambda_j - 1 in the subdifferential of v_{j-1} at
/// gamma_j - b_j. Requires the continuation condition
/// r/lambda_j - 1 <= vbar_{j-1}/b_{j-1}; throws ConditionError otherwise.
double find_gamma(int level, const ValueFunctionLevel& prev, const DerivedQuantities& derived,
                  double rate, double bisect_tol);

/// Builds v_1..v_I recursively. For r = 0 the boundaries are
/// gamma_j = gamma_{j-1} + b_j and the exponential kernel applies exactly.
/// Fails with ConditionError if the standing assumptions or the per-level
/// intensity condition (checked against psi_1(r/lambda_j)) are violated.
ValueFunctions build_all(const PoolParams& params, const DerivedQuantities& derived,
                         const SolverSettings& settings);

}  // namespace loanpool
