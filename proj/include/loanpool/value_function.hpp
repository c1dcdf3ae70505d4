#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "loanpool/params.hpp"

namespace loanpool {

enum class Side { left, right };

struct SolverSettings {
    int grid_points = 2048;    // interior sample points per level
    double quad_tol = 1e-10;   // absolute quadrature tolerance
    double bisect_tol = 1e-12; // free-boundary bisection tolerance (in the argument)
};

/// One solved level v_j.
///
/// The function is linear with slope vbar/b on [0, b], linear with slope -1 on
/// [gamma, inf), and sampled on a kink-aware grid in between. Grid nodes carry
/// one-sided first and second derivatives obtained from the level ODE itself;
/// away from b the first derivative is continuous and both sides coincide.
/// Interpolation between interior nodes is quintic Hermite on (v, v', v''),
/// so the interpolant tracks the solved curvature through every kink.
struct ValueFunctionLevel {
    int level = 0;       // j, remaining loans
    double b = 0.0;      // b_j
    double b_prev = 0.0; // b_{j-1} (0 for j=1)
    double gamma = 0.0;  // free boundary gamma_j
    double vbar = 0.0;   // v_j(b_j)
    double value_gamma = 0.0;

    std::vector<double> breakpoints;  // {0, b, b+b_prev, gamma}, deduplicated
    std::vector<double> u;            // ascending grid covering [0, gamma]
    std::vector<double> v;
    std::vector<double> dv_left;
    std::vector<double> dv_right;
    std::vector<double> d2v_left;    // one-sided second derivatives (interior)
    std::vector<double> d2v_right;
    std::size_t interior_begin = 0;  // index of the node at b
    std::size_t interior_end = 0;    // index of the node at gamma

    double slope_low() const { return vbar / b; }
    double value_at(double x) const;
    double deriv_at(double x, Side side) const;
};

/// The solved family v_1..v_I plus the data needed to audit the build.
struct ValueFunctions {
    std::vector<ValueFunctionLevel> levels;  // levels[j-1] holds v_j
    DerivedQuantities derived;
    SolverSettings settings;
    double rate = 0.0;
    bool zero_rate = false;
    // per-level intensity condition (v'_{j-1}(b+)^+ b_{j-1}/vbar_{j-1} <= psi_1(r/lambda_j)),
    // recorded for j = 2..I; index 0/1 unused
    std::vector<double> hyp_lambda_lhs;
    std::vector<double> hyp_lambda_rhs;

    int loans() const { return derived.loans; }
    const ValueFunctionLevel& level(int j) const;
};

/// v_j(u); level 0 is the empty pool and evaluates to 0.
double eval(const ValueFunctions& vf, int level, double u);

/// One-sided derivative of v_j at u.
double eval_deriv(const ValueFunctions& vf, int level, double u, Side side);

/// Residual of the level-j ODE at u > b_j:
///   (r u + lambda_j b_j) v_j'(u) + j mu - lambda_j (v_j(u) - v_{j-1}(u - b_j)).
/// Vanishes on (b_j, gamma_j] and is <= 0 beyond gamma_j. At the last loan the
/// whole pool is lost on default, so the drop compensator is lambda_1 u and the
/// residual above gamma_1 reduces to -r(u - b_1).
double hjb_residual(const ValueFunctions& vf, int level, double u);

struct SupPoint {
    double value = 0.0;
    double theta = 0.0;
    double z = 0.0;
};

/// Discretizes the constrained Bellman bracket over
///   theta in [0, 1 ^ (u-b_j)/b_{j-1}], z in [b_{j-1} theta, u-b_j]
/// and returns the grid maximum with its argmax. Serves as an independent
/// optimality oracle for the contract maps.
SupPoint brute_force_sup(const ValueFunctions& vf, int level, double u, int theta_cells,
                         int z_cells);

struct ShapeCheck {
    std::string name;
    int level = 0;
    double worst = 0.0;  // largest violation found, <= tol passes
    double tol = 0.0;
    bool pass = false;
};

struct ShapeReport {
    std::vector<ShapeCheck> checks;
    bool clean = false;
};

/// Grid-wide shape audit: concavity, slope bounds, the cross-level derivative
/// bound v_j'(u) <= v_{j-1}'(u-b_j), and the boundary-derivative identity
/// v_j'(b_j+) = (lambda_j vbar_j - j mu) / (b_j (r + lambda_j)) recomputed by
/// one-sided finite differences from the value grid.
ShapeReport check_shape(const ValueFunctions& vf, double tol = 1e-8, double boundary_tol = 1e-4);

}  // namespace loanpool
