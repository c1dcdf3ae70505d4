#include "loanpool/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loanpool {

namespace {

// quintic Hermite piece matching value, slope and curvature at both ends
struct Hermite {
    double h, t, v0, v1, d0, d1, c0, c1;
    double value() const {
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        return v0 * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) +
               d0 * h * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) +
               c0 * h * h * 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5) +
               v1 * (10.0 * t3 - 15.0 * t4 + 6.0 * t5) +
               d1 * h * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) +
               c1 * h * h * 0.5 * (t3 - 2.0 * t4 + t5);
    }
    double deriv() const {
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        return v0 * (-30.0 * t2 + 60.0 * t3 - 30.0 * t4) / h +
               d0 * (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4) +
               c0 * h * 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4) +
               v1 * (30.0 * t2 - 60.0 * t3 + 30.0 * t4) / h +
               d1 * (-12.0 * t2 + 28.0 * t3 - 15.0 * t4) +
               c1 * h * 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    }
};

}  // namespace

double ValueFunctionLevel::value_at(double x) const {
    if (x <= b) return slope_low() * x;
    if (x >= gamma) return value_gamma - (x - gamma);
    const auto lo = u.begin() + static_cast<std::ptrdiff_t>(interior_begin);
    const auto hi = u.begin() + static_cast<std::ptrdiff_t>(interior_end) + 1;
    auto it = std::upper_bound(lo, hi, x);
    const std::size_t i = static_cast<std::size_t>(it - u.begin()) - 1;
    const double h = u[i + 1] - u[i];
    return Hermite{h,          (x - u[i]) / h, v[i],          v[i + 1],
                   dv_right[i], dv_left[i + 1], d2v_right[i], d2v_left[i + 1]}
        .value();
}

double ValueFunctionLevel::deriv_at(double x, Side side) const {
    if (x < b || (x == b && side == Side::left)) return slope_low();
    if (x > gamma || (x == gamma && side == Side::right)) return -1.0;
    if (x == b) return dv_right[interior_begin];
    if (x == gamma) return dv_left[interior_end];
    const auto lo = u.begin() + static_cast<std::ptrdiff_t>(interior_begin);
    const auto hi = u.begin() + static_cast<std::ptrdiff_t>(interior_end) + 1;
    auto it = std::upper_bound(lo, hi, x);
    std::size_t i = static_cast<std::size_t>(it - u.begin()) - 1;
    if (u[i] == x) return side == Side::left ? dv_left[i] : dv_right[i];
    const double h = u[i + 1] - u[i];
    return Hermite{h,          (x - u[i]) / h, v[i],          v[i + 1],
                   dv_right[i], dv_left[i + 1], d2v_right[i], d2v_left[i + 1]}
        .deriv();
}

const ValueFunctionLevel& ValueFunctions::level(int j) const {
    if (j < 1 || j > loans())
        throw std::out_of_range("unknown level j=" + std::to_string(j) + ", pool has " +
                                std::to_string(loans()) + " loans");
    return levels[static_cast<std::size_t>(j) - 1];
}

double eval(const ValueFunctions& vf, int j, double x) {
    if (j == 0) return 0.0;
    const auto& lvl = vf.level(j);
    if (!(x >= 0.0)) throw std::domain_error("eval: u must be >= 0");
    return lvl.value_at(x);
}

double eval_deriv(const ValueFunctions& vf, int j, double x, Side side) {
    if (j == 0) return 0.0;
    const auto& lvl = vf.level(j);
    if (!(x >= 0.0)) throw std::domain_error("eval_deriv: u must be >= 0");
    return lvl.deriv_at(x, side);
}

double hjb_residual(const ValueFunctions& vf, int j, double x) {
    const auto& lvl = vf.level(j);
    if (!(x > lvl.b)) throw std::domain_error("hjb_residual: u must exceed b_j");
    const double lam = vf.derived.lambda[static_cast<std::size_t>(j)];
    const double dv = lvl.deriv_at(x, Side::right);
    const double vj = lvl.value_at(x);
    if (j == 1) {
        // last loan: liquidation is certain on default, the full promise is lost
        return (vf.rate * x + lam * x) * dv + vf.derived.mu - lam * vj;
    }
    const double vprev = vf.levels[static_cast<std::size_t>(j) - 2].value_at(x - lvl.b);
    return (vf.rate * x + lam * lvl.b) * dv + j * vf.derived.mu - lam * (vj - vprev);
}

SupPoint brute_force_sup(const ValueFunctions& vf, int j, double x, int theta_cells, int z_cells) {
    const auto& lvl = vf.level(j);
    if (j < 2) throw std::domain_error("brute_force_sup: needs a level with j >= 2");
    if (!(x > lvl.b) || !(x <= lvl.gamma))
        throw std::domain_error("brute_force_sup: u must lie in (b_j, gamma_j]");
    if (theta_cells < 1 || z_cells < 1) throw std::domain_error("brute_force_sup: empty grid");

    const auto& prev = vf.levels[static_cast<std::size_t>(j) - 2];
    const double lam = vf.derived.lambda[static_cast<std::size_t>(j)];
    const double dv = lvl.deriv_at(x, Side::right);
    const double vj = lvl.value_at(x);
    const double theta_max = std::min(1.0, (x - lvl.b) / lvl.b_prev);
    const double z_hi = x - lvl.b;

    SupPoint best;
    bool first = true;
    auto consider = [&](double theta, double z) {
        // theta * v_{j-1}(z/theta), with the theta -> 0 continuation 0 at z = 0
        const double jump_gain = theta > 0.0 ? theta * prev.value_at(z / theta) : 0.0;
        const double value =
            (vf.rate * x + lam * (x - z)) * dv + j * vf.derived.mu - lam * (vj - jump_gain);
        if (first || value > best.value) {
            best = {value, theta, z};
            first = false;
        }
    };

    consider(0.0, 0.0);
    for (int ti = 1; ti <= theta_cells; ++ti) {
        const double theta = theta_max * ti / theta_cells;
        const double z_lo = lvl.b_prev * theta;
        for (int zi = 0; zi <= z_cells; ++zi)
            consider(theta, z_lo + (z_hi - z_lo) * zi / z_cells);
    }
    return best;
}

namespace {

// second-order one-sided derivative from three non-uniform nodes
double fd_oneside(double x0, double x1, double x2, double f0, double f1, double f2) {
    const double h1 = x1 - x0, h2 = x2 - x1;
    return -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f0 + (h1 + h2) / (h1 * h2) * f1 -
           h1 / (h2 * (h1 + h2)) * f2;
}

}  // namespace

ShapeReport check_shape(const ValueFunctions& vf, double tol, double boundary_tol) {
    ShapeReport rep;
    auto add = [&rep](std::string name, int level, double worst, double t) {
        rep.checks.push_back({std::move(name), level, worst, t, worst <= t});
    };

    for (int j = 1; j <= vf.loans(); ++j) {
        const auto& lvl = vf.level(j);
        const std::size_t n = lvl.u.size();

        double node_jump = 0.0, sequence = 0.0, lower = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            node_jump = std::max(node_jump, lvl.dv_right[i] - lvl.dv_left[i]);
            lower = std::max(lower, -1.0 - lvl.dv_right[i]);
            lower = std::max(lower, -1.0 - lvl.dv_left[i]);
            if (i + 1 < n) sequence = std::max(sequence, lvl.dv_left[i + 1] - lvl.dv_right[i]);
        }
        add("concavity.node-jump", j, node_jump, tol);
        add("concavity.sequence", j, sequence, tol);
        add("slope.lower-bound", j, lower, tol);
        double cap_worst = std::max(std::abs(lvl.dv_right[lvl.interior_end] + 1.0),
                                    std::abs(lvl.deriv_at(lvl.gamma * 1.5 + 1.0, Side::right) + 1.0));
        if (lvl.interior_end > lvl.interior_begin)  // smooth fit from inside, unless gamma = b
            cap_worst = std::max(cap_worst, std::abs(lvl.dv_left[lvl.interior_end] + 1.0));
        add("slope.cap", j, cap_worst, tol);

        if (j >= 2) {
            const auto& prev = vf.levels[static_cast<std::size_t>(j) - 2];
            double propz = 0.0;
            for (std::size_t i = lvl.interior_begin; i <= lvl.interior_end; ++i) {
                const double y = lvl.u[i] - lvl.b;
                propz = std::max(propz, lvl.dv_right[i] - prev.deriv_at(y, Side::right));
                // the left derivative at b_j itself is the linear extrapolation
                // slope, which the bound does not cover
                if (i > lvl.interior_begin)
                    propz = std::max(propz, lvl.dv_left[i] - prev.deriv_at(y, Side::left));
            }
            // probe prev's own kinks shifted into this level, and the linear tail
            for (double y : prev.breakpoints) {
                const double xx = y + lvl.b;
                if (xx <= lvl.b || xx > lvl.gamma) continue;
                propz = std::max(propz, lvl.deriv_at(xx, Side::right) - prev.deriv_at(y, Side::right));
                propz = std::max(propz, lvl.deriv_at(xx, Side::left) - prev.deriv_at(y, Side::left));
            }
            propz = std::max(propz, lvl.deriv_at(lvl.gamma + 1.0, Side::right) -
                                        prev.deriv_at(lvl.gamma + 1.0 - lvl.b, Side::right));
            add("cross-level.derivative-bound", j, propz, tol);

            // boundary derivative identity, re-derived from grid values alone
            const std::size_t i0 = lvl.interior_begin;
            const double fd = fd_oneside(lvl.u[i0], lvl.u[i0 + 1], lvl.u[i0 + 2], lvl.v[i0],
                                         lvl.v[i0 + 1], lvl.v[i0 + 2]);
            const double lam = vf.derived.lambda[static_cast<std::size_t>(j)];
            const double identity =
                (lam * lvl.vbar - j * vf.derived.mu) / (lvl.b * (vf.rate + lam));
            add("boundary-derivative.identity", j, std::abs(fd - identity), boundary_tol);
        } else {
            // slope jump at b_1 must be (mu - r b_1)/(lambda_1 b_1) > 0
            const double lam = vf.derived.lambda[1];
            const double jump = lvl.dv_left[lvl.interior_begin] - lvl.dv_right[lvl.interior_begin];
            add("concavity.kink-jump-positive", j,
                std::abs(jump - (vf.derived.mu - vf.rate * lvl.b) / (lam * lvl.b)), tol);
        }
    }

    rep.clean = true;
    for (const auto& c : rep.checks) rep.clean = rep.clean && c.pass;
    return rep;
}

}  // namespace loanpool
