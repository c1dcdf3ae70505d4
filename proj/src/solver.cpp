#include "loanpool/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace loanpool {

namespace {

constexpr double kZeroKernelSwitch = 1e-8;  // below this the r=0 kernel is the analytic limit

// Gauss-Legendre abscissae/weights on [-1, 1]
constexpr double kGl7X[] = {0.0, 0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
constexpr double kGl7W[] = {0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                            0.1294849661688697};
constexpr double kGl15X[] = {0.0,
                             0.2011940939974345,
                             0.3941513470775634,
                             0.5709721726085388,
                             0.7244177313601700,
                             0.8482065834104272,
                             0.9372733924007059,
                             0.9879925180204854};
constexpr double kGl15W[] = {0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
                             0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
                             0.0703660474881081, 0.0307532419961173};

template <class F>
double gl7(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = kGl7W[0] * f(c);
    for (int i = 1; i < 4; ++i) s += kGl7W[i] * (f(c - h * kGl7X[i]) + f(c + h * kGl7X[i]));
    return s * h;
}

template <class F>
double gl15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = kGl15W[0] * f(c);
    for (int i = 1; i < 8; ++i) s += kGl15W[i] * (f(c - h * kGl15X[i]) + f(c + h * kGl15X[i]));
    return s * h;
}

template <class F>
double adaptive_gl(const F& f, double a, double b, double tol, int depth = 0) {
    const double coarse = gl7(f, a, b);
    const double fine = gl15(f, a, b);
    if (std::abs(fine - coarse) <= tol || depth >= 40 || b - a <= 1e-14 * (1.0 + std::abs(a)))
        return fine;
    const double m = 0.5 * (a + b);
    return adaptive_gl(f, a, m, 0.5 * tol, depth + 1) + adaptive_gl(f, m, b, 0.5 * tol, depth + 1);
}

// Integrating-factor kernel of the level ODE. For r > 0 the weight is
// ((r u + lam b)/(r x + lam b))^(lam/r); its r -> 0 limit is exp((u-x)/b).
struct OdeKernel {
    double r;  // 0 in the exponential regime
    double lam;
    double b;

    static OdeKernel make(double rate, double lam, double b) {
        return {rate < kZeroKernelSwitch ? 0.0 : rate, lam, b};
    }
    double log_weight(double u, double x) const {
        if (r == 0.0) return (u - x) / b;
        return (lam / r) * std::log1p(r * (u - x) / (r * x + lam * b));
    }
    double weight(double u, double x) const { return std::exp(log_weight(u, x)); }
    double denom(double x) const { return r * x + lam * b; }
    double boundary_value(int j, double mu, double v_prev_at_gamma, double gamma) const {
        return v_prev_at_gamma + (j * mu - (r * gamma + lam * b)) / lam;
    }
};

std::vector<double> cosine_nodes(double a, double b, int cells) {
    std::vector<double> out(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        out[static_cast<std::size_t>(i)] =
            a + (b - a) * 0.5 * (1.0 - std::cos(std::numbers::pi * i / cells));
    out.front() = a;
    out.back() = b;
    return out;
}

// Interior grid on [b_j, gamma]: segment boundaries at every kink the source
// v_{j-1}(. - b_j) inherits, cosine-clustered nodes within each segment.
std::vector<double> interior_grid(double bj, double gamma, const ValueFunctionLevel& prev,
                                  int points) {
    std::vector<double> seg = {bj, gamma};
    for (double y : prev.breakpoints)
        if (y > 0.0 && bj + y > bj * (1.0 + 1e-13) && bj + y < gamma * (1.0 - 1e-13))
            seg.push_back(bj + y);
    std::sort(seg.begin(), seg.end());
    seg.erase(std::unique(seg.begin(), seg.end()), seg.end());
    // drop kink points closer than the node resolution to a neighbor (a free
    // boundary can sit within bisection tolerance of the previous probation kink)
    const double min_width = 1e-9 * (gamma - bj);
    std::vector<double> merged = {seg.front()};
    for (std::size_t s = 1; s + 1 < seg.size(); ++s)
        if (seg[s] - merged.back() >= min_width && seg.back() - seg[s] >= min_width)
            merged.push_back(seg[s]);
    merged.push_back(seg.back());
    seg = std::move(merged);

    const double total_len = gamma - bj;
    const int total = std::max(points, 128);
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(total) + 8);
    for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
        const double len = seg[s + 1] - seg[s];
        const int cells = std::max(32, static_cast<int>(std::lround(total * len / total_len)));
        auto nodes = cosine_nodes(seg[s], seg[s + 1], cells);
        if (!grid.empty()) nodes.erase(nodes.begin());
        grid.insert(grid.end(), nodes.begin(), nodes.end());
    }
    return grid;
}

ValueFunctionLevel assemble_level(int j, double bj, double b_prev, double gamma,
                                  std::vector<double> interior, std::vector<double> values,
                                  std::vector<double> derivs, std::vector<double> curv_left,
                                  std::vector<double> curv_right) {
    ValueFunctionLevel lvl;
    lvl.level = j;
    lvl.b = bj;
    lvl.b_prev = b_prev;
    lvl.gamma = gamma;
    lvl.vbar = values.front();
    lvl.value_gamma = values.back();

    lvl.breakpoints = {0.0, bj};
    if (b_prev > 0.0 && bj + b_prev < gamma) lvl.breakpoints.push_back(bj + b_prev);
    if (gamma > bj) lvl.breakpoints.push_back(gamma);

    const int low_cells = 8;
    const double slope = lvl.slope_low();
    for (int i = 0; i < low_cells; ++i) {
        const double x = bj * i / low_cells;
        lvl.u.push_back(x);
        lvl.v.push_back(slope * x);
        lvl.dv_left.push_back(slope);
        lvl.dv_right.push_back(slope);
        lvl.d2v_left.push_back(0.0);
        lvl.d2v_right.push_back(0.0);
    }
    lvl.interior_begin = lvl.u.size();
    for (std::size_t i = 0; i < interior.size(); ++i) {
        lvl.u.push_back(interior[i]);
        lvl.v.push_back(values[i]);
        lvl.dv_left.push_back(i == 0 ? slope : derivs[i]);
        lvl.dv_right.push_back(derivs[i]);
        lvl.d2v_left.push_back(i == 0 ? 0.0 : curv_left[i]);
        lvl.d2v_right.push_back(curv_right[i]);
    }
    lvl.interior_end = lvl.u.size() - 1;
    lvl.dv_left.back() = -1.0;
    lvl.dv_right.back() = -1.0;
    lvl.d2v_right.back() = 0.0;  // linear beyond gamma
    return lvl;
}

ValueFunctionLevel build_level(int j, const ValueFunctionLevel& prev, double gamma,
                               const DerivedQuantities& d, double rate,
                               const SolverSettings& settings) {
    const double bj = d.b[static_cast<std::size_t>(j)];
    const double lam = d.lambda[static_cast<std::size_t>(j)];
    const auto kernel = OdeKernel::make(rate, lam, bj);

    auto x = interior_grid(bj, gamma, prev, settings.grid_points);
    const std::size_t m = x.size() - 1;
    std::vector<double> val(x.size());
    val[m] = kernel.boundary_value(j, d.mu, prev.value_at(gamma - bj), gamma);

    // march the exact solution down from gamma; every multiplier is <= 1 so
    // quadrature errors do not amplify
    for (std::size_t i = m; i-- > 0;) {
        const double lo = x[i], hi = x[i + 1];
        auto f = [&](double t) {
            return kernel.weight(lo, t) * (j * d.mu + lam * prev.value_at(t - bj)) /
                   kernel.denom(t);
        };
        const double strip_tol = settings.quad_tol * (hi - lo) / (gamma - bj);
        val[i] = kernel.weight(lo, hi) * val[i + 1] + adaptive_gl(f, lo, hi, strip_tol);
    }

    // v' from the equation itself, then v'' from its derivative; the source
    // slope v'_{j-1}(. - b_j) jumps at kinks, hence one-sided curvatures
    std::vector<double> der(x.size()), curv_l(x.size()), curv_r(x.size());
    for (std::size_t i = 0; i <= m; ++i)
        der[i] = (lam * (val[i] - prev.value_at(x[i] - bj)) - j * d.mu) / kernel.denom(x[i]);
    der[m] = -1.0;  // exact by the boundary value
    for (std::size_t i = 0; i <= m; ++i) {
        const double y = x[i] - bj;
        curv_l[i] = (lam * (der[i] - prev.deriv_at(y, Side::left)) - kernel.r * der[i]) /
                    kernel.denom(x[i]);
        curv_r[i] = (lam * (der[i] - prev.deriv_at(y, Side::right)) - kernel.r * der[i]) /
                    kernel.denom(x[i]);
    }

    return assemble_level(j, bj, d.b[static_cast<std::size_t>(j) - 1], gamma, std::move(x),
                          std::move(val), std::move(der), std::move(curv_l), std::move(curv_r));
}

}  // namespace

ValueFunctionLevel solve_v1(const DerivedQuantities& d, double rate) {
    const double b1 = d.b[1];
    const double lam = d.lambda[1];
    const double vbar = (d.mu - b1 * (rate + lam)) / lam;

    ValueFunctionLevel lvl;
    lvl.level = 1;
    lvl.b = b1;
    lvl.b_prev = 0.0;
    lvl.gamma = b1;
    lvl.vbar = vbar;
    lvl.value_gamma = vbar;
    lvl.breakpoints = {0.0, b1};
    const int low_cells = 8;
    for (int i = 0; i <= low_cells; ++i) {
        const double x = b1 * i / low_cells;
        lvl.u.push_back(x);
        lvl.v.push_back(vbar / b1 * x);
        lvl.dv_left.push_back(vbar / b1);
        lvl.dv_right.push_back(i == low_cells ? -1.0 : vbar / b1);
        lvl.d2v_left.push_back(0.0);
        lvl.d2v_right.push_back(0.0);
    }
    lvl.interior_begin = lvl.interior_end = lvl.u.size() - 1;
    return lvl;
}

double eval_candidate(int j, double u, double gamma, const ValueFunctionLevel& prev,
                      const DerivedQuantities& d, double rate, double quad_tol) {
    const double bj = d.b[static_cast<std::size_t>(j)];
    const double lam = d.lambda[static_cast<std::size_t>(j)];
    if (!(gamma >= bj)) throw std::domain_error("eval_candidate: gamma must be >= b_j");
    if (!(u > bj) || !(u <= gamma))
        throw std::domain_error("eval_candidate: u must lie in (b_j, gamma]");

    const auto kernel = OdeKernel::make(rate, lam, bj);
    double value =
        kernel.boundary_value(j, d.mu, prev.value_at(gamma - bj), gamma) * kernel.weight(u, gamma);
    if (u == gamma) return value;

    std::vector<double> pts = {u, gamma};
    for (double y : prev.breakpoints)
        if (y > 0.0 && bj + y > u && bj + y < gamma) pts.push_back(bj + y);
    std::sort(pts.begin(), pts.end());

    auto f = [&](double t) {
        return kernel.weight(u, t) * (j * d.mu + lam * prev.value_at(t - bj)) / kernel.denom(t);
    };
    for (std::size_t s = 0; s + 1 < pts.size(); ++s)
        value += adaptive_gl(f, pts[s], pts[s + 1], quad_tol * (pts[s + 1] - pts[s]) / (gamma - u));
    return value;
}

double find_gamma(int j, const ValueFunctionLevel& prev, const DerivedQuantities& d, double rate,
                  double bisect_tol) {
    const double bj = d.b[static_cast<std::size_t>(j)];
    const double lam = d.lambda[static_cast<std::size_t>(j)];
    const double target = rate / lam - 1.0;
    const double continuation_bound = prev.vbar / prev.b;
    if (target > continuation_bound + 1e-12)
        throw ConditionError("continuation condition fails at level " + std::to_string(j) +
                             ": r/lambda_j - 1 = " + std::to_string(target) +
                             " exceeds vbar_{j-1}/b_{j-1} = " + std::to_string(continuation_bound));

    if (target <= -1.0) return bj + prev.gamma;  // r = 0: slope -1 is attained only at gamma_{j-1}
    const double deriv_right_at_b = prev.dv_right[prev.interior_begin];
    if (target >= deriv_right_at_b) return bj + prev.b;  // subdifferential at the kink

    double lo = prev.b, hi = prev.gamma;
    while (hi - lo > bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (prev.deriv_at(mid, Side::right) > target)
            lo = mid;
        else
            hi = mid;
    }
    return bj + 0.5 * (lo + hi);
}

ValueFunctions build_all(const PoolParams& params, const DerivedQuantities& derived,
                         const SolverSettings& settings) {
    const auto report = check_assumptions(params, derived);
    if (!report.overall) {
        for (const auto& c : report.conditions)
            if (!c.holds)
                throw ConditionError("standing assumption fails: " + c.name +
                                     " (margin = " + std::to_string(c.margin) + ")");
    }

    ValueFunctions vf;
    vf.derived = derived;
    vf.settings = settings;
    vf.rate = params.rate;
    vf.zero_rate = params.rate == 0.0;
    vf.hyp_lambda_lhs.assign(static_cast<std::size_t>(derived.loans) + 1, 0.0);
    vf.hyp_lambda_rhs.assign(static_cast<std::size_t>(derived.loans) + 1, 0.0);

    vf.levels.push_back(solve_v1(derived, params.rate));
    for (int j = 2; j <= derived.loans; ++j) {
        const auto& prev = vf.levels.back();
        const double lam = derived.lambda[static_cast<std::size_t>(j)];
        const double lhs =
            std::max(0.0, prev.dv_right[prev.interior_begin]) * prev.b / prev.vbar;
        const double rhs = psi_beta(params.rate / lam, 1.0);
        vf.hyp_lambda_lhs[static_cast<std::size_t>(j)] = lhs;
        vf.hyp_lambda_rhs[static_cast<std::size_t>(j)] = rhs;
        if (lhs > rhs + 1e-12)
            throw ConditionError("intensity condition fails at level " + std::to_string(j) +
                                 ": (v'_{j-1}(b+))^+ b_{j-1}/vbar_{j-1} = " + std::to_string(lhs) +
                                 " exceeds psi_1(r/lambda_j) = " + std::to_string(rhs));

        const double gamma = vf.zero_rate
                                 ? prev.gamma + derived.b[static_cast<std::size_t>(j)]
                                 : find_gamma(j, prev, derived, params.rate, settings.bisect_tol);
        vf.levels.push_back(build_level(j, prev, gamma, derived, params.rate, settings));
    }
    return vf;
}

}  // namespace loanpool
