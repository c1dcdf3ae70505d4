#include <doctest.h>

#include <cmath>

#include "loanpool/rng.hpp"
#include "loanpool/solver.hpp"
#include "support.hpp"

using namespace loanpool;

namespace {

ValueFunctions build_reference(double rate = 0.05, SolverSettings s = {}) {
    const auto p = testsupport::reference_params(rate);
    return build_all(p, derive(p), s);
}

}  // namespace

TEST_CASE("solve_v1: affine closed form and the kink at b_1") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    const auto v1 = solve_v1(d, p.rate);
    CHECK(v1.gamma == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(v1.vbar == doctest::Approx(3.04).epsilon(1e-14));
    CHECK(v1.slope_low() == doctest::Approx(3.8).epsilon(1e-14));
    for (double u : {0.8, 1.0, 2.0, 3.84})
        CHECK(v1.value_at(u) == doctest::Approx(3.84 - u).epsilon(1e-14));
    CHECK(v1.value_at(0.4) == doctest::Approx(1.52).epsilon(1e-14));
    // slope jump (mu - r b_1)/(lambda_1 b_1) > 0
    const double jump = v1.deriv_at(0.8, Side::left) - v1.deriv_at(0.8, Side::right);
    CHECK(jump == doctest::Approx((1.0 - 0.05 * 0.8) / (0.25 * 0.8)).epsilon(1e-12));
    CHECK(jump > 0.0);
}

TEST_CASE("solve_v1: gamma_1 = b_1 for random admissible parameters") {
    PathRng rng = PathRng::for_path(11, 3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = testsupport::random_admissible(rng, 1 + static_cast<int>(rng.uniform() * 4));
        const auto d = derive(p);
        const auto v1 = solve_v1(d, p.rate);
        CHECK(v1.gamma == d.b[1]);
        CHECK(v1.vbar == doctest::Approx((p.mu - d.b[1] * (p.rate + d.lambda[1])) / d.lambda[1])
                             .epsilon(1e-14));
    }
}

TEST_CASE("eval_candidate: boundary reduction and the analytic level-2 oracle") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    const auto v1 = solve_v1(d, p.rate);
    const testsupport::Level2Oracle oracle;

    // at u = gamma the integral vanishes and only the boundary term remains
    const double at_gamma = eval_candidate(2, 1.6, 1.6, v1, d, p.rate, 1e-12);
    CHECK(at_gamma == doctest::Approx(6.08).epsilon(1e-13));

    for (double u : {0.8 + 1e-9, 0.9, 1.0, 1.2, 1.4, 1.5999}) {
        const double got = eval_candidate(2, u, 1.6, v1, d, p.rate, 1e-11);
        CHECK(std::abs(got - oracle.v2(u)) < 1e-9);
    }
    CHECK(eval_candidate(2, 0.8 + 1e-9, 1.6, v1, d, p.rate, 1e-11) ==
          doctest::Approx(5.6154507309608).epsilon(1e-8));

    CHECK_THROWS_AS(eval_candidate(2, 0.8, 1.6, v1, d, p.rate, 1e-10), std::domain_error);
    CHECK_THROWS_AS(eval_candidate(2, 1.7, 1.6, v1, d, p.rate, 1e-10), std::domain_error);
}

TEST_CASE("eval_candidate: empty-interval identity for random parameters and levels") {
    PathRng rng = PathRng::for_path(23, 1);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = testsupport::random_admissible(rng, 3);
        const auto d = derive(p);
        ValueFunctions vf;
        try {
            vf = build_all(p, d, SolverSettings{512, 1e-10, 1e-12});
        } catch (const ConditionError&) {
            continue;
        }
        for (int j = 2; j <= 3; ++j) {
            const auto& prev = vf.level(j - 1);
            const double g = vf.level(j).gamma * (1.0 + 0.1 * rng.uniform());
            const double bj = d.b[static_cast<std::size_t>(j)];
            const double lam = d.lambda[static_cast<std::size_t>(j)];
            const double expect =
                prev.value_at(g - bj) + (j * p.mu - (p.rate * g + lam * bj)) / lam;
            CHECK(eval_candidate(j, g, g, prev, d, p.rate, 1e-10) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("find_gamma: gamma_2 is exactly b_1 + b_2") {
    PathRng rng = PathRng::for_path(5, 9);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = testsupport::random_admissible(rng, 2 + static_cast<int>(rng.uniform() * 3));
        const auto d = derive(p);
        const auto v1 = solve_v1(d, p.rate);
        const double g2 = find_gamma(2, v1, d, p.rate, 1e-12);
        CHECK(g2 == d.b[1] + d.b[2]);  // exact: the subdifferential at b_1 contains the target
    }
}

TEST_CASE("find_gamma: gamma_3 against the analytic root oracle") {
    const auto vf = build_reference();
    const testsupport::Level2Oracle oracle;
    CHECK(std::abs(vf.level(3).gamma - oracle.gamma3()) < 1e-6);
    CHECK(vf.level(3).gamma == doctest::Approx(2.3863050922453).epsilon(1e-6));
    // ordering bounds b_3 + b_2 <= gamma_3 <= b_3 + gamma_2
    CHECK(vf.level(3).gamma >= 1.6);
    CHECK(vf.level(3).gamma <= 0.8 + vf.level(2).gamma + 1e-12);
}

TEST_CASE("find_gamma: r = 0 pushes the boundary to b_j + gamma_{j-1}") {
    const auto p = testsupport::reference_params(0.0);
    const auto d = derive(p);
    const auto v1 = solve_v1(d, 0.0);
    CHECK(find_gamma(2, v1, d, 0.0, 1e-12) == d.b[2] + v1.gamma);
}

TEST_CASE("find_gamma: continuation condition violation is reported") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    const auto v1 = solve_v1(d, p.rate);
    // a huge rate makes r/lambda_2 - 1 exceed vbar_1/b_1
    const double bad_rate = d.lambda[2] * (1.0 + v1.vbar / v1.b) * 1.01;
    CHECK_THROWS_AS(find_gamma(2, v1, d, bad_rate, 1e-12), ConditionError);
}

TEST_CASE("build_all: reference solve matches the level-2 oracle") {
    const auto vf = build_reference();
    const testsupport::Level2Oracle oracle;
    const auto& l2 = vf.level(2);

    CHECK(vf.level(1).gamma == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(l2.gamma == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(l2.vbar == doctest::Approx(5.61542).epsilon(2e-5));
    CHECK(l2.value_at(1.6) == doctest::Approx(6.08).epsilon(1e-9));

    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double u = 0.8 + (1.6 - 0.8) * (i + 0.5) / 1001.5;
        worst = std::max(worst, std::abs(l2.value_at(u) - oracle.v2(u)));
    }
    CHECK(worst < 1e-8);

    // level-3 value at its own boundary, via the oracle's boundary identity
    const double g3 = oracle.gamma3();
    const double expect_v3 =
        oracle.v2(g3 - 0.8) + (3.0 - (0.05 * g3 + 0.75 * 0.8)) / 0.75;
    CHECK(vf.level(3).value_gamma == doctest::Approx(expect_v3).epsilon(1e-8));
}

TEST_CASE("build_all: single loan reduces to solve_v1") {
    PoolParams p = testsupport::reference_params();
    p.loans = 1;
    p.alpha = {0.25};
    const auto d = derive(p);
    const auto vf = build_all(p, d, {});
    REQUIRE(vf.levels.size() == 1);
    const auto direct = solve_v1(d, p.rate);
    CHECK(vf.level(1).gamma == direct.gamma);
    CHECK(vf.level(1).vbar == direct.vbar);
}

TEST_CASE("build_all: r = 0 closed forms") {
    const auto vf = build_reference(0.0);
    for (int j = 1; j <= 3; ++j)
        CHECK(vf.level(j).gamma == doctest::Approx(0.8 * j).epsilon(1e-15));
    CHECK(vf.level(3).value_gamma == doctest::Approx(9.6).epsilon(1e-10));
    // social value at the top equals the first best
    CHECK(vf.level(3).gamma + vf.level(3).value_gamma == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("build_all: r -> 0 consistency") {
    const auto tiny = build_reference(1e-6);
    const auto zero = build_reference(0.0);
    for (int j = 1; j <= 3; ++j) {
        CHECK(std::abs(tiny.level(j).gamma - zero.level(j).gamma) < 1e-3);
        for (int i = 0; i <= 40; ++i) {
            const double u = zero.level(j).gamma * i / 40.0;
            CHECK(std::abs(tiny.level(j).value_at(u) - zero.level(j).value_at(u)) < 1e-3);
        }
    }
}

TEST_CASE("build_all: maximal-solution property of the boundary choice") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    const auto vf = build_reference();
    for (int j : {2, 3}) {
        const auto& prev = vf.level(j - 1);
        const double g = vf.level(j).gamma;
        for (double frac : {0.15, 0.5, 0.93}) {
            const double u = d.b[static_cast<std::size_t>(j)] * (1 - frac) + g * frac;
            const double at_star = eval_candidate(j, u, g, prev, d, p.rate, 1e-11);
            for (double h : {-1e-3, 1e-3}) {
                const double perturbed = eval_candidate(j, u, g + h, prev, d, p.rate, 1e-11);
                CHECK(at_star >= perturbed - 1e-10);
            }
        }
    }
}

TEST_CASE("build_all: intensity condition is recorded and enforced") {
    const auto vf = build_reference();
    CHECK(vf.hyp_lambda_lhs[2] == 0.0);  // v_1'(b_1+) = -1, positive part vanishes
    CHECK(vf.hyp_lambda_lhs[3] == doctest::Approx(0.2615269270379).epsilon(1e-4));
    CHECK(vf.hyp_lambda_rhs[3] == doctest::Approx(0.9045205893905).epsilon(1e-9));
    CHECK(vf.hyp_lambda_lhs[3] < vf.hyp_lambda_rhs[3]);
}

TEST_CASE("build_all: rejects failed standing assumptions") {
    auto p = testsupport::reference_params();
    p.private_benefit = p.mu * p.epsilon * 1.01;  // monitoring efficiency fails
    const auto d = derive(p);
    CHECK_THROWS_AS(build_all(p, d, {}), ConditionError);
}

TEST_CASE("eval/eval_deriv: closed regions, level 0, and errors") {
    const auto vf = build_reference();
    CHECK(eval(vf, 0, 0.37) == 0.0);
    CHECK(eval(vf, 0, 100.0) == 0.0);
    CHECK(eval(vf, 1, 2.0) == doctest::Approx(1.84).epsilon(1e-14));
    CHECK(eval_deriv(vf, 2, vf.level(2).gamma, Side::right) == -1.0);
    CHECK(eval_deriv(vf, 2, vf.level(2).gamma + 5.0, Side::right) == -1.0);
    CHECK(eval_deriv(vf, 3, 0.3, Side::left) ==
          doctest::Approx(vf.level(3).vbar / 0.8).epsilon(1e-12));
    CHECK_THROWS_AS(eval(vf, 4, 1.0), std::out_of_range);
    CHECK_THROWS_AS(eval(vf, -1, 1.0), std::out_of_range);
    CHECK_THROWS_AS(eval(vf, 1, -0.5), std::domain_error);
}

TEST_CASE("hjb_residual: zero inside, nonpositive above, exact at level 1") {
    const auto vf = build_reference();
    const double qt = vf.settings.quad_tol;

    for (int j : {2, 3}) {
        const auto& lvl = vf.level(j);
        double worst = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double u = lvl.b + (lvl.gamma - lvl.b) * (i - 0.5) / 1000.0;
            worst = std::max(worst, std::abs(hjb_residual(vf, j, u)));
        }
        CHECK(worst <= 10 * qt);
        CHECK(std::abs(hjb_residual(vf, j, lvl.gamma)) <= 10 * qt);
        for (double delta : {1e-6, 0.1, 1.0, 10.0})
            CHECK(hjb_residual(vf, j, lvl.gamma + delta) <= 1e-12);
    }

    // level 1: the pool is lost on default, residual is -r (u - b_1)
    for (double u : {0.81, 1.0, 2.5})
        CHECK(hjb_residual(vf, 1, u) == doctest::Approx(-0.05 * (u - 0.8)).epsilon(1e-12));
    CHECK_THROWS_AS(hjb_residual(vf, 2, 0.8), std::domain_error);
}

TEST_CASE("hjb_residual: wide pools stay within solver tolerance") {
    PoolParams big;
    big.loans = 10;
    big.mu = 1.0;
    big.private_benefit = 0.1;
    big.epsilon = 0.5;
    big.rate = 0.05;
    big.alpha.assign(10, 0.25);

    PoolParams ladder;
    ladder.loans = 8;
    for (int j = 1; j <= 8; ++j) ladder.alpha.push_back(1.8 * std::pow(0.7, j - 1));
    ladder.mu = 1.2;
    ladder.epsilon = 0.6;
    ladder.rate = 0.02;
    ladder.private_benefit = 0.05;

    for (const auto& p : {big, ladder}) {
        const auto vf = build_all(p, derive(p), {});
        for (int j = 2; j <= p.loans; ++j) {
            const auto& lvl = vf.level(j);
            double worst = 0.0;
            for (int i = 1; i <= 500; ++i) {
                const double u = lvl.b + (lvl.gamma - lvl.b) * (i - 0.5) / 500.0;
                worst = std::max(worst, std::abs(hjb_residual(vf, j, u)));
            }
            INFO("loans ", p.loans, " level ", j, " worst ", worst);
            CHECK(worst <= 10 * vf.settings.quad_tol);
        }
        CHECK(check_shape(vf).clean);
    }
}

TEST_CASE("hjb_residual: the analytic level-2 solution satisfies the equation") {
    const auto vf = build_reference();
    // residual at u = 1.2 computed from the solver output is zero within
    // quadrature tolerance, matching the oracle which solves the same ODE
    CHECK(std::abs(hjb_residual(vf, 2, 1.2)) < 10 * vf.settings.quad_tol);
}

TEST_CASE("brute_force_sup: the contract controls attain the bracket maximum") {
    const auto vf = build_reference();

    // probation state: theta* = (u-b_2)/b_1 = 0.5, z* = 0.4
    auto sup = brute_force_sup(vf, 2, 1.2, 200, 200);
    CHECK(std::abs(sup.value) < 1e-4);
    CHECK(sup.theta == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(sup.z == doctest::Approx(0.4).epsilon(1e-2));

    // cap state (here b_2 + b_1 = gamma_2, the two parametrizations coincide)
    sup = brute_force_sup(vf, 2, 1.6, 200, 200);
    CHECK(std::abs(sup.value) < 1e-4);
    CHECK(sup.theta == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(sup.z == doctest::Approx(0.8).epsilon(1e-2));

    // interior state at level 3
    sup = brute_force_sup(vf, 3, 2.0, 200, 200);
    CHECK(std::abs(sup.value) < 1e-4);
    CHECK(sup.theta == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(sup.z == doctest::Approx(1.2).epsilon(1e-2));

    // probation/interior junction at level 3: theta's bound reaches 1 exactly
    sup = brute_force_sup(vf, 3, 1.6, 200, 200);
    CHECK(std::abs(sup.value) < 1e-4);
    CHECK(sup.theta == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(sup.z == doctest::Approx(0.8).epsilon(1e-2));

    CHECK_THROWS_AS(brute_force_sup(vf, 2, 0.8, 10, 10), std::domain_error);
    CHECK_THROWS_AS(brute_force_sup(vf, 2, 1.7, 10, 10), std::domain_error);
    CHECK_THROWS_AS(brute_force_sup(vf, 1, 0.9, 10, 10), std::domain_error);
}

TEST_CASE("check_shape: reference build is clean") {
    const auto vf = build_reference();
    const auto rep = check_shape(vf);
    for (const auto& c : rep.checks) {
        INFO(c.name, " level ", c.level, " worst ", c.worst);
        CHECK(c.pass);
    }
    CHECK(rep.clean);
}

TEST_CASE("check_shape: boundary derivative identity at level 2") {
    const auto vf = build_reference();
    // two routes: the ODE limit and the analytic oracle derivative
    const testsupport::Level2Oracle oracle;
    const double identity = (0.5 * vf.level(2).vbar - 2.0) / (0.8 * 0.55);
    CHECK(identity == doctest::Approx(1.8357).epsilon(1e-4));
    CHECK(vf.level(2).dv_right[vf.level(2).interior_begin] ==
          doctest::Approx(oracle.dv2(0.8)).epsilon(1e-9));
}

TEST_CASE("check_shape: random admissible builds stay clean") {
    PathRng rng = PathRng::for_path(99, 2);
    int built = 0;
    while (built < 5) {
        const auto p = testsupport::random_admissible(rng, 2 + static_cast<int>(rng.uniform() * 4));
        try {
            const auto vf = build_all(p, derive(p), SolverSettings{1024, 1e-10, 1e-12});
            const auto rep = check_shape(vf);
            for (const auto& c : rep.checks) {
                INFO(c.name, " level ", c.level, " worst ", c.worst, " loans ", p.loans);
                CHECK(c.pass);
            }
            const auto d = derive(p);
            for (int j = 2; j <= p.loans; ++j) {
                const double g = vf.level(j).gamma;
                CHECK(g >= d.b[static_cast<std::size_t>(j)] +
                               d.b[static_cast<std::size_t>(j) - 1] - 1e-12);
                CHECK(g <= d.b[static_cast<std::size_t>(j)] + vf.level(j - 1).gamma + 1e-12);
            }
            ++built;
        } catch (const ConditionError&) {
        }
    }
}
