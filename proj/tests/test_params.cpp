#include <doctest.h>

#include <cmath>

#include "loanpool/params.hpp"
#include "loanpool/rng.hpp"
#include "support.hpp"

using namespace loanpool;

TEST_CASE("derive: reference pool constants") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    for (int j = 1; j <= 3; ++j) CHECK(d.b[static_cast<std::size_t>(j)] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(d.lambda[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.lambda[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.lambda[3] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(d.alpha_bar[3] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.first_best == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("derive: single loan and harmonic mean") {
    PoolParams p = testsupport::reference_params();
    p.loans = 1;
    p.alpha = {0.37};
    const auto d = derive(p);
    CHECK(d.alpha_bar[1] == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(d.lambda[1] == doctest::Approx(0.37).epsilon(1e-15));

    PoolParams q = testsupport::reference_params();
    q.loans = 2;
    q.alpha = {1.0, 1.0 / 3.0};
    const auto dq = derive(q);
    CHECK(dq.alpha_bar[2] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("derive: lambda_j b_j = j B / epsilon to machine precision") {
    PathRng rng = PathRng::for_path(7, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const auto p = testsupport::random_admissible(rng, 1 + static_cast<int>(rng.uniform() * 5));
        const auto d = derive(p);
        for (int j = 1; j <= p.loans; ++j) {
            const double lhs = d.lambda[static_cast<std::size_t>(j)] * d.b[static_cast<std::size_t>(j)];
            const double rhs = j * p.private_benefit / p.epsilon;
            CHECK(std::abs(lhs - rhs) <= 1e-14 * rhs);
        }
        for (int j = 2; j <= p.loans; ++j)
            CHECK(d.b[static_cast<std::size_t>(j)] >= d.b[static_cast<std::size_t>(j) - 1] * (1 - 1e-14));
    }
}

TEST_CASE("derive: rejects violated structural invariants") {
    auto base = testsupport::reference_params();
    CHECK_NOTHROW(derive(base));

    auto p = base;
    p.mu = 0.0;
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
    p = base;
    p.epsilon = -1.0;
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
    p = base;
    p.rate = -0.01;
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
    p = base;
    p.alpha = {0.25, 0.25};
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
    p = base;
    p.alpha = {0.2, 0.25, 0.25};  // increasing in the pool size
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
    p = base;
    p.alpha = {0.25, 0.25, -0.1};
    CHECK_THROWS_AS(derive(p), std::invalid_argument);
}

TEST_CASE("check_assumptions: reference margins") {
    const auto p = testsupport::reference_params();
    const auto d = derive(p);
    const auto rep = check_assumptions(p, d);
    CHECK(rep.overall);

    const auto* prof = rep.find("pool-profitability");
    REQUIRE(prof != nullptr);
    CHECK(prof->margin == doctest::Approx(0.75).epsilon(1e-12));

    const auto* eff3 = rep.find("monitoring-efficiency[j=3]");
    REQUIRE(eff3 != nullptr);
    CHECK(eff3->margin == doctest::Approx(4.0 / 3.0 - 0.2).epsilon(1e-12));
}

TEST_CASE("check_assumptions: boundary and failure cases") {
    auto p = testsupport::reference_params();
    p.mu = 0.25;  // exactly alpha_bar_I
    p.private_benefit = 0.01;
    auto d = derive(p);
    auto rep = check_assumptions(p, d);
    const auto* prof = rep.find("pool-profitability");
    REQUIRE(prof != nullptr);
    CHECK(prof->holds);
    CHECK(prof->margin == doctest::Approx(0.0));

    // raising B until mu*eps <= B flips monitoring efficiency (rhs <= 0)
    p = testsupport::reference_params();
    p.private_benefit = p.mu * p.epsilon * 1.01;
    d = derive(p);
    rep = check_assumptions(p, d);
    CHECK_FALSE(rep.overall);
    CHECK_FALSE(rep.find("monitoring-efficiency[j=1]")->holds);
}

TEST_CASE("check_assumptions: margin flips sign exactly with the inequality") {
    auto p = testsupport::reference_params();
    const auto d = derive(p);
    const double rhs = (p.mu * p.epsilon - p.private_benefit) / p.private_benefit * p.epsilon /
                       (1.0 + p.epsilon);
    const double r_critical = rhs * d.alpha_bar[3];
    for (double shift : {-1e-3, -1e-9, 1e-9, 1e-3}) {
        p.rate = r_critical + shift;
        const auto rep = check_assumptions(p, derive(p));
        const auto* c = rep.find("monitoring-efficiency[j=3]");
        REQUIRE(c != nullptr);
        CHECK(c->holds == (shift <= 0.0));
        CHECK(std::abs(c->margin + shift / d.alpha_bar[3]) < 1e-12);
    }
}

TEST_CASE("phi_beta: removable points and hand values") {
    for (double beta : {0.1, 0.5, 1.0}) CHECK(phi_beta(1.0, beta) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi_beta(0.5, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
    // small-x limit exists: values at 1e-8 and 1e-6 agree and match exp(-beta)
    for (double beta : {0.3, 1.0}) {
        CHECK(std::abs(phi_beta(1e-8, beta) - phi_beta(1e-6, beta)) < 1e-6);
        CHECK(phi_beta(1e-12, beta) == doctest::Approx(std::exp(-beta)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(phi_beta(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(phi_beta(-1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(phi_beta(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(phi_beta(1.0, 1.5), std::domain_error);
}

TEST_CASE("psi_beta: endpoints, the x=1 limit, and monotonicity") {
    CHECK(psi_beta(0.0, 1.0) == 1.0);
    CHECK(psi_beta(0.0, 0.4) == 1.0);

    // x = 1 is a removable singularity with limit 1 - log((2+beta)/2);
    // cross-check the stored limit against the formula evaluated nearby
    const double at_one = psi_beta(1.0, 1.0);
    CHECK(at_one == doctest::Approx(1.0 - std::log(1.5)).epsilon(1e-12));
    CHECK(at_one == doctest::Approx(0.594535).epsilon(1e-6));
    CHECK(std::abs(psi_beta(1.0 + 1e-6, 1.0) - at_one) < 1e-5);
    CHECK(std::abs(psi_beta(1.0 - 1e-6, 1.0) - at_one) < 1e-5);

    // continuity bound |psi(1 +- h) - psi(1)| <= C h
    for (double beta : {0.4, 1.0}) {
        const double limit = psi_beta(1.0, beta);
        for (double h : {1e-3, 1e-4, 1e-5}) {
            CHECK(std::abs(psi_beta(1.0 + h, beta) - limit) <= 1.0 * h);
            CHECK(std::abs(psi_beta(1.0 - h, beta) - limit) <= 1.0 * h);
        }
    }

    // decreasing from 1 toward 1/2 on [0, 50], values inside [1/2, 1]
    for (double beta : {0.2, 0.6, 1.0}) {
        double prev = psi_beta(0.0, beta);
        for (int i = 1; i <= 200; ++i) {
            const double x = 50.0 * i / 200.0;
            const double cur = psi_beta(x, beta);
            CHECK(cur < prev + 1e-12);
            CHECK(cur >= 0.5);
            CHECK(cur <= 1.0);
            prev = cur;
        }
    }
    CHECK(psi_beta(50.0, 1.0) == doctest::Approx(0.5).epsilon(5e-3));

    // psi_1 is the infimum over beta
    for (double beta : {0.1, 0.3, 0.7, 0.99}) {
        for (double x : {0.05, 0.3, 0.9, 1.0, 1.1, 3.0, 10.0, 40.0}) {
            CHECK(psi_beta(x, 1.0) <= psi_beta(x, beta) + 1e-12);
        }
    }
    CHECK_THROWS_AS(psi_beta(-0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(psi_beta(1.0, 1.2), std::domain_error);
}
