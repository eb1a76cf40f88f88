#include "oracles.hpp"

#include "stakeopt/errors.hpp"
#include "stakeopt/objective.hpp"
#include "stakeopt/strategies.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace stakeopt;

namespace {

TradingProblem linear_problem(double p0, double x = 50.0, double nu_bar = 1.0)
{
    return TradingProblem{
        .schedule = RewardSchedule::polynomial(1.0, 100.0, 10.0),
        .utility = UtilitySpec::linear(0.01, 1.0),
        .price = PriceModel::constant(p0),
        .beta = 0.1,
        .r = 0.0,
        .nu_bar = nu_bar,
        .x = x,
        .penalty = std::nullopt,
    };
}

TradingProblem gbm_problem(double p0)
{
    auto p = linear_problem(p0);
    p.price = PriceModel::gbm(p0, 0.05, 0.3);
    p.beta = 0.1;
    p.r = 0.02;
    return p;
}

TradingProblem parity_problem(double x)
{
    return TradingProblem{
        .schedule = RewardSchedule::polynomial(1.0, 100.0, 20.0),
        .utility = UtilitySpec::linear(0.0, 0.0),
        .price = PriceModel::constant(0.0),
        .beta = 0.1,
        .r = 0.0,
        .nu_bar = 1.0,
        .x = x,
        .penalty = PenaltySpec::quadratic(1.0, 1.0, 0.1, 2),
    };
}

double n1(double t) { return 100.0 + t; }

}  // namespace

TEST_CASE("J2 of full-capacity trading equals the branch values")
{
    const auto p = linear_problem(0.42);
    CHECK(evaluate_j2(p, Strategy::constant(1.0, 1.0)) == doctest::Approx(value_v_plus(p, 0.0, 50.0)).epsilon(1e-6));
    CHECK(evaluate_j2(p, Strategy::constant(-1.0, 1.0)) == doctest::Approx(value_v_minus(p, 0.0, 50.0)).epsilon(1e-6));

    auto cvx = p;
    cvx.utility = UtilitySpec::power(2.0, 1e-3, 1e-3);
    CHECK(evaluate_j2(cvx, Strategy::constant(1.0, 1.0)) ==
          doctest::Approx(value_v_plus(cvx, 0.0, 50.0)).epsilon(1e-6));
}

TEST_CASE("J2 of the classified switch strategy equals its value")
{
    const auto p = linear_problem(0.42);
    const auto cls = classify_linear(p);
    REQUIRE(cls.tag == StrategyTag::BuyThenSell);
    const auto report = evaluate_j2_report(p, cls.strategy);
    CHECK(report.j2 == doctest::Approx(cls.value).epsilon(1e-6));
    CHECK(report.exit_kind == ExitKind::Horizon);
    CHECK(report.exit_time == 10.0);
}

TEST_CASE("J2 of holding keeps the share fixed")
{
    auto p = linear_problem(0.42);
    p.utility = UtilitySpec::linear(1e-6, 1.0);
    const double share = 0.5;
    const double expected =
        oracle::simpson([&](double s) { return std::exp(-0.1 * s) * 1e-6 * share * n1(s); }, 0.0, 10.0, 2000) +
        std::exp(-1.0) * share * n1(10.0);
    CHECK(evaluate_j2(p, Strategy::constant(0.0, 1.0)) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("J2 stops at an exit")
{
    // selling 5 per unit time from 10 shares runs out near t = 2
    auto p = linear_problem(0.42, 10.0, 5.0);
    const auto report = evaluate_j2_report(p, Strategy::constant(-5.0, 5.0));
    CHECK(report.exit_kind == ExitKind::Ruin);
    // X(t) = N(t) (0.1 - 5 ln(N(t)/100)) for alpha = 1
    auto state = [](double t) { return n1(t) * (0.1 - 5.0 * std::log(n1(t) / 100.0)); };
    const double ruin = oracle::bisect(state, 0.1, 10.0);
    CHECK(report.exit_time == doctest::Approx(ruin).epsilon(1e-8));
    const double expected =
        oracle::simpson([&](double t) { return std::exp(-0.1 * t) * 0.01 * state(t) + 5.0 * 0.42; }, 0.0, ruin);
    CHECK(report.j2 == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("Monte Carlo agrees with J1 + J2")
{
    const auto p = gbm_problem(0.45);
    const auto strat = Strategy::piecewise({4.0}, {1.0, -1.0}, 1.0, 10.0);
    const MonteCarloOptions opts{.paths = 20000, .seed = 7, .price_steps = 256, .threads = 2};

    SUBCASE("no bank holdings")
    {
        const auto r = evaluate_full_monte_carlo(p, strat, BankPolicy::zero(), opts);
        CHECK(r.j1 == 0.0);
        REQUIRE(r.mc_mean);
        CHECK(std::abs(*r.mc_mean - r.j2) <= *r.mc_halfwidth);
        CHECK(*r.mc_halfwidth > 0.0);
    }
    SUBCASE("linear holdings lose to discounting")
    {
        BankPolicy bank{.b = [](double t) { return t; }, .db = [](double) { return 1.0; }, .jumps = {}};
        const auto r = evaluate_full_monte_carlo(p, strat, bank, opts);
        const double j1 = (0.02 - 0.1) * oracle::simpson([](double t) { return std::exp(-0.1 * t) * t; }, 0.0, 10.0);
        CHECK(r.j1 == doctest::Approx(j1).epsilon(1e-10));
        CHECK(r.j1 < 0.0);
        CHECK(std::abs(*r.mc_mean - (r.j1 + r.j2)) <= *r.mc_halfwidth);
        CHECK(*r.mc_mean < r.j2);
    }
    SUBCASE("a deposit at t = 3")
    {
        BankPolicy bank{.b = [](double t) { return t >= 3.0 ? 2.0 : 0.0; },
                        .db = [](double) { return 0.0; },
                        .jumps = {{3.0, 2.0}}};
        const auto r = evaluate_full_monte_carlo(p, strat, bank, opts);
        const double j1 = (0.02 - 0.1) * 2.0 * (std::exp(-0.3) - std::exp(-1.0)) / 0.1;
        CHECK(r.j1 == doctest::Approx(j1).epsilon(1e-9));
        CHECK(std::abs(*r.mc_mean - (r.j1 + r.j2)) <= *r.mc_halfwidth);
    }
    SUBCASE("beta = r makes bank holdings neutral")
    {
        auto q = p;
        q.r = q.beta;
        BankPolicy bank{.b = [](double t) { return t; }, .db = [](double) { return 1.0; }, .jumps = {}};
        const auto r = evaluate_full_monte_carlo(q, strat, bank, opts);
        CHECK(r.j1 == 0.0);
        CHECK(std::abs(*r.mc_mean - r.j2) <= *r.mc_halfwidth);
    }
}

TEST_CASE("Monte Carlo is reproducible across thread counts")
{
    const auto p = gbm_problem(0.45);
    const auto strat = Strategy::constant(1.0, 1.0);
    const auto one = evaluate_full_monte_carlo(p, strat, BankPolicy::zero(), {.paths = 2000, .seed = 3, .threads = 1});
    const auto four = evaluate_full_monte_carlo(p, strat, BankPolicy::zero(), {.paths = 2000, .seed = 3, .threads = 4});
    CHECK(*one.mc_mean == *four.mc_mean);
    CHECK(*one.mc_halfwidth == *four.mc_halfwidth);
    const auto other = evaluate_full_monte_carlo(p, strat, BankPolicy::zero(), {.paths = 2000, .seed = 4, .threads = 1});
    CHECK(*other.mc_mean != *one.mc_mean);
}

TEST_CASE("Monte Carlo and bank policy errors")
{
    const auto strat = Strategy::constant(1.0, 1.0);
    CHECK_THROWS_AS(evaluate_full_monte_carlo(linear_problem(0.4), strat, BankPolicy::zero(), {}), ConfigError);
    const auto p = gbm_problem(0.45);
    CHECK_THROWS_AS(evaluate_full_monte_carlo(p, strat, BankPolicy::zero(), {.paths = 1}), ConfigError);

    BankPolicy starts_high{.b = [](double) { return 1.0; }, .db = [](double) { return 0.0; }, .jumps = {}};
    CHECK_THROWS_AS(starts_high.validate(10.0), ConfigError);
    BankPolicy negative{.b = [](double t) { return -t; }, .db = [](double) { return -1.0; }, .jumps = {}};
    CHECK_THROWS_AS(negative.validate(10.0), ConfigError);
    BankPolicy early_jump{.b = [](double) { return 0.0; }, .db = [](double) { return 0.0; }, .jumps = {{0.0, 1.0}}};
    CHECK_THROWS_AS(early_jump.validate(10.0), ConfigError);
    CHECK_NOTHROW(BankPolicy::zero().validate(10.0));
}

TEST_CASE("brute force recovers the linear patterns")
{
    const BruteForceOptions opts{.intervals = 8, .levels = 3, .threads = 4};
    SUBCASE("cheap stake: buy throughout")
    {
        const auto best = brute_force_best(linear_problem(0.3), opts);
        CHECK(best.evaluated == 6561);
        for (double l : best.levels) CHECK(l == 1.0);
    }
    SUBCASE("dear stake: sell throughout")
    {
        const auto best = brute_force_best(linear_problem(0.6), opts);
        for (double l : best.levels) CHECK(l == -1.0);
    }
    SUBCASE("buy then sell")
    {
        const auto p = linear_problem(0.42);
        const auto cls = classify_linear(p);
        const auto best = brute_force_best(p, opts);
        CHECK(best.levels.front() == 1.0);
        CHECK(best.levels.back() == -1.0);
        CHECK(std::is_sorted(best.levels.rbegin(), best.levels.rend()));
        const double slack = discretization_slack(p, 8);
        CHECK(best.value <= cls.value + slack);
        CHECK(best.value >= cls.value - slack);
        CHECK(best.value == doctest::Approx(evaluate_j2(p, best.strategy, 10.0 / 1024)).epsilon(1e-14));
    }
}

TEST_CASE("brute force limits")
{
    const auto p = linear_problem(0.42);
    CHECK_THROWS_AS(brute_force_best(p, {.intervals = 7, .levels = 9}), ConfigError);
    CHECK_THROWS_AS(brute_force_best(p, {.intervals = 8, .levels = 4}), ConfigError);
    CHECK_THROWS_AS(brute_force_best(p, {.intervals = 11, .levels = 3}), ConfigError);
    CHECK_THROWS_AS(brute_force_best(p, {.intervals = 0, .levels = 3}), ConfigError);
    const auto one = brute_force_best(p, {.intervals = 1, .levels = 5});
    CHECK(one.evaluated == 5);
    CHECK(one.levels.size() == 1);
}

TEST_CASE("discretization slack")
{
    const auto p = linear_problem(0.42);
    double worst = 0.0;
    for (int k = 0; k <= 4096; ++k) worst = std::max(worst, std::abs(psi(p, 10.0 * k / 4096) - 0.42));
    CHECK(discretization_slack(p, 8) == doctest::Approx(worst * 10.0 / 8).epsilon(1e-6));
    CHECK(discretization_slack(p, 16) == doctest::Approx(discretization_slack(p, 8) / 2).epsilon(1e-14));
    CHECK_THROWS_AS(discretization_slack(p, 0), ConfigError);
}

TEST_CASE("value grows with the trading capacity")
{
    double prev = -1e300;
    for (double nu_bar : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double v = classify_linear(linear_problem(0.42, 50.0, nu_bar)).value;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("parity cost")
{
    SUBCASE("matches the closed-form optimum")
    {
        const auto p = parity_problem(60.0);
        const auto sol = solve_stake_parity(p);
        CHECK(evaluate_parity_cost(p, sol.strategy) == doctest::Approx(sol.value).epsilon(1e-6));
    }
    SUBCASE("already at parity")
    {
        auto p = parity_problem(50.0);
        const auto shifted = [](double d) { return d * d + 1.0; };
        p.penalty->g = PenaltyFunction::custom("d^2+1", shifted);
        p.penalty->q = PenaltyFunction::custom("d^2+1", shifted);
        const double expected = (1.0 - std::exp(-2.0)) / 0.1 + std::exp(-2.0);
        CHECK(evaluate_parity_cost(p, Strategy::constant(0.0, 1.0)) == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("no coarse pattern beats it")
    {
        const auto p = parity_problem(60.0);
        const auto sol = solve_stake_parity(p);
        const auto best = brute_force_best(
            p, {.intervals = 6, .levels = 3, .objective = SearchObjective::MinimizeParityCost, .threads = 4});
        CHECK(best.value >= sol.value * (1.0 - 1e-6));
    }
    CHECK_THROWS_AS(evaluate_parity_cost(linear_problem(0.4), Strategy::constant(0.0, 1.0)), ConfigError);
}
