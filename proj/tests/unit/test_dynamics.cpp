#include "oracles.hpp"

#include "stakeopt/dynamics.hpp"
#include "stakeopt/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace stakeopt;

namespace {

const auto kLinear = RewardSchedule::polynomial(1.0, 100.0, 10.0);

/// RK4 oracle for X' = nu + X N'/N with a given rate function of time.
double ode_oracle(double alpha, double n0, double x0, double t0, double t1, const std::function<double(double)>& nu,
                  int steps)
{
    auto rhs = [&](double t, double x) {
        const double root = std::pow(n0, 1.0 / alpha);
        return nu(t) + alpha / (root + t) * x;
    };
    return oracle::rk4(rhs, t0, x0, t1, steps);
}

}  // namespace

TEST_CASE("characteristic values")
{
    const double buy = characteristic(kLinear, 0.0, 50.0, 10.0, Direction::Buy, 1.0);
    CHECK(buy == doctest::Approx(110.0 * std::log(1.1) + 55.0).epsilon(1e-14));
    const double ode = ode_oracle(1.0, 100.0, 50.0, 0.0, 10.0, [](double) { return 1.0; }, 10000);
    CHECK(std::abs(buy - ode) <= 1e-6);
    CHECK(buy == doctest::Approx(65.4841).epsilon(1e-6));

    CHECK(characteristic(kLinear, 3.0, 42.0, 3.0, Direction::Sell, 2.0) == doctest::Approx(42.0).epsilon(1e-15));
    CHECK(characteristic(kLinear, 0.0, 50.0, 10.0, Direction::Buy, 0.0) == doctest::Approx(55.0).epsilon(1e-15));
    CHECK_THROWS_AS(characteristic(kLinear, 5.0, 50.0, 4.0, Direction::Buy, 1.0), DomainError);
}

TEST_CASE("pattern labels read after-then-before")
{
    const auto p = parse_pattern("-+");
    CHECK(p.before == Direction::Buy);
    CHECK(p.after == Direction::Sell);
    CHECK(pattern_label(p) == "-+");
    CHECK(pattern_label(parse_pattern("+-")) == "+-");
    CHECK_THROWS_AS(parse_pattern("+"), ConfigError);
    CHECK_THROWS_AS(parse_pattern("x+"), ConfigError);
}

TEST_CASE("two-phase characteristic")
{
    const double v = two_phase_characteristic(kLinear, 50.0, 5.0, 10.0, parse_pattern("-+"), 1.0);
    const double expected = (-std::log(110.0 / 105.0) + std::log(105.0 / 100.0) + 0.5) * 110.0;
    CHECK(v == doctest::Approx(expected).epsilon(1e-13));
    CHECK(v == doctest::Approx(55.2497).epsilon(1e-5));
    const double mid = ode_oracle(1.0, 100.0, 50.0, 0.0, 5.0, [](double) { return 1.0; }, 10000);
    const double ode = ode_oracle(1.0, 100.0, mid, 5.0, 10.0, [](double) { return -1.0; }, 10000);
    CHECK(std::abs(v - ode) <= 1e-6);

    CHECK(two_phase_characteristic(kLinear, 50.0, 0.0, 7.0, parse_pattern("++"), 1.0) ==
          doctest::Approx(characteristic(kLinear, 0.0, 50.0, 7.0, Direction::Buy, 1.0)).epsilon(1e-14));
    CHECK(two_phase_characteristic(kLinear, 50.0, 5.0, 5.0, parse_pattern("+-"), 1.0) ==
          doctest::Approx(characteristic(kLinear, 0.0, 50.0, 5.0, Direction::Sell, 1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(two_phase_characteristic(kLinear, 50.0, 6.0, 5.0, parse_pattern("++"), 1.0), DomainError);
}

TEST_CASE("characteristic invariants: flow property and x-derivative")
{
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto s = RewardSchedule::polynomial(alpha, 100.0, 10.0);
        const double mid = characteristic(s, 0.0, 40.0, 3.0, Direction::Buy, 1.5);
        const double direct = characteristic(s, 0.0, 40.0, 8.0, Direction::Buy, 1.5);
        const double composed = characteristic(s, 3.0, mid, 8.0, Direction::Buy, 1.5);
        CHECK(std::abs(direct - composed) <= 1e-10);

        const double dx = oracle::central_diff(
            [&](double x) { return characteristic(s, 2.0, x, 9.0, Direction::Sell, 1.5); }, 30.0, 1e-3);
        CHECK(dx == doctest::Approx(s.supply(9.0) / s.supply(2.0)).epsilon(1e-9));
    }
}

TEST_CASE("simulate matches the closed form under constant full-capacity trading")
{
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto s = RewardSchedule::polynomial(alpha, 100.0, 10.0);
        for (Direction d : {Direction::Buy, Direction::Sell}) {
            const auto traj = simulate(s, 50.0, Strategy::constant(sign_of(d) * 1.0, 1.0), 1e-3);
            CHECK(traj.exit_kind == ExitKind::Horizon);
            double err = 0.0;
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                err = std::max(err, std::abs(traj.states[i] - characteristic(s, 0.0, 50.0, traj.times[i], d, 1.0)));
            }
            CHECK(err <= 1e-6);
        }
    }
}

TEST_CASE("share is non-decreasing while buying")
{
    const auto s = RewardSchedule::polynomial(2.0, 100.0, 10.0);
    const auto traj = simulate(s, 20.0, Strategy::constant(1.0, 1.0), 0.01);
    double prev = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double share = traj.states[i] / s.supply(traj.times[i]);
        CHECK(share >= prev - 1e-15);
        prev = share;
    }
}

TEST_CASE("exits: ruin at zero and monopoly")
{
    const auto ruin = simulate(kLinear, 0.0, Strategy::constant(0.0, 1.0), 0.01);
    CHECK(ruin.exit_kind == ExitKind::Ruin);
    CHECK(ruin.exit_time == 0.0);
    for (double x : ruin.states) CHECK(x == 0.0);

    const auto mono = simulate(kLinear, 99.9, Strategy::constant(1.0, 1.0), 1e-3);
    CHECK(mono.exit_kind == ExitKind::Monopoly);
    const double t0 = oracle::bisect([](double t) { return std::log((100.0 + t) / 100.0) - 0.001; }, 0.0, 10.0);
    CHECK(t0 == doctest::Approx(0.10005).epsilon(1e-4));
    CHECK(std::abs(mono.exit_time - t0) <= 1e-8);
    // frozen after the exit
    const double frozen = mono.states[mono.exit_index()];
    CHECK(frozen == doctest::Approx(100.0 + t0).epsilon(1e-9));
    CHECK(mono.states.back() == frozen);
    CHECK(mono.state_at(5.0) == frozen);

    const auto sold = simulate(kLinear, 2.0, Strategy::constant(-1.0, 1.0), 1e-3);
    CHECK(sold.exit_kind == ExitKind::Ruin);
    const double tr = oracle::bisect([](double t) { return 0.02 - std::log((100.0 + t) / 100.0); }, 0.0, 10.0);
    CHECK(std::abs(sold.exit_time - tr) <= 1e-8);
}

TEST_CASE("monopoly time")
{
    CHECK_FALSE(monopoly_time(kLinear, 50.0, 1.0).has_value());
    CHECK(*monopoly_time(kLinear, 100.0, 1.0) == 0.0);
    const double t0 = oracle::bisect([](double t) { return std::log((100.0 + t) / 100.0) - 0.001; }, 0.0, 10.0);
    CHECK(std::abs(*monopoly_time(kLinear, 99.9, 1.0) - t0) <= 1e-9);
    // equality at the horizon
    const double x_edge = 100.0 * (1.0 - std::log(1.1));
    const auto edge = monopoly_time(kLinear, x_edge, 1.0);
    REQUIRE(edge.has_value());
    CHECK(*edge == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("piecewise strategies: validation, left continuity, forced nodes")
{
    const auto s = Strategy::piecewise({2.0, 6.0}, {1.0, -1.0, 0.5}, 1.0, 10.0);
    CHECK(s.rate(1.0, 0.0) == 1.0);
    CHECK(s.rate(2.0, 0.0) == 1.0);
    CHECK(s.rate(2.0 + 1e-12, 0.0) == -1.0);
    CHECK(s.rate(9.0, 0.0) == 0.5);
    CHECK(s.forced_nodes() == std::vector<double>{2.0, 6.0});

    CHECK_THROWS_AS(Strategy::piecewise({2.0}, {1.0}, 1.0, 10.0), DomainError);
    CHECK_THROWS_AS(Strategy::piecewise({0.0}, {1.0, -1.0}, 1.0, 10.0), DomainError);
    CHECK_THROWS_AS(Strategy::piecewise({3.0, 2.0}, {1.0, -1.0, 1.0}, 1.0, 10.0), DomainError);
    CHECK_THROWS_AS(Strategy::constant(1.5, 1.0), DomainError);

    const auto wild = Strategy::feedback([](double, double) { return 3.0; }, 1.0);
    CHECK_THROWS_AS(wild.rate(0.0, 1.0), DomainError);

    // switch times land on the simulation grid
    const auto traj = simulate(kLinear, 50.0, s, 0.7);
    CHECK(std::find(traj.times.begin(), traj.times.end(), 2.0) != traj.times.end());
    CHECK(std::find(traj.times.begin(), traj.times.end(), 6.0) != traj.times.end());
    double expected = ode_oracle(1.0, 100.0, 50.0, 0.0, 2.0, [](double) { return 1.0; }, 20000);
    expected = ode_oracle(1.0, 100.0, expected, 2.0, 6.0, [](double) { return -1.0; }, 40000);
    expected = ode_oracle(1.0, 100.0, expected, 6.0, 10.0, [](double) { return 0.5; }, 40000);
    CHECK(traj.states.back() == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("feedback strategies and trajectory export")
{
    // hold the share at one half: nu = 0 keeps it, so any rule returning 0 there is a fixed point
    const auto fb = Strategy::feedback([](double, double x) { return x < 55.0 ? 1.0 : 0.0; }, 1.0);
    const auto traj = simulate(kLinear, 50.0, fb, 1e-3);
    CHECK(traj.exit_kind == ExitKind::Horizon);
    CHECK(traj.states.back() >= 55.0);

    const auto path = std::filesystem::temp_directory_path() / "stakeopt_traj.csv";
    write_trajectory_csv(traj, kLinear, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,X,N,share");
    CHECK_THROWS_AS(simulate(kLinear, 50.0, fb, 0.0), DomainError);
}
