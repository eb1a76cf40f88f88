// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "stakeopt/dynamics.hpp"
#include "stakeopt/hjb.hpp"
#include "stakeopt/objective.hpp"
#include "stakeopt/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace stakeopt;

namespace {

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

TradingProblem linear_problem(double p0, double x = 50.0)
{
    return TradingProblem{
        .schedule = RewardSchedule::polynomial(1.0, 100.0, 10.0),
        .utility = UtilitySpec::linear(0.01, 1.0),
        .price = PriceModel::constant(p0),
        .beta = 0.1,
        .r = 0.0,
        .nu_bar = 1.0,
        .x = x,
        .penalty = std::nullopt,
    };
}

TradingProblem convex_problem(double p0)
{
    auto p = linear_problem(p0);
    p.utility = UtilitySpec::power(2.0, 1e-3, 1e-3);
    return p;
}

TradingProblem parity_problem()
{
    return TradingProblem{
        .schedule = RewardSchedule::polynomial(1.0, 100.0, 20.0),
        .utility = UtilitySpec::linear(0.0, 0.0),
        .price = PriceModel::constant(0.0),
        .beta = 0.1,
        .r = 0.0,
        .nu_bar = 1.0,
        .x = 60.0,
        .penalty = PenaltySpec::quadratic(1.0, 1.0, 0.1, 2),
    };
}

// Buy-all, sell-all and buy-then-sell prices for linear_problem: Psi(T) = 0.368, Psi(0) = 0.471.
constexpr double kBuyAllPrice = 0.3;
constexpr double kSellAllPrice = 0.6;
constexpr double kSwitchPrice = 0.42;

// ---------------------------------------------------------------------------

void characteristics_vs_ode(Verdict& v)
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        const double alpha = 0.5 + 2.5 * unit(rng);
        const double n0 = 10.0 + 990.0 * unit(rng);
        const double horizon = 1.0 + 19.0 * unit(rng);
        const double nu_bar = 0.1 + 4.9 * unit(rng);
        const double t = 0.5 * horizon * unit(rng);
        const auto sched = RewardSchedule::polynomial(alpha, n0, horizon);
        const double x = sched.supply(t) * unit(rng);
        const double root = std::pow(n0, 1.0 / alpha);
        for (Direction d : {Direction::Buy, Direction::Sell}) {
            const double nu = sign_of(d) * nu_bar;
            auto rhs = [&](double s, double y) { return nu + alpha / (root + s) * y; };
            const double h = 1e-3;
            const int steps = static_cast<int>(std::ceil((horizon - t) / h));
            double s = t;
            double y = x;
            for (int k = 0; k < steps; ++k) {
                const double next = std::min(horizon, t + (k + 1) * h);
                y = oracle::rk4(rhs, s, y, next, 1);
                s = next;
                worst = std::max(worst, std::abs(y - characteristic(sched, t, x, s, d, nu_bar)));
            }
        }
    }
    v.detail << "sup error " << worst << " over 20 draws x 2 directions";
    v.require(worst <= 1e-6, "sup error <= 1e-6");
}

void phase_transition(Verdict& v)
{
    const double horizon = 1e4;
    auto share_at_end = [&](double nu_bar, StateTrajectory* out) {
        const auto sched = RewardSchedule::polynomial(2.0, 100.0, horizon);
        auto traj = simulate(sched, 50.0, Strategy::constant(nu_bar, nu_bar), 0.05);
        const double share = traj.states.back() / sched.supply(traj.times.back());
        if (out) *out = std::move(traj);
        return share;
    };
    StateTrajectory slow;
    const double share = share_at_end(2.0, &slow);
    const auto phase = monopoly_phase(2.0, 100.0, 50.0, 2.0);
    v.detail << "nu_bar=2: share(1e4) = " << share << ", limit " << phase.limit_share.value_or(NAN);
    v.require(std::abs(share - 0.7) <= 1e-3, "share within 1e-3 of 0.7");
    v.require(slow.exit_kind == ExitKind::Horizon, "nu_bar=2 never reaches monopoly");
    v.require(phase.never_monopoly && std::abs(phase.threshold - 5.0) <= 1e-12, "threshold 5");

    StateTrajectory fast;
    share_at_end(6.0, &fast);
    const auto fast_phase = monopoly_phase(2.0, 100.0, 50.0, 6.0);
    v.detail << "; nu_bar=6: monopoly at t = " << fast.exit_time;
    v.require(fast.exit_kind == ExitKind::Monopoly && fast.exit_time < horizon, "nu_bar=6 hits X = N");
    v.require(!fast_phase.never_monopoly, "phase analysis agrees for nu_bar=6");
}

void closed_form_vs_hjb(Verdict& v)
{
    v.detail << "errors at 512 / ratios 512->1024:";
    for (double p0 : {kBuyAllPrice, kSellAllPrice, kSwitchPrice}) {
        const auto p = linear_problem(p0);
        const auto cls = classify_linear(p);
        const auto coarse = solve_hjb(p, HjbVariant::Trading, {.nt = 512, .ny = 512});
        const auto fine = solve_hjb(p, HjbVariant::Trading, {.nt = 1024, .ny = 1024});
        const double e512 = std::abs(value_at(coarse, 0.0, p.x) - cls.value);
        const double e1024 = std::abs(value_at(fine, 0.0, p.x) - cls.value);
        const double ratio = e1024 / e512;
        v.detail << ' ' << to_string(cls.tag) << ' ' << e512 << '/' << ratio;
        v.require(e512 <= 1e-2, std::string(to_string(cls.tag)) + " error <= 1e-2");
        v.require(ratio >= 0.35 && ratio <= 0.65, std::string(to_string(cls.tag)) + " ratio in [0.35, 0.65]");
    }
}

void bang_bang_oracle(Verdict& v)
{
    constexpr int m = 8;
    const BruteForceOptions opts{.intervals = m, .levels = 3, .threads = threads()};
    struct Case {
        const char* name;
        TradingProblem problem;
        StrategyClassification cls;
    };
    std::vector<Case> cases;
    for (double p0 : {kBuyAllPrice, kSellAllPrice, kSwitchPrice}) {
        const auto p = linear_problem(p0);
        cases.push_back({"linear", p, classify_linear(p)});
    }
    const auto cvx = convex_problem(0.3);
    cases.push_back({"convex", cvx, classify_convex(cvx)});

    for (const auto& c : cases) {
        const auto best = brute_force_best(c.problem, opts);
        const double slack = discretization_slack(c.problem, m);
        const std::string label = std::string(c.name) + ' ' + to_string(c.cls.tag);
        v.detail << label << ": best " << best.value << " vs U " << c.cls.value << " (eps " << slack << "); ";
        v.require(best.value <= c.cls.value + slack, label + " value bound");
        const double width = c.problem.horizon() / m;
        for (int k = 0; k < m; ++k) {
            const double lo = k * width;
            const double hi = (k + 1) * width;
            double expected;
            switch (c.cls.tag) {
            case StrategyTag::BuyAll: expected = 1.0; break;
            case StrategyTag::SellAll: expected = -1.0; break;
            case StrategyTag::BuyThenSell: {
                const double t0 = *c.cls.t0();
                if (t0 >= lo && t0 <= hi) continue;  // the switch cell may hold any level
                expected = hi <= t0 ? 1.0 : -1.0;
                break;
            }
            default: expected = NAN;
            }
            v.require(best.levels[k] == expected, label + " level in cell " + std::to_string(k));
        }
    }
    v.require(cases.back().cls.tag == StrategyTag::BuyThenSell, "convex case is BuyThenSell");
}

void decomposition_identity(Verdict& v)
{
    auto p = linear_problem(0.45);
    p.price = PriceModel::gbm(0.45, 0.05, 0.3);
    p.r = 0.02;
    const auto strat = Strategy::piecewise({4.0}, {1.0, -1.0}, 1.0, 10.0);
    const MonteCarloOptions opts{.paths = 100000, .seed = 11, .price_steps = 256, .threads = threads()};
    struct Named {
        const char* name;
        BankPolicy bank;
    };
    const Named banks[] = {
        {"zero", BankPolicy::zero()},
        {"linear", BankPolicy{.b = [](double t) { return 0.5 * t; }, .db = [](double) { return 0.5; }, .jumps = {}}},
        {"step", BankPolicy{.b = [](double t) { return t >= 3.0 ? 2.0 : 0.0; },
                            .db = [](double) { return 0.0; },
                            .jumps = {{3.0, 2.0}}}},
    };
    for (const auto& [name, bank] : banks) {
        const auto r = evaluate_full_monte_carlo(p, strat, bank, opts);
        const double gap = std::abs(*r.mc_mean - (r.j1 + r.j2));
        v.detail << name << ": |MC - (J1+J2)| = " << gap << " vs 3 sigma " << *r.mc_halfwidth << "; ";
        v.require(gap <= *r.mc_halfwidth, std::string(name) + " within 3 sigma");
    }
}

void psi_properties(Verdict& v)
{
    double worst_terminal = 0.0;
    double worst_fd = 0.0;
    bool monotone = true;
    for (double l : {0.0, 0.01, 0.5}) {
        for (double beta : {0.0, 0.1, 0.3}) {
            auto p = linear_problem(kSwitchPrice);
            p.utility = UtilitySpec::linear(l, 1.5);
            p.beta = beta;
            const double horizon = p.horizon();
            worst_terminal = std::max(worst_terminal, std::abs(psi(p, horizon) - 1.5 * std::exp(-beta * horizon)));
            double prev = psi(p, 0.0);
            for (int k = 1; k <= 256; ++k) {
                const double cur = psi(p, horizon * k / 256);
                if (cur > prev + 1e-14 * std::abs(prev)) monotone = false;
                prev = cur;
            }
            for (double t : {0.0, 3.0, 7.5}) {
                for (Direction d : {Direction::Buy, Direction::Sell}) {
                    const double fd =
                        oracle::central_diff([&](double x) { return value_v(p, t, x, d); }, 50.0, 1e-2);
                    worst_fd = std::max(worst_fd, std::abs(fd - psi(p, t)));
                }
            }
        }
    }
    v.detail << "Psi(T) error " << worst_terminal << ", FD error " << worst_fd;
    v.require(monotone, "Psi non-increasing");
    v.require(worst_terminal <= 1e-10, "Psi(T) = h e^{-beta T}");
    v.require(worst_fd <= 1e-6, "d/dx v = Psi");

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int violations = 0;
    for (int draw = 0; draw < 10; ++draw) {
        const double power = 1.0 + 2.0 * unit(rng);
        TradingProblem p{
            .schedule = RewardSchedule::polynomial(0.5 + 1.5 * unit(rng), 100.0, 10.0),
            .utility = UtilitySpec::power(power, 1e-3 * unit(rng), 1e-3 * (0.1 + unit(rng))),
            .price = PriceModel::constant(0.5),
            .beta = 0.2 * unit(rng),
            .r = 0.0,
            .nu_bar = 0.2 + 0.8 * unit(rng),
            .x = 0.0,
            .penalty = std::nullopt,
        };
        p.x = 35.0 + 30.0 * unit(rng);
        for (int k = 0; k < 64; ++k) {
            const double t = p.horizon() * k / 63;
            const double up = psi_two_phase(p, t, parse_pattern("++"));
            const double down = psi_two_phase(p, t, parse_pattern("--"));
            if (up < down) ++violations;
        }
    }
    v.detail << ", convex Psi++ < Psi-- at " << violations << " of 640 points";
    v.require(violations == 0, "Psi++ >= Psi-- for convex utilities");
}

void stake_parity(Verdict& v)
{
    const auto p = parity_problem();
    const auto sol = solve_stake_parity(p);
    const double t_minus = oracle::bisect([](double t) { return std::log((100.0 + t) / 100.0) - 0.1; }, 0.0, 20.0);
    const double cost = evaluate_parity_cost(p, sol.strategy);
    const auto best = brute_force_best(
        p, {.intervals = 6, .levels = 3, .objective = SearchObjective::MinimizeParityCost, .threads = threads()});
    v.detail << "t- = " << sol.t0().value_or(NAN) << " (bisection " << t_minus << "), U = " << sol.value
             << ", simulated cost " << cost << ", best 3^6 " << best.value;
    v.require(sol.tag == StrategyTag::HoldAfter && sol.first_action == Direction::Sell, "sell then hold");
    v.require(sol.t0() && std::abs(*sol.t0() - t_minus) <= 1e-9, "t- within 1e-9");
    v.require(std::abs(cost - sol.value) <= 1e-6 * std::abs(sol.value), "cost within 1e-6");
    v.require(best.value >= sol.value * (1.0 - 1e-6), "no brute-force pattern beats it");
}

void variant_nesting(Verdict& v)
{
    auto max_gap = [](const ValueGrid& a, const ValueGrid& b) {
        double gap = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            gap = std::max(gap, std::abs(a.values[k] - b.values[k]) / std::max(1.0, std::abs(b.values[k])));
        }
        return gap;
    };
    const HjbOptions opts{.nt = 512, .ny = 512};

    auto p = linear_problem(kSwitchPrice);
    p.penalty = PenaltySpec::quadratic(0.0, 0.0, 0.1, 2);
    const double risk_gap =
        max_gap(solve_hjb(p, HjbVariant::RiskControl, opts), solve_hjb(p, HjbVariant::Trading, opts));

    auto zero = linear_problem(0.0);
    const double hoard_gap =
        max_gap(solve_hjb(zero, HjbVariant::Trading, opts), solve_hjb(zero, HjbVariant::Hoarding, opts));

    v.detail << "RiskControl(g=q=0) vs Trading " << risk_gap << ", Trading(P~=0) vs Hoarding " << hoard_gap;
    v.require(risk_gap <= 1e-12, "risk-control nesting");
    v.require(hoard_gap <= 1e-12, "hoarding nesting");
}

void martingale_trichotomy(Verdict& v)
{
    int bad = 0;
    int counts[6] = {};
    for (double mu : {0.1, 0.15}) {
        for (int k = 0; k < 32; ++k) {
            const double p0 = 0.05 + 0.95 * k / 31;
            auto p = linear_problem(p0);
            p.price = PriceModel::gbm(p0, mu, 0.3);
            const auto cls = classify_linear(p);
            ++counts[static_cast<int>(cls.tag)];
            if (cls.tag == StrategyTag::SellThenBuy || cls.tag == StrategyTag::MultiSwitch) ++bad;
        }
    }
    v.detail << "BuyAll " << counts[0] << ", SellAll " << counts[1] << ", BuyThenSell " << counts[2]
             << ", SellThenBuy/MultiSwitch " << bad;
    v.require(bad == 0, "no SellThenBuy or MultiSwitch");
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Verdict&)> run;
    };
    const Criterion criteria[] = {
        {1, "characteristics vs ODE", characteristics_vs_ode},
        {2, "phase transition", phase_transition},
        {3, "closed form vs HJB", closed_form_vs_hjb},
        {4, "bang-bang optimality oracle", bang_bang_oracle},
        {5, "decomposition identity", decomposition_identity},
        {6, "Psi properties", psi_properties},
        {7, "stake parity", stake_parity},
        {8, "variant nesting", variant_nesting},
        {9, "martingale trichotomy", martingale_trichotomy},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Verdict v;
        v.detail.precision(6);
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                    v.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
