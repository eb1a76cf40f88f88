#include "stakeopt/objective.hpp"

#include "stakeopt/errors.hpp"
#include "stakeopt/numerics.hpp"
#include "stakeopt/strategies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace stakeopt {

namespace {

/// Control on each step plus the values at the three Simpson points.
struct StepRates {
    double start;
    double mid;
    double end;
};

StepRates rates_on_step(const Strategy& strat, const StateTrajectory& traj, std::size_t i)
{
    const double t0 = traj.times[i];
    const double t1 = traj.times[i + 1];
    const double tm = 0.5 * (t0 + t1);
    if (strat.is_piecewise()) {
        const double level = strat.rate(tm, traj.states[i]);
        return {level, level, level};
    }
    return {strat.rate(t0, traj.states[i]), strat.rate(tm, traj.mid_states[i]), strat.rate(t1, traj.states[i + 1])};
}

/// Simpson over the trajectory up to the exit node of f(t, X, nu).
template <class F>
double simpson_along(const Strategy& strat, const StateTrajectory& traj, F&& f)
{
    const std::size_t last = traj.exit_index();
    std::vector<double> pieces;
    pieces.reserve(last);
    for (std::size_t i = 0; i < last; ++i) {
        const double t0 = traj.times[i];
        const double t1 = traj.times[i + 1];
        const auto nu = rates_on_step(strat, traj, i);
        const double f0 = f(t0, traj.states[i], nu.start);
        const double fm = f(0.5 * (t0 + t1), traj.mid_states[i], nu.mid);
        const double f1 = f(t1, traj.states[i + 1], nu.end);
        pieces.push_back((t1 - t0) / 6.0 * (f0 + 4.0 * fm + f1));
    }
    return numerics::pairwise_sum(pieces);
}

double pick_step(const TradingProblem& p, double step) { return step > 0.0 ? step : default_step(p.schedule); }

/// Runs body(k) for k in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(count, 256))));
    if (threads == 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t k = next++; k < count && !failed; k = next++) body(k);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

ObjectiveReport evaluate_j2_report(const TradingProblem& p, const Strategy& strat, double step)
{
    const auto traj = simulate(p, strat, pick_step(p, step));
    const double running = simpson_along(strat, traj, [&](double t, double x, double nu) {
        return std::exp(-p.beta * t) * p.utility.running.value(std::max(x, 0.0)) - p.discounted_price(t) * nu;
    });
    const double x_exit = traj.states[traj.exit_index()];
    ObjectiveReport out;
    out.j2 = running + std::exp(-p.beta * traj.exit_time) * p.utility.terminal.value(std::max(x_exit, 0.0));
    out.exit_time = traj.exit_time;
    out.exit_kind = traj.exit_kind;
    return out;
}

double evaluate_j2(const TradingProblem& p, const Strategy& strat, double step)
{
    return evaluate_j2_report(p, strat, step).j2;
}

void BankPolicy::validate(double horizon, int points) const
{
    if (std::abs(b(0.0)) > 0.0) throw ConfigError("bank policy must start at b(0) = 0");
    for (int k = 0; k <= points; ++k) {
        const double t = horizon * k / points;
        if (b(t) < 0.0) throw ConfigError("bank policy is negative at t = " + std::to_string(t));
    }
    for (const auto& [t, jump] : jumps) {
        if (t <= 0.0 || t > horizon) throw ConfigError("bank jump times must lie in (0, T]");
        (void)jump;
    }
}

ObjectiveReport evaluate_full_monte_carlo(const TradingProblem& p, const Strategy& strat, const BankPolicy& bank,
                                          const MonteCarloOptions& opts)
{
    if (!p.price.is_gbm()) throw ConfigError("Monte Carlo evaluation requires a GBM price model");
    if (opts.paths < 2) throw ConfigError("Monte Carlo needs at least two paths");
    bank.validate(p.horizon());

    ObjectiveReport out = evaluate_j2_report(p, strat);
    const double exit = out.exit_time;
    const double beta = p.beta;

    // Quadrature route for J1.
    std::vector<double> kinks;
    for (const auto& jump : bank.jumps) kinks.push_back(jump.first);
    if (exit > 0.0) {
        out.j1 = (p.r - beta) *
                 numerics::integrate_piecewise([&](double t) { return std::exp(-beta * t) * bank.b(t); }, 0.0, exit,
                                               kinks);
    }

    // Pathwise cash-flow route: the bank part and the utility part are deterministic.
    double bank_part = std::exp(-beta * exit) * bank.b(exit);
    if (exit > 0.0) {
        bank_part += numerics::integrate_piecewise(
            [&](double t) { return std::exp(-beta * t) * (p.r * bank.b(t) - bank.db(t)); }, 0.0, exit, kinks);
    }
    for (const auto& [t, jump] : bank.jumps) {
        if (t <= exit) bank_part -= std::exp(-beta * t) * jump;
    }

    const auto fine = simulate(p, strat, default_step(p.schedule));
    const double utility_part =
        simpson_along(strat, fine,
                      [&](double t, double x, double) {
                          return std::exp(-beta * t) * p.utility.running.value(std::max(x, 0.0));
                      }) +
        std::exp(-beta * exit) * p.utility.terminal.value(std::max(fine.states[fine.exit_index()], 0.0));

    // Price grid: trajectory on the coarse step, truncated at the exit.
    const double coarse = p.horizon() / static_cast<double>(std::max<std::size_t>(opts.price_steps, 1));
    const auto traj = simulate(p, strat, coarse);
    const std::size_t last = traj.exit_index();
    std::vector<double> grid(traj.times.begin(), traj.times.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    std::vector<double> nu_start(last), nu_end(last), weight0(last), weight1(last);
    for (std::size_t i = 0; i < last; ++i) {
        const auto nu = rates_on_step(strat, traj, i);
        nu_start[i] = nu.start;
        nu_end[i] = nu.end;
        const double h = grid[i + 1] - grid[i];
        weight0[i] = 0.5 * h * std::exp(-beta * grid[i]);
        weight1[i] = 0.5 * h * std::exp(-beta * grid[i + 1]);
    }

    std::vector<double> samples(opts.paths);
    parallel_for(opts.paths, opts.threads, [&](std::size_t k) {
        double spend = 0.0;
        if (last > 0) {
            const auto prices = sample_price_path(p.price, opts.seed, grid, k);
            for (std::size_t i = 0; i < last; ++i) {
                spend += weight0[i] * prices[i] * nu_start[i] + weight1[i] * prices[i + 1] * nu_end[i];
            }
        }
        samples[k] = bank_part + utility_part - spend;
    });

    const double n = static_cast<double>(opts.paths);
    const double mean = numerics::pairwise_sum(samples) / n;
    std::vector<double> sq(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) sq[k] = (samples[k] - mean) * (samples[k] - mean);
    const double var = numerics::pairwise_sum(sq) / (n - 1.0);
    out.mc_mean = mean;
    out.mc_halfwidth = 3.0 * std::sqrt(var / n);
    return out;
}

double evaluate_parity_cost(const TradingProblem& p, const Strategy& strat, double step)
{
    if (!p.penalty) throw ConfigError("parity cost requires a penalty");
    const auto& pen = *p.penalty;
    const auto& sched = p.schedule;
    const auto traj = simulate(p, strat, pick_step(p, step));
    const double running = simpson_along(strat, traj, [&](double t, double x, double) {
        return std::exp(-pen.delta * t) * pen.g.value(x - sched.supply(t) / pen.participants);
    });
    const double t_exit = traj.exit_time;
    const double x_exit = traj.states[traj.exit_index()];
    return running + std::exp(-pen.delta * t_exit) * pen.q.value(x_exit - sched.supply(t_exit) / pen.participants);
}

BruteForceResult brute_force_best(const TradingProblem& p, const BruteForceOptions& opts)
{
    if (opts.intervals < 1 || opts.intervals > 10) throw ConfigError("brute force needs 1 to 10 intervals");
    if (opts.levels != 3 && opts.levels != 5 && opts.levels != 9) {
        throw ConfigError("brute force levels must be 3, 5 or 9");
    }
    const auto m = static_cast<std::size_t>(opts.intervals);
    const auto base = static_cast<std::size_t>(opts.levels);
    std::size_t count = 1;
    for (std::size_t k = 0; k < m; ++k) {
        count *= base;
        if (count > opts.max_candidates) {
            throw ConfigError("brute force search of " + std::to_string(base) + "^" + std::to_string(m) +
                              " candidates exceeds the cap of " + std::to_string(opts.max_candidates));
        }
    }

    const double horizon = p.horizon();
    std::vector<double> grid_levels(base);
    for (std::size_t k = 0; k < base; ++k) {
        grid_levels[k] = p.nu_bar * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(base - 1));
    }
    std::vector<double> switches;
    for (std::size_t k = 1; k < m; ++k) switches.push_back(horizon * static_cast<double>(k) / static_cast<double>(m));
    const double step = opts.step > 0.0 ? opts.step : horizon / 1024.0;

    auto decode = [&](std::size_t code) {
        std::vector<double> lv(m);
        // Most significant digit is the first interval.
        for (std::size_t k = m; k-- > 0;) {
            lv[k] = grid_levels[code % base];
            code /= base;
        }
        return lv;
    };
    auto build = [&](const std::vector<double>& lv) {
        return m == 1 ? Strategy::constant(lv[0], p.nu_bar) : Strategy::piecewise(switches, lv, p.nu_bar, horizon);
    };

    const bool maximize = opts.objective == SearchObjective::MaximizeJ2;
    std::vector<double> scores(count);
    parallel_for(count, opts.threads, [&](std::size_t code) {
        const auto strat = build(decode(code));
        scores[code] = maximize ? evaluate_j2(p, strat, step) : evaluate_parity_cost(p, strat, step);
    });

    std::size_t best = 0;
    for (std::size_t code = 1; code < count; ++code) {
        if (maximize ? scores[code] > scores[best] : scores[code] < scores[best]) best = code;
    }
    auto lv = decode(best);
    auto strat = build(lv);
    return BruteForceResult{.levels = std::move(lv), .strategy = std::move(strat), .value = scores[best],
                            .evaluated = count};
}

double discretization_slack(const TradingProblem& p, int intervals)
{
    if (intervals < 1) throw ConfigError("discretization_slack: intervals must be positive");
    const double horizon = p.horizon();
    constexpr int kPoints = 512;
    double worst = 0.0;
    for (int k = 0; k <= kPoints; ++k) {
        const double t = horizon * k / kPoints;
        const double price = p.discounted_price(t);
        if (p.utility.is_linear()) {
            worst = std::max(worst, std::abs(psi(p, t) - price));
        } else {
            for (const auto pattern : {parse_pattern("-+"), parse_pattern("++")}) {
                worst = std::max(worst, std::abs(psi_two_phase(p, t, pattern) - price));
            }
        }
    }
    return p.nu_bar * worst * horizon / intervals;
}

}  // namespace stakeopt
