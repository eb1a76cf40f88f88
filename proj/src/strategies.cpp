#include "stakeopt/strategies.hpp"

#include "stakeopt/errors.hpp"
#include "stakeopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stakeopt {

namespace {

constexpr double kShareTol = 1e-12;

Direction flip(Direction d) { return d == Direction::Buy ? Direction::Sell : Direction::Buy; }

void require_capacity(const TradingProblem& p)
{
    if (!capacity_condition_holds(p)) {
        throw EarlyExitPossible("nu_bar int_0^T dt/N exceeds min(x/N, (N-x)/N): a bang-bang path may exit early");
    }
}

void require_linear(const TradingProblem& p)
{
    if (!p.utility.is_linear()) throw ConfigError("this classifier requires linear running and terminal utilities");
}

/// Builds the result for a bang-bang strategy; switch times at or beyond the ends are dropped
/// (a root at 0 flips the first action).
StrategyClassification make_bang_bang(const TradingProblem& p, std::vector<double> roots, Direction first)
{
    const double horizon = p.horizon();
    const double edge = 1e-12 * horizon;
    std::vector<double> switches;
    for (double r : roots) {
        if (r <= edge && switches.empty()) {
            first = flip(first);
            continue;
        }
        if (r >= horizon - edge) break;
        if (!switches.empty() && r <= switches.back()) continue;
        switches.push_back(r);
    }
    // An even number of flips at the same point cancels; keep the list clean.
    std::vector<double> levels;
    Direction d = first;
    for (std::size_t i = 0; i <= switches.size(); ++i) {
        levels.push_back(sign_of(d) * p.nu_bar);
        d = flip(d);
    }

    StrategyTag tag = StrategyTag::MultiSwitch;
    if (switches.empty()) {
        tag = first == Direction::Buy ? StrategyTag::BuyAll : StrategyTag::SellAll;
    } else if (switches.size() == 1) {
        tag = first == Direction::Buy ? StrategyTag::BuyThenSell : StrategyTag::SellThenBuy;
    }
    StrategyClassification out{
        .tag = tag,
        .switch_times = switches,
        .first_action = first,
        .value = bang_bang_value(p, switches, first),
        .strategy = Strategy::piecewise(switches, levels, p.nu_bar, horizon),
        .exit_time = horizon,
        .conditions = {},
    };
    return out;
}

/// Sign changes of f on a uniform scan of [0, T], refined by bisection. Zero samples
/// continue the previous sign, so tangential touches are not reported.
std::vector<double> scan_roots(const std::function<double(double)>& f, double horizon, const ScanOptions& scan)
{
    const int cells = std::max(scan.cells, 1);
    std::vector<double> roots;
    double prev_t = 0.0;
    double prev_v = f(0.0);
    int prev_sign = prev_v > 0 ? 1 : (prev_v < 0 ? -1 : 0);
    for (int k = 1; k <= cells; ++k) {
        const double t = horizon * k / cells;
        const double v = f(t);
        int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0) s = prev_sign;
        if (prev_sign != 0 && s != 0 && s != prev_sign) {
            roots.push_back(numerics::bisect(f, prev_t, t, scan.root_tol));
        }
        if (s != 0) prev_sign = s;
        prev_t = t;
        prev_v = v;
    }
    return roots;
}

/// Single crossing of a monotone difference; falls back to the scan when the
/// endpoints do not bracket a root.
std::vector<double> single_root(const std::function<double(double)>& f, double horizon, const ScanOptions& scan)
{
    const double a = f(0.0);
    const double b = f(horizon);
    if ((a >= 0.0 && b <= 0.0) || (a <= 0.0 && b >= 0.0)) {
        return {numerics::bisect(f, 0.0, horizon, scan.root_tol)};
    }
    return scan_roots(f, horizon, scan);
}

double discounted_running(const TradingProblem& p, double s, double x)
{
    return std::exp(-p.beta * s) * p.utility.running.value(x);
}

}  // namespace

const char* to_string(StrategyTag tag)
{
    switch (tag) {
    case StrategyTag::BuyAll: return "BuyAll";
    case StrategyTag::SellAll: return "SellAll";
    case StrategyTag::BuyThenSell: return "BuyThenSell";
    case StrategyTag::SellThenBuy: return "SellThenBuy";
    case StrategyTag::MultiSwitch: return "MultiSwitch";
    case StrategyTag::HoldAfter: return "HoldAfter";
    }
    return "unknown";
}

bool capacity_condition_holds(const TradingProblem& p)
{
    const double n0 = p.initial_supply();
    const double reach = p.nu_bar * p.schedule.inverse_integral(0.0, p.horizon());
    const double room = std::min(p.x / n0, (n0 - p.x) / n0);
    return reach <= room * (1 + 1e-12);
}

// ---------------------------------------------------------------------------

StrategyClassification solve_hoarding(const TradingProblem& p)
{
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    const double n0 = p.initial_supply();
    auto gamma = [&](double t) { return characteristic(sched, 0.0, p.x, t, Direction::Buy, p.nu_bar); };
    const auto bps = sched.breakpoints();

    if (p.x >= n0) {
        return StrategyClassification{
            .tag = StrategyTag::HoldAfter,
            .switch_times = {0.0},
            .first_action = Direction::Buy,
            .value = p.utility.terminal.value(n0),
            .strategy = Strategy::constant(0.0, p.nu_bar),
            .exit_time = 0.0,
            .conditions = {},
        };
    }

    const double reach = p.nu_bar * sched.inverse_integral(0.0, horizon);
    const double room = (n0 - p.x) / n0;
    if (reach <= room) {
        const double running = numerics::integrate_piecewise(
            [&](double t) { return discounted_running(p, t, std::min(gamma(t), sched.supply(t))); }, 0.0, horizon,
            bps);
        StrategyClassification out{
            .tag = StrategyTag::BuyAll,
            .switch_times = {},
            .first_action = Direction::Buy,
            .value = std::exp(-p.beta * horizon) * p.utility.terminal.value(std::min(gamma(horizon), sched.supply(horizon))) + running,
            .strategy = Strategy::constant(p.nu_bar, p.nu_bar),
            .exit_time = horizon,
            .conditions = {},
        };
        out.conditions.push_back({"horizon_before_monopoly", true, reach - room});
        return out;
    }

    const auto check = validate_hoarding_condition(p.utility, sched, p.beta);
    if (!check.holds) {
        throw ConditionUnverified("monopoly exit occurs but (h o N)' + l(N) <= beta h(N) fails", *check.fails_at);
    }
    const double t0 = *monopoly_time(sched, p.x, p.nu_bar);
    const double running = numerics::integrate_piecewise(
        [&](double t) { return discounted_running(p, t, std::min(gamma(t), sched.supply(t))); }, 0.0, t0, bps);
    StrategyClassification out{
        .tag = StrategyTag::HoldAfter,
        .switch_times = {t0},
        .first_action = Direction::Buy,
        .value = std::exp(-p.beta * t0) * p.utility.terminal.value(sched.supply(t0)) + running,
        .strategy = t0 < horizon ? Strategy::piecewise({t0}, {p.nu_bar, 0.0}, p.nu_bar, horizon)
                                 : Strategy::constant(p.nu_bar, p.nu_bar),
        .exit_time = t0,
        .conditions = {},
    };
    out.conditions.push_back({"hoarding_condition", true, check.worst_margin});
    return out;
}

MonopolyPhase monopoly_phase(double alpha, double n0, double x, double nu_bar)
{
    if (!(alpha > 0.0)) throw DomainError("monopoly_phase: alpha must be positive");
    MonopolyPhase out;
    if (alpha <= 1.0) return out;
    out.threshold = (alpha - 1.0) * (n0 - x) * std::pow(n0, -1.0 / alpha);
    if (nu_bar <= out.threshold) {
        out.never_monopoly = true;
        out.limit_share = nu_bar / (alpha - 1.0) * std::pow(n0, (1.0 - alpha) / alpha) + x / n0;
    }
    return out;
}

// ---------------------------------------------------------------------------

double discounted_supply_integral(const TradingProblem& p, double t)
{
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    const double beta = p.beta;
    if (sched.kind() == RewardSchedule::Kind::Polynomial && sched.alpha() == 1.0) {
        const double c = sched.initial_supply();
        if (beta == 0.0) {
            return (c + horizon) * (c + horizon) / 2 - (c + t) * (c + t) / 2;
        }
        auto antiderivative = [&](double s) { return -std::exp(-beta * s) * ((c + s) / beta + 1.0 / (beta * beta)); };
        return antiderivative(horizon) - antiderivative(t);
    }
    return numerics::integrate_piecewise([&](double s) { return std::exp(-beta * s) * sched.supply(s); }, t, horizon,
                                         sched.breakpoints());
}

double psi(const TradingProblem& p, double t)
{
    require_linear(p);
    const double horizon = p.horizon();
    const double h = p.utility.terminal.linear_coefficient();
    const double l = p.utility.running.linear_coefficient();
    const double terminal = h * std::exp(-p.beta * horizon) * p.schedule.supply(horizon);
    if (t >= horizon) return terminal / p.schedule.supply(horizon);
    return (terminal + l * discounted_supply_integral(p, t)) / p.schedule.supply(t);
}

namespace {

void require_in_band(const TradingProblem& p, double s, double x)
{
    const double n = p.schedule.supply(s);
    if (x < -kShareTol * n || x > n * (1 + kShareTol)) {
        throw EarlyExitPossible("full-capacity path leaves [0, N(s)] at s = " + std::to_string(s));
    }
}

double clamp_band(const TradingProblem& p, double s, double x) { return std::clamp(x, 0.0, p.schedule.supply(s)); }

}  // namespace

double psi_branch(const TradingProblem& p, double t, double x, Direction dir)
{
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    auto gamma = [&](double s) { return clamp_band(p, s, characteristic(sched, t, x, s, dir, p.nu_bar)); };
    require_in_band(p, horizon, characteristic(sched, t, x, horizon, dir, p.nu_bar));
    const double terminal =
        std::exp(-p.beta * horizon) * sched.supply(horizon) * p.utility.terminal.derivative(gamma(horizon));
    double running = 0.0;
    if (t < horizon) {
        running = numerics::integrate_piecewise(
            [&](double s) { return std::exp(-p.beta * s) * sched.supply(s) * p.utility.running.derivative(gamma(s)); },
            t, horizon, sched.breakpoints(), 1e-11);
    }
    return (terminal + running) / sched.supply(t);
}

double psi_two_phase(const TradingProblem& p, double t, TwoPhase pattern)
{
    const double x_t = characteristic(p.schedule, 0.0, p.x, t, pattern.before, p.nu_bar);
    require_in_band(p, t, x_t);
    return psi_branch(p, t, clamp_band(p, t, x_t), pattern.after);
}

double value_v(const TradingProblem& p, double t, double x, Direction dir)
{
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    if (t < 0.0 || t > horizon) throw DomainError("value_v: t outside [0, T]");
    const double x_end = characteristic(sched, t, x, horizon, dir, p.nu_bar);
    require_in_band(p, horizon, x_end);
    const double d = sign_of(dir);
    double running = 0.0;
    if (t < horizon) {
        running = numerics::integrate_piecewise(
            [&](double s) {
                const double xs = clamp_band(p, s, characteristic(sched, t, x, s, dir, p.nu_bar));
                return discounted_running(p, s, xs) - d * p.nu_bar * p.discounted_price(s);
            },
            t, horizon, sched.breakpoints());
    }
    return std::exp(-p.beta * horizon) * p.utility.terminal.value(clamp_band(p, horizon, x_end)) + running;
}

double bang_bang_value(const TradingProblem& p, const std::vector<double>& switch_times, Direction first)
{
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    double total = 0.0;
    double a = 0.0;
    double xa = p.x;
    Direction d = first;
    for (std::size_t k = 0; k <= switch_times.size(); ++k) {
        const double b = k < switch_times.size() ? switch_times[k] : horizon;
        const double xb = characteristic(sched, a, xa, b, d, p.nu_bar);
        require_in_band(p, b, xb);
        const double sign = sign_of(d);
        if (b > a) {
            total += numerics::integrate_piecewise(
                [&](double s) {
                    const double xs = clamp_band(p, s, characteristic(sched, a, xa, s, d, p.nu_bar));
                    return discounted_running(p, s, xs) - sign * p.nu_bar * p.discounted_price(s);
                },
                a, b, sched.breakpoints());
        }
        a = b;
        xa = clamp_band(p, b, xb);
        d = flip(d);
    }
    return total + std::exp(-p.beta * horizon) * p.utility.terminal.value(xa);
}

// ---------------------------------------------------------------------------

StrategyClassification classify_linear(const TradingProblem& p, const ScanOptions& scan)
{
    require_linear(p);
    require_capacity(p);
    const double horizon = p.horizon();
    const auto shape = p.price.shape(p.beta, horizon);
    const double psi0 = psi(p, 0.0);
    const double psi_end = psi(p, horizon);
    const double p0 = p.discounted_price(0.0);
    const double p_end = p.discounted_price(horizon);
    auto gap = [&](double t) { return psi(p, t) - p.discounted_price(t); };

    std::vector<Condition> conds{
        {"capacity_condition", true, p.nu_bar * p.schedule.inverse_integral(0.0, horizon)},
        {"psi_0", true, psi0},
        {"psi_T", true, psi_end},
    };

    StrategyClassification out = [&] {
        switch (shape) {
        case PriceModel::Shape::Constant:
            if (p0 <= psi_end) return make_bang_bang(p, {}, Direction::Buy);
            if (p0 >= psi0) return make_bang_bang(p, {}, Direction::Sell);
            return make_bang_bang(p, single_root(gap, horizon, scan), Direction::Buy);
        case PriceModel::Shape::Increasing:
            if (p_end <= psi_end) return make_bang_bang(p, {}, Direction::Buy);
            if (p0 >= psi0) return make_bang_bang(p, {}, Direction::Sell);
            return make_bang_bang(p, single_root(gap, horizon, scan), Direction::Buy);
        case PriceModel::Shape::Decreasing:
        case PriceModel::Shape::NonMonotone:
            break;
        }
        const Direction first = p0 >= psi0 ? Direction::Sell : Direction::Buy;
        return make_bang_bang(p, scan_roots(gap, horizon, scan), first);
    }();
    conds.push_back({std::string("price_shape_") + to_string(shape), true, 0.0});
    out.conditions = std::move(conds);
    return out;
}

GbmBounds gbm_monotonicity_bounds(const TradingProblem& p, std::optional<double> eps)
{
    require_linear(p);
    if (p.schedule.kind() != RewardSchedule::Kind::Polynomial) {
        throw ConfigError("GBM classification requires a polynomial schedule");
    }
    const auto& g = p.price.as_gbm();
    if (!(p.beta > g.mu)) throw ConfigError("GBM classification requires beta > mu");
    const double alpha = p.schedule.alpha();
    const double n0 = p.initial_supply();
    const double root = std::pow(n0, 1.0 / alpha);
    const double horizon = p.horizon();
    const double h = p.utility.terminal.linear_coefficient();
    const double l = p.utility.running.linear_coefficient();
    const double spread = p.beta - g.mu;
    const double slack = eps.value_or(1e-6 * root) / root;

    GbmBounds b;
    b.increasing_above = (alpha * h * std::exp(-g.mu * horizon) * std::pow(root + horizon, alpha) /
                              std::pow(n0, 1.0 + 1.0 / alpha) +
                          alpha * l / (p.beta * root) + l) /
                             spread +
                         slack;
    b.decreasing_below =
        (alpha * h * std::exp(-p.beta * horizon) / (root + horizon) + l * std::exp(-g.mu * horizon)) / spread - slack;
    return b;
}

StrategyClassification classify_gbm_polynomial(const TradingProblem& p, std::optional<double> eps,
                                               const ScanOptions& scan)
{
    require_capacity(p);
    const auto bounds = gbm_monotonicity_bounds(p, eps);
    const auto& g = p.price.as_gbm();
    const double horizon = p.horizon();
    const double p0 = g.p0;
    const double psi0 = psi(p, 0.0);
    const double lifted_end = std::exp((p.beta - g.mu) * horizon) * psi(p, horizon);
    auto gap = [&](double t) { return psi(p, t) - p.discounted_price(t); };

    const bool increasing = p0 > bounds.increasing_above;
    const bool decreasing = p0 < bounds.decreasing_below;

    // Does the dense grid agree with the asymptotic monotonicity claim?
    constexpr int kCheck = 512;
    bool grid_up = true;
    bool grid_down = true;
    double prev = gap(0.0);
    for (int k = 1; k <= kCheck; ++k) {
        const double cur = gap(horizon * k / kCheck);
        if (cur < prev) grid_up = false;
        if (cur > prev) grid_down = false;
        prev = cur;
    }

    std::vector<Condition> conds{
        {"increasing_bound", increasing, bounds.increasing_above},
        {"decreasing_bound", decreasing, bounds.decreasing_below},
        {"grid_monotone_increasing", grid_up, 0.0},
        {"grid_monotone_decreasing", grid_down, 0.0},
        {"psi_0", true, psi0},
        {"lifted_psi_T", true, lifted_end},
    };

    StrategyClassification out = [&] {
        if (increasing) {
            if (p0 > lifted_end) return make_bang_bang(p, {}, Direction::Sell);
            if (p0 >= psi0) return make_bang_bang(p, single_root(gap, horizon, scan), Direction::Sell);
            return make_bang_bang(p, {}, Direction::Buy);
        }
        if (decreasing) {
            if (p0 > psi0) return make_bang_bang(p, {}, Direction::Sell);
            if (p0 >= lifted_end) return make_bang_bang(p, single_root(gap, horizon, scan), Direction::Buy);
            return make_bang_bang(p, {}, Direction::Buy);
        }
        auto fallback = make_bang_bang(p, scan_roots(gap, horizon, scan),
                                       p0 >= psi0 ? Direction::Sell : Direction::Buy);
        fallback.tag = StrategyTag::MultiSwitch;
        return fallback;
    }();
    out.heuristic = true;
    out.conditions = std::move(conds);
    return out;
}

StrategyClassification classify_convex(const TradingProblem& p, int monotonicity_points)
{
    const auto shape = p.utility.shape();
    if (shape == UtilitySpec::Shape::Custom) {
        throw ConfigError("convex classification requires linear, power or exponential utilities");
    }
    if (p.price.shape(p.beta, p.horizon()) != PriceModel::Shape::Constant) {
        throw ConfigError("convex classification requires a constant discounted price");
    }
    require_capacity(p);
    const double horizon = p.horizon();
    const TwoPhase buy_then_sell{Direction::Buy, Direction::Sell};
    const TwoPhase buy_buy{Direction::Buy, Direction::Buy};

    // Standing assumption: Psi^-_+ is non-increasing.
    double prev = psi_two_phase(p, 0.0, buy_then_sell);
    for (int k = 1; k < monotonicity_points; ++k) {
        const double t = horizon * k / (monotonicity_points - 1);
        const double cur = psi_two_phase(p, t, buy_then_sell);
        if (cur > prev + 1e-10 * std::max(1.0, std::abs(prev))) {
            throw AssumptionViolated("Psi^-_+ is not decreasing near t = " + std::to_string(t));
        }
        prev = cur;
    }

    const double p0 = p.discounted_price(0.0);
    const double a = psi_two_phase(p, horizon, buy_buy);      // Psi^+_+(T)
    const double b = psi_branch(p, 0.0, p.x, Direction::Sell);  // Psi^-(0, x)
    const double c = psi_two_phase(p, horizon, buy_then_sell);  // Psi^-_+(T)
    auto gap = [&](double t) { return psi_two_phase(p, t, buy_then_sell) - p0; };
    auto buy_then_sell_root = [&] { return single_root(gap, horizon, ScanOptions{}); };

    std::vector<Condition> conds{
        {"psi_pp_T", true, a},
        {"psi_minus_0", true, b},
        {"psi_mp_T", true, c},
        {"psi_mp_decreasing", true, 0.0},
    };

    StrategyClassification out = [&] {
        if (p0 <= c) return make_bang_bang(p, {}, Direction::Buy);
        if (p0 >= std::max(a, b)) return make_bang_bang(p, {}, Direction::Sell);
        if (a < b && c < p0 && p0 < b) return make_bang_bang(p, buy_then_sell_root(), Direction::Buy);
        if (b < a) {
            if (b < p0 && p0 < a) return make_bang_bang(p, {}, Direction::Sell);
            if (c < p0 && p0 <= b) return make_bang_bang(p, buy_then_sell_root(), Direction::Buy);
        }
        throw Unclassified("P(0) = " + std::to_string(p0) + " falls outside the covered ranges (Psi^+_+(T) = " +
                           std::to_string(a) + ", Psi^-(0,x) = " + std::to_string(b) +
                           ", Psi^-_+(T) = " + std::to_string(c) + ")");
    }();
    out.conditions = std::move(conds);
    return out;
}

// ---------------------------------------------------------------------------

StrategyClassification solve_stake_parity(const TradingProblem& p)
{
    if (!p.penalty) throw ConfigError("stake parity requires a penalty");
    const auto& pen = *p.penalty;
    const auto& sched = p.schedule;
    const double horizon = p.horizon();
    const double n0 = p.initial_supply();
    const double inv_k = 1.0 / pen.participants;
    const double reach = p.nu_bar * sched.inverse_integral(0.0, horizon);
    const double upper = n0 * (inv_k + reach);
    const double lower = n0 * (inv_k - reach);
    const double delta = pen.delta;
    const auto bps = sched.breakpoints();

    auto path_cost = [&](Direction d, double until) {
        auto dev = [&](double t) {
            return characteristic(sched, 0.0, p.x, t, d, p.nu_bar) - sched.supply(t) * inv_k;
        };
        return numerics::integrate_piecewise([&](double t) { return std::exp(-delta * t) * pen.g.value(dev(t)); },
                                             0.0, until, bps);
    };
    auto full_run = [&](Direction d) {
        const double x_end = characteristic(sched, 0.0, p.x, horizon, d, p.nu_bar);
        const double cost =
            path_cost(d, horizon) + std::exp(-delta * horizon) * pen.q.value(x_end - sched.supply(horizon) * inv_k);
        return StrategyClassification{
            .tag = d == Direction::Buy ? StrategyTag::BuyAll : StrategyTag::SellAll,
            .switch_times = {},
            .first_action = d,
            .value = cost,
            .strategy = Strategy::constant(sign_of(d) * p.nu_bar, p.nu_bar),
            .exit_time = horizon,
            .conditions = {},
        };
    };
    auto run_then_hold = [&](Direction d, double hit) {
        const double cost = path_cost(d, hit) +
                            pen.g.value(0.0) / delta * (std::exp(-delta * hit) - std::exp(-delta * horizon)) +
                            std::exp(-delta * horizon) * pen.q.value(0.0);
        const double level = sign_of(d) * p.nu_bar;
        Strategy strat = hit <= 0.0        ? Strategy::constant(0.0, p.nu_bar)
                         : hit >= horizon ? Strategy::constant(level, p.nu_bar)
                                          : Strategy::piecewise({hit}, {level, 0.0}, p.nu_bar, horizon);
        return StrategyClassification{
            .tag = StrategyTag::HoldAfter,
            .switch_times = {hit},
            .first_action = d,
            .value = cost,
            .strategy = std::move(strat),
            .exit_time = horizon,
            .conditions = {},
        };
    };
    auto hitting_time = [&](double target_integral) {
        if (target_integral <= 0.0) return 0.0;
        if (target_integral >= reach) return horizon;
        return numerics::bisect(
            [&](double t) { return p.nu_bar * sched.inverse_integral(0.0, t) - target_integral; }, 0.0, horizon,
            1e-12 * std::max(1.0, horizon));
    };

    const double share0 = p.x / n0;
    StrategyClassification out = [&] {
        if (p.x > upper) return full_run(Direction::Sell);
        if (share0 > inv_k) return run_then_hold(Direction::Sell, hitting_time(share0 - inv_k));
        if (share0 == inv_k) return run_then_hold(Direction::Sell, 0.0);
        if (p.x >= lower) return run_then_hold(Direction::Buy, hitting_time(inv_k - share0));
        return full_run(Direction::Buy);
    }();
    out.conditions.push_back({"upper_threshold", p.x > upper, upper});
    out.conditions.push_back({"lower_threshold", p.x < lower, lower});
    return out;
}

}  // namespace stakeopt
