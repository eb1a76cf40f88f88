#include "stakeopt/dynamics.hpp"

#include "stakeopt/errors.hpp"
#include "stakeopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace stakeopt {

const char* to_string(Direction d) { return d == Direction::Buy ? "buy" : "sell"; }

const char* to_string(ExitKind k)
{
    switch (k) {
    case ExitKind::Horizon: return "Horizon";
    case ExitKind::Ruin: return "Ruin";
    case ExitKind::Monopoly: return "Monopoly";
    }
    return "unknown";
}

TwoPhase parse_pattern(std::string_view label)
{
    auto dir = [&](char c) {
        if (c == '+') return Direction::Buy;
        if (c == '-') return Direction::Sell;
        throw ConfigError("two-phase pattern must be two characters from {+,-}, got `" + std::string(label) + "`");
    };
    if (label.size() != 2) {
        throw ConfigError("two-phase pattern must be two characters from {+,-}, got `" + std::string(label) + "`");
    }
    return TwoPhase{dir(label[1]), dir(label[0])};
}

std::string pattern_label(TwoPhase p)
{
    auto c = [](Direction d) { return d == Direction::Buy ? '+' : '-'; };
    return std::string{c(p.after), c(p.before)};
}

Strategy Strategy::constant(double level, double nu_bar)
{
    Strategy s;
    if (!(nu_bar > 0.0)) throw DomainError("strategy: nu_bar must be positive");
    if (std::abs(level) > nu_bar) throw DomainError("strategy: level exceeds nu_bar");
    s.nu_bar_ = nu_bar;
    s.rule_ = PiecewiseConstant{{}, {level}};
    return s;
}

Strategy Strategy::piecewise(std::vector<double> switch_times, std::vector<double> levels, double nu_bar,
                             double horizon)
{
    if (!(nu_bar > 0.0)) throw DomainError("strategy: nu_bar must be positive");
    if (levels.size() != switch_times.size() + 1) {
        throw DomainError("strategy: need exactly one more level than switch times");
    }
    for (std::size_t i = 0; i < switch_times.size(); ++i) {
        if (!(switch_times[i] > 0.0 && switch_times[i] < horizon)) {
            throw DomainError("strategy: switch times must lie strictly inside (0, T)");
        }
        if (i > 0 && !(switch_times[i] > switch_times[i - 1])) {
            throw DomainError("strategy: switch times must be strictly increasing");
        }
    }
    for (double v : levels) {
        if (std::abs(v) > nu_bar * (1 + 1e-12)) throw DomainError("strategy: level exceeds nu_bar");
    }
    Strategy s;
    s.nu_bar_ = nu_bar;
    s.rule_ = PiecewiseConstant{std::move(switch_times), std::move(levels)};
    return s;
}

Strategy Strategy::feedback(std::function<double(double, double)> rule, double nu_bar)
{
    if (!(nu_bar > 0.0)) throw DomainError("strategy: nu_bar must be positive");
    Strategy s;
    s.nu_bar_ = nu_bar;
    s.rule_ = Feedback{std::move(rule)};
    return s;
}

double Strategy::rate(double t, double x) const
{
    if (const auto* pc = std::get_if<PiecewiseConstant>(&rule_)) {
        const auto it = std::lower_bound(pc->switch_times.begin(), pc->switch_times.end(), t);
        return pc->levels[static_cast<std::size_t>(it - pc->switch_times.begin())];
    }
    const double v = std::get<Feedback>(rule_).rule(t, x);
    if (!(std::abs(v) <= nu_bar_ * (1 + 1e-9))) {
        throw DomainError("feedback strategy returned a rate outside [-nu_bar, nu_bar]");
    }
    return v;
}

std::vector<double> Strategy::forced_nodes() const
{
    if (const auto* pc = std::get_if<PiecewiseConstant>(&rule_)) return pc->switch_times;
    return {};
}

std::size_t StateTrajectory::exit_index() const
{
    const auto it = std::lower_bound(times.begin(), times.end(), exit_time);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - times.begin(), std::ssize(times) - 1));
}

double StateTrajectory::state_at(double t) const
{
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1 - w) * states[i] + w * states[i + 1];
}

double characteristic(const RewardSchedule& sched, double t, double x, double s, Direction dir, double nu_bar)
{
    if (s < t) throw DomainError("characteristic: s < t");
    if (s == t) return x;
    const double ns = sched.supply(s);
    return sign_of(dir) * nu_bar * ns * sched.inverse_integral(t, s) + x * ns / sched.supply(t);
}

double two_phase_characteristic(const RewardSchedule& sched, double x, double t, double s, TwoPhase pattern,
                                double nu_bar)
{
    if (!(t >= 0.0 && t <= s)) throw DomainError("two_phase_characteristic: need 0 <= t <= s");
    const double share = sign_of(pattern.before) * nu_bar * sched.inverse_integral(0.0, t) +
                         sign_of(pattern.after) * nu_bar * sched.inverse_integral(t, s) +
                         x / sched.initial_supply();
    return share * sched.supply(s);
}

std::optional<double> monopoly_time(const RewardSchedule& sched, double x, double nu_bar)
{
    const double n0 = sched.initial_supply();
    if (x >= n0) return 0.0;
    const double target = (n0 - x) / n0;
    const double horizon = sched.horizon();
    const double reach = nu_bar * sched.inverse_integral(0.0, horizon);
    // Equality is judged to rounding level so that x built from the closed form lands on T.
    const double slack = 1e-12 * target;
    if (reach < target - slack) return std::nullopt;
    if (reach <= target + slack) return horizon;
    return numerics::bisect([&](double t) { return nu_bar * sched.inverse_integral(0.0, t) - target; }, 0.0,
                            horizon, 1e-13 * std::max(1.0, horizon));
}

double default_step(const RewardSchedule& sched) { return sched.horizon() / 4096.0; }

namespace {

std::vector<double> build_nodes(double horizon, double step, const std::vector<double>& forced)
{
    const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    std::vector<double> nodes;
    nodes.reserve(n + forced.size() + 1);
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(static_cast<double>(i) * horizon / static_cast<double>(n));
    nodes.push_back(horizon);
    const double gap = 1e-6 * horizon / static_cast<double>(n);
    for (double f : forced) {
        if (f <= 0.0 || f >= horizon) continue;
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), f);
        if (it != nodes.end() && *it - f < gap) {
            if (*it != horizon) *it = f;
            continue;
        }
        if (it != nodes.begin() && f - *(it - 1) < gap) {
            if (*(it - 1) != 0.0) *(it - 1) = f;
            continue;
        }
        nodes.insert(it, f);
    }
    return nodes;
}

}  // namespace

StateTrajectory simulate(const RewardSchedule& sched, double x0, const Strategy& strat, double step)
{
    if (!(step > 0.0)) throw DomainError("simulate: step must be positive");
    const double horizon = sched.horizon();
    const auto nodes = build_nodes(horizon, step, strat.forced_nodes());

    StateTrajectory traj;
    traj.times.reserve(nodes.size() + 1);
    traj.states.reserve(nodes.size() + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    auto finish_frozen = [&](std::size_t next_node, double value) {
        for (std::size_t k = next_node; k < nodes.size(); ++k) {
            if (nodes[k] <= traj.times.back()) continue;
            traj.mid_states.push_back(value);
            traj.times.push_back(nodes[k]);
            traj.states.push_back(value);
        }
    };

    const double n0 = sched.supply(0.0);
    if (x0 <= 0.0 && strat.rate(0.0, 0.0) <= 0.0) {
        traj.states[0] = 0.0;
        traj.exit_time = 0.0;
        traj.exit_kind = ExitKind::Ruin;
        finish_frozen(1, 0.0);
        return traj;
    }
    if (x0 >= n0 && strat.rate(0.0, n0) >= 0.0) {
        traj.states[0] = n0;
        traj.exit_time = 0.0;
        traj.exit_kind = ExitKind::Monopoly;
        finish_frozen(1, n0);
        return traj;
    }

    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double t0 = nodes[i];
        const double t1 = nodes[i + 1];
        const double h = t1 - t0;
        const double x_start = traj.states.back();

        std::function<double(double, double)> control;
        if (strat.is_piecewise()) {
            const double level = strat.rate(0.5 * (t0 + t1), x_start);
            control = [level](double, double) { return level; };
        } else {
            control = [&strat](double t, double x) { return strat.rate(t, x); };
        }
        auto rhs = [&](double t, double x) { return control(t, x) + sched.rate(t) / sched.supply(t) * x; };
        auto rk4 = [&](double tau) {
            const double k1 = rhs(t0, x_start);
            const double k2 = rhs(t0 + 0.5 * tau, x_start + 0.5 * tau * k1);
            const double k3 = rhs(t0 + 0.5 * tau, x_start + 0.5 * tau * k2);
            const double k4 = rhs(t0 + tau, x_start + tau * k3);
            return x_start + tau * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        };

        const double x_end = rk4(h);
        if (!std::isfinite(x_end)) throw NumericError("simulate: non-finite state", t1);
        const double n_end = sched.supply(t1);
        const bool ruin = x_end <= 0.0;
        const bool monopoly = x_end >= n_end;
        if (ruin || monopoly) {
            auto gap = [&](double tau) {
                const double x = rk4(tau);
                return ruin ? x : x / sched.supply(t0 + tau) - 1.0;
            };
            const double tau = numerics::bisect(gap, 0.0, h, kExitTimeTol);
            const double t_exit = t0 + tau;
            const double x_exit = ruin ? 0.0 : sched.supply(t_exit);
            traj.mid_states.push_back(rk4(0.5 * tau));
            traj.times.push_back(t_exit);
            traj.states.push_back(x_exit);
            traj.exit_time = t_exit;
            traj.exit_kind = ruin ? ExitKind::Ruin : ExitKind::Monopoly;
            finish_frozen(i + 1, x_exit);
            return traj;
        }
        traj.mid_states.push_back(rk4(0.5 * h));
        traj.times.push_back(t1);
        traj.states.push_back(x_end);
    }
    traj.exit_time = horizon;
    traj.exit_kind = ExitKind::Horizon;
    return traj;
}

StateTrajectory simulate(const TradingProblem& problem, const Strategy& strat, double step)
{
    return simulate(problem.schedule, problem.x, strat, step);
}

void write_trajectory_csv(const StateTrajectory& traj, const RewardSchedule& sched, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << std::setprecision(17) << "t,X,N,share\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double n = sched.supply(traj.times[i]);
        out << traj.times[i] << ',' << traj.states[i] << ',' << n << ',' << traj.states[i] / n << '\n';
    }
}

}  // namespace stakeopt
