#pragma once

#include "stakeopt/problem.hpp"
#include "stakeopt/reward.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stakeopt {

enum class Direction : int { Sell = -1, Buy = 1 };

inline double sign_of(Direction d) { return static_cast<double>(static_cast<int>(d)); }
const char* to_string(Direction d);

/// Direction used on [0, t] and on [t, s] for a composite characteristic.
///
/// Labels follow the superscript-then-subscript reading of gamma^a_b: the first
/// character is the direction *after* the switch, the second the one *before*.
/// So "-+" buys before the switch and sells after it.
struct TwoPhase {
    Direction before;
    Direction after;
};

TwoPhase parse_pattern(std::string_view label);
std::string pattern_label(TwoPhase p);

/// Trading rate nu(t) (open loop, piecewise constant) or nu(t, x) (feedback).
class Strategy {
public:
    struct PiecewiseConstant {
        std::vector<double> switch_times;
        std::vector<double> levels;  // switch_times.size() + 1 entries
    };
    struct Feedback {
        std::function<double(double, double)> rule;
    };

    static Strategy constant(double level, double nu_bar);
    /// Switch times strictly increasing inside (0, horizon), |levels| <= nu_bar.
    static Strategy piecewise(std::vector<double> switch_times, std::vector<double> levels, double nu_bar,
                              double horizon);
    static Strategy feedback(std::function<double(double, double)> rule, double nu_bar);

    double nu_bar() const { return nu_bar_; }
    bool is_piecewise() const { return std::holds_alternative<PiecewiseConstant>(rule_); }
    const PiecewiseConstant& pieces() const { return std::get<PiecewiseConstant>(rule_); }

    /// Rate at (t, x). Piecewise rates are left-continuous: at a switch time the
    /// earlier level applies.
    double rate(double t, double x) const;

    /// Switch times to be used as forced integration nodes.
    std::vector<double> forced_nodes() const;

private:
    Strategy() = default;
    double nu_bar_ = 0.0;
    std::variant<PiecewiseConstant, Feedback> rule_;
};

enum class ExitKind { Horizon, Ruin, Monopoly };
const char* to_string(ExitKind k);

/// RK4 trajectory of X' = nu + (N'/N) X. States are frozen after the exit time.
struct StateTrajectory {
    std::vector<double> times;
    std::vector<double> states;
    /// State at the midpoint of each step [times[i], times[i+1]].
    std::vector<double> mid_states;
    double exit_time = 0.0;
    ExitKind exit_kind = ExitKind::Horizon;

    /// Index of the node equal to exit_time.
    std::size_t exit_index() const;
    double state_at(double t) const;
};

/// gamma_{t,x}(s) = d nu_bar N(s) int_t^s du/N + x N(s)/N(t). No clamping to [0, N(s)].
double characteristic(const RewardSchedule& sched, double t, double x, double s, Direction dir, double nu_bar);

/// Composite characteristic from x at time 0: `pattern.before` on [0, t], `pattern.after` on [t, s].
double two_phase_characteristic(const RewardSchedule& sched, double x, double t, double s, TwoPhase pattern,
                                double nu_bar);

/// First t0 with nu_bar int_0^t0 ds/N = (N - x)/N, or nullopt when the horizon is reached first.
std::optional<double> monopoly_time(const RewardSchedule& sched, double x, double nu_bar);

inline constexpr double kExitTimeTol = 1e-9;

/// Fixed-step RK4 from X(0) = x0 with strategy switch times as forced nodes, and
/// bisection on the crossing step when X hits 0 or N(t).
StateTrajectory simulate(const RewardSchedule& sched, double x0, const Strategy& strat, double step);
StateTrajectory simulate(const TradingProblem& problem, const Strategy& strat, double step);

/// Default step: T / 4096.
double default_step(const RewardSchedule& sched);

/// CSV with header `t,X,N,share`.
void write_trajectory_csv(const StateTrajectory& traj, const RewardSchedule& sched,
                          const std::filesystem::path& path);

}  // namespace stakeopt
