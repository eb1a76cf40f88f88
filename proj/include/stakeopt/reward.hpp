#pragma once

#include "stakeopt/numerics.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace stakeopt {

/// Total stake supply N(t) on [0, T].
///
/// Two families are supported: the polynomial schedule N(t) = (N0^{1/a} + t)^a,
/// with everything in closed form, and a tabulated schedule interpolated by a
/// monotone cubic. Tabulated schedules are only C1, so they report
/// approximate_smoothness().
///
/// Immutable after construction.
class RewardSchedule {
public:
    enum class Kind { Polynomial, Tabulated };

    static RewardSchedule polynomial(double alpha, double initial_supply, double horizon);
    /// Knots (t, N(t)): strictly increasing t starting at 0, N positive and non-decreasing.
    /// The horizon defaults to the last knot.
    static RewardSchedule tabulated(std::vector<std::pair<double, double>> knots, double horizon = -1.0);

    Kind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    double initial_supply() const { return n0_; }
    /// Only meaningful for the polynomial family.
    double alpha() const { return alpha_; }
    bool approximate_smoothness() const { return kind_ == Kind::Tabulated; }

    /// N(t).
    double supply(double t) const;
    /// N'(t).
    double rate(double t) const;
    /// The integral of ds / N(s) over [t0, t1].
    double inverse_integral(double t0, double t1) const;

    /// Interior points where the schedule is less smooth (tabulated knots).
    std::vector<double> breakpoints() const;

    /// Same schedule with a different horizon (must not exceed the tabulated range).
    RewardSchedule with_horizon(double horizon) const;

private:
    RewardSchedule() = default;
    double checked_time(double t, const char* op) const;

    Kind kind_ = Kind::Polynomial;
    double alpha_ = 1.0;
    double n0_ = 1.0;
    double root_ = 1.0;  // N0^{1/alpha}
    double horizon_ = 1.0;
    numerics::MonotoneCubic table_;
};

/// Reads a `t,N` CSV (header required, first row t = 0). Errors carry the line number.
RewardSchedule load_schedule_csv(const std::filesystem::path& path, double horizon = -1.0);

double total_supply(const RewardSchedule& sched, double t);
double reward_rate(const RewardSchedule& sched, double t);
double inverse_supply_integral(const RewardSchedule& sched, double t0, double t1);

}  // namespace stakeopt
