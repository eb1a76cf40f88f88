#pragma once

#include "stakeopt/price.hpp"
#include "stakeopt/reward.hpp"
#include "stakeopt/utility.hpp"

#include <optional>

namespace stakeopt {

/// One participant's full problem instance. The horizon is the schedule's.
struct TradingProblem {
    RewardSchedule schedule;
    UtilitySpec utility;
    PriceModel price;
    double beta = 0.1;
    double r = 0.0;
    double nu_bar = 1.0;
    double x = 0.0;
    std::optional<PenaltySpec> penalty;

    double horizon() const { return schedule.horizon(); }
    double initial_supply() const { return schedule.initial_supply(); }
    double discounted_price(double t) const { return price.discounted_mean(beta, t); }

    /// beta >= r, nu_bar > 0, 0 <= x <= N(0), utility and penalty regularity.
    /// Throws ConfigError.
    void validate() const;
};

}  // namespace stakeopt
