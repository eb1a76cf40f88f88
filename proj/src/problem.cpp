#include "stakeopt/problem.hpp"

#include "stakeopt/errors.hpp"

#include <cmath>

namespace stakeopt {

void TradingProblem::validate() const
{
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a non-negative number");
    if (!std::isfinite(r)) throw ConfigError("r must be finite");
    if (beta < r) throw ConfigError("beta must be >= r (the bank holding reduces to b = 0 only then)");
    if (!(nu_bar > 0.0) || !std::isfinite(nu_bar)) throw ConfigError("nu_bar must be positive");
    if (!(x >= 0.0 && x <= initial_supply())) throw ConfigError("x must lie in [0, N(0)]");
    check_regularity(utility, schedule.supply(horizon()));
    if (penalty) penalty->validate(schedule.supply(horizon()));
}

}  // namespace stakeopt
