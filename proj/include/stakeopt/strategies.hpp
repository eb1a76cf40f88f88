#pragma once

#include "stakeopt/dynamics.hpp"
#include "stakeopt/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stakeopt {

enum class StrategyTag { BuyAll, SellAll, BuyThenSell, SellThenBuy, MultiSwitch, HoldAfter };
const char* to_string(StrategyTag tag);

/// A named check evaluated while classifying, reported alongside the result.
struct Condition {
    std::string name;
    bool holds = false;
    double value = 0.0;
};

struct StrategyClassification {
    StrategyTag tag = StrategyTag::BuyAll;
    /// Switch times strictly inside (0, T). For HoldAfter: the time trading stops (may be 0).
    std::vector<double> switch_times;
    Direction first_action = Direction::Buy;
    /// U(x). For the stake-parity problem this is the minimal penalty cost.
    double value = 0.0;
    Strategy strategy = Strategy::constant(0.0, 1.0);
    double exit_time = 0.0;
    /// Set when the classification rests on asymptotic (large N) conditions.
    bool heuristic = false;
    std::vector<Condition> conditions;

    std::optional<double> t0() const
    {
        if (switch_times.empty()) return std::nullopt;
        return switch_times.front();
    }
};

// ---------------------------------------------------------------------------
// Stake hoarding (zero discounted price)

/// Full-capacity buying, optimal when either the horizon comes first or the
/// monopoly exit satisfies (h o N)' + l(N) <= beta h(N). The price model is not consulted.
/// Throws ConditionUnverified when a monopoly exit happens and that condition fails.
StrategyClassification solve_hoarding(const TradingProblem& problem);

struct MonopolyPhase {
    bool never_monopoly = false;
    /// Limiting share X/N as t -> infinity; only set when never_monopoly.
    std::optional<double> limit_share;
    /// (alpha - 1)(N - x) N^{-1/alpha} for alpha > 1, otherwise +inf is meaningless and left at 0.
    double threshold = 0.0;
};

/// Long-horizon behaviour of full-capacity buying under the polynomial schedule.
MonopolyPhase monopoly_phase(double alpha, double initial_supply, double x, double nu_bar);

// ---------------------------------------------------------------------------
// Marginal value of one more stake

/// int_t^T e^{-beta s} N(s) ds (closed form for alpha = 1).
double discounted_supply_integral(const TradingProblem& problem, double t);

/// Psi(t) for linear utilities: (h e^{-beta T} N(T) + l int_t^T e^{-beta s} N(s) ds) / N(t).
double psi(const TradingProblem& problem, double t);

/// Psi^{d}(t, x) = d/dx v^{d}(t, x) for any C1 utility.
double psi_branch(const TradingProblem& problem, double t, double x, Direction dir);

/// Psi^a_b(t): psi_branch with `after` evaluated at the `before`-characteristic from (0, x).
double psi_two_phase(const TradingProblem& problem, double t, TwoPhase pattern);

/// v^{d}(t, x): value of trading at full capacity in direction d from (t, x) to T.
/// Throws EarlyExitPossible if the path leaves [0, N(s)] before T.
double value_v(const TradingProblem& problem, double t, double x, Direction dir);
inline double value_v_plus(const TradingProblem& p, double t, double x) { return value_v(p, t, x, Direction::Buy); }
inline double value_v_minus(const TradingProblem& p, double t, double x) { return value_v(p, t, x, Direction::Sell); }

/// J2 of the bang-bang strategy with the given switch times and starting direction,
/// by adaptive quadrature along the closed-form characteristics.
double bang_bang_value(const TradingProblem& problem, const std::vector<double>& switch_times, Direction first);

/// nu_bar int_0^T dt/N <= min(x/N, (N - x)/N): no bang-bang path can exit early.
bool capacity_condition_holds(const TradingProblem& problem);

// ---------------------------------------------------------------------------
// Classifiers

struct ScanOptions {
    /// Cells of the sign scan of Psi - P~ before bisection.
    int cells = 1024;
    double root_tol = 1e-10;
};

/// Linear utilities, any monotone discounted price. Throws EarlyExitPossible when
/// the capacity condition fails.
StrategyClassification classify_linear(const TradingProblem& problem, const ScanOptions& scan = {});

struct GbmBounds {
    /// P(0) above this makes Psi - P~ increasing (large-N approximation).
    double increasing_above = 0.0;
    /// P(0) below this makes Psi - P~ decreasing (large-N approximation).
    double decreasing_below = 0.0;
};

/// eps defaults to 1e-6 N^{1/alpha}.
GbmBounds gbm_monotonicity_bounds(const TradingProblem& problem, std::optional<double> eps = std::nullopt);

/// Polynomial schedule, GBM price with beta > mu, linear utilities.
StrategyClassification classify_gbm_polynomial(const TradingProblem& problem,
                                               std::optional<double> eps = std::nullopt,
                                               const ScanOptions& scan = {});

/// Convex utilities and constant discounted price. Throws AssumptionViolated when
/// Psi^-_+ is not decreasing and Unclassified for P(0) outside the covered ranges.
StrategyClassification classify_convex(const TradingProblem& problem, int monotonicity_points = 256);

/// Stake parity: minimise the discounted g/q penalty of X - N/K (requires problem.penalty).
StrategyClassification solve_stake_parity(const TradingProblem& problem);

}  // namespace stakeopt
