#pragma once

#include "stakeopt/dynamics.hpp"
#include "stakeopt/problem.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace stakeopt {

struct ObjectiveReport {
    double j2 = 0.0;
    double j1 = 0.0;
    std::optional<double> mc_mean;
    std::optional<double> mc_halfwidth;
    double exit_time = 0.0;
    ExitKind exit_kind = ExitKind::Horizon;
};

/// J2 = int_0^T' [e^{-beta t} l(X) - P~ nu] dt + e^{-beta T'} h(X(T')), T' the exit time,
/// by composite Simpson on the simulation grid. step <= 0 picks default_step().
ObjectiveReport evaluate_j2_report(const TradingProblem& problem, const Strategy& strat, double step = 0.0);
double evaluate_j2(const TradingProblem& problem, const Strategy& strat, double step = 0.0);

/// Risk-free holdings b(t): piecewise C1 with explicit jumps.
struct BankPolicy {
    std::function<double(double)> b = [](double) { return 0.0; };
    std::function<double(double)> db = [](double) { return 0.0; };
    /// (time, jump size) pairs; b above already includes them.
    std::vector<std::pair<double, double>> jumps;

    static BankPolicy zero() { return {}; }
    /// Requires b(0) = 0 and b >= 0 (sampled). Throws ConfigError.
    void validate(double horizon, int points = 1024) const;
};

struct MonteCarloOptions {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    /// Steps of the price grid on [0, T].
    std::size_t price_steps = 256;
    unsigned threads = 1;
};

/// Samples GBM price paths and accumulates the full objective
///   int e^{-beta t} [r b dt - db - P nu dt + l(X) dt] + e^{-beta T'} [b(T') + h(X(T'))]
/// pathwise. j1 = (r - beta) int e^{-beta t} b dt is computed separately by quadrature.
/// Half-width is 3 standard errors.
ObjectiveReport evaluate_full_monte_carlo(const TradingProblem& problem, const Strategy& strat,
                                          const BankPolicy& bank, const MonteCarloOptions& opts);

/// int_0^T' e^{-delta t} g(X - N/K) dt + e^{-delta T'} q(X(T') - N(T')/K) by Simpson.
double evaluate_parity_cost(const TradingProblem& problem, const Strategy& strat, double step = 0.0);

enum class SearchObjective { MaximizeJ2, MinimizeParityCost };

struct BruteForceOptions {
    int intervals = 8;
    /// 3, 5 or 9 equally spaced levels in [-nu_bar, nu_bar].
    int levels = 3;
    double step = 0.0;
    SearchObjective objective = SearchObjective::MaximizeJ2;
    unsigned threads = 1;
    std::size_t max_candidates = 1'000'000;
};

struct BruteForceResult {
    std::vector<double> levels;
    Strategy strategy = Strategy::constant(0.0, 1.0);
    double value = 0.0;
    std::size_t evaluated = 0;
};

/// Exhaustive search over piecewise-constant strategies on equal intervals. The first
/// best candidate in enumeration order wins ties.
BruteForceResult brute_force_best(const TradingProblem& problem, const BruteForceOptions& opts = {});

/// Bound on the loss from aligning a single switch to the interval grid:
/// nu_bar max|Psi - P~| T / m.
double discretization_slack(const TradingProblem& problem, int intervals);

}  // namespace stakeopt
