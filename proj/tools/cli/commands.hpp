#pragma once

#include "config.hpp"

#include "stakeopt/objective.hpp"
#include "stakeopt/strategies.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace stakeopt::cli {

/// Worker threads from STAKEOPT_THREADS, else the hardware concurrency.
unsigned thread_count();

nlohmann::json to_json(const StrategyClassification& c);
nlohmann::json to_json(const ObjectiveReport& r);

/// Dispatches on cfg.command. Writes the JSON report to `out` (and to cfg.out when set).
/// Returns 0 on success, 2 on a refusal, 1 on any other error (message on `err`).
int run(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err);

/// Classifier selected by cfg.method ("auto", "linear", "gbm", "convex").
StrategyClassification classify(const TradingProblem& problem, const std::string& method);

/// "classify", "const:L", "piecewise:t1,t2/l0,l1,l2" or "hjb".
Strategy parse_strategy(const std::string& spec, const TradingProblem& problem, const ScenarioConfig& cfg);

/// "zero", "linear:c" (b = c t) or "step:t,a" (b jumps to a at t).
BankPolicy parse_bank(const std::string& spec);

/// Writes the figure data series and manifest.json into outdir (created if absent).
nlohmann::json reproduce_figures(const std::filesystem::path& outdir);

}  // namespace stakeopt::cli
