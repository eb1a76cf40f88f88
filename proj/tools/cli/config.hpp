#pragma once

#include "stakeopt/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace stakeopt::cli {

/// Scenario file contents. Problem inputs are kept in their compact string forms
/// (e.g. "poly:1,100", "gbm:1,0.05,0.2") so the echo in every report re-parses.
struct ScenarioConfig {
    // problem block
    std::string schedule = "poly:1,100";
    std::optional<double> horizon;
    double beta = 0.1;
    double r = 0.0;
    std::optional<double> nu_bar;
    double x = 0.0;
    std::string price = "const:1";
    std::string utility = "linear:1,1";
    std::optional<std::string> penalty;

    // run block
    std::string command;
    std::string method = "auto";
    std::string variant = "trading";
    std::string strategy = "classify";
    std::string bank = "zero";
    std::size_t nt = 512;
    std::size_t ny = 512;
    double step = 0.0;
    int m = 8;
    int levels = 3;
    std::size_t paths = 0;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
    std::optional<std::string> save_grid;
    std::optional<std::string> grid_csv;
    std::optional<std::string> trajectory_csv;

    /// Directory that relative file: paths resolve against.
    std::filesystem::path base_dir = ".";
    /// "file:line" of the problem block, for diagnostics.
    std::string origin;
};

/// Reads a YAML scenario. Errors name the file, line and field.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Builds and validates the problem (beta >= r, ranges). Throws ConfigError naming the field.
TradingProblem build_problem(const ScenarioConfig& cfg);

RewardSchedule parse_schedule(const std::string& spec, std::optional<double> horizon,
                              const std::filesystem::path& base_dir);
PriceModel parse_price(const std::string& spec, double beta, const std::filesystem::path& base_dir);
UtilitySpec parse_utility(const std::string& spec);
PenaltySpec parse_penalty(const std::string& spec);

nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const nlohmann::json& j);

}  // namespace stakeopt::cli
