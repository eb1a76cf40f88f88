#include "config.hpp"

#include "stakeopt/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <set>
#include <vector>

namespace stakeopt::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double number(const std::string& text, const std::string& what)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw ConfigError(what + ": '" + text + "' is not a number");
    }
    return v;
}

/// Splits "kind:a,b,c" and checks the argument count.
std::pair<std::string, std::vector<double>> compact(const std::string& spec, const std::string& field,
                                                    const std::string& expected_kind, std::size_t count)
{
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    if (kind != expected_kind) return {kind, {}};
    if (colon == std::string::npos) throw ConfigError(field + ": '" + spec + "' has no arguments");
    std::vector<double> args;
    for (const auto& part : split(spec.substr(colon + 1), ',')) args.push_back(number(part, field));
    if (args.size() != count) {
        throw ConfigError(field + ": '" + spec + "' expects " + std::to_string(count) + " values");
    }
    return {kind, args};
}

std::filesystem::path resolve(const std::string& path, const std::filesystem::path& base_dir)
{
    std::filesystem::path p(path);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("referenced file does not exist: " + p.string());
    return p;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

RewardSchedule parse_schedule(const std::string& spec, std::optional<double> horizon,
                              const std::filesystem::path& base_dir)
{
    if (starts_with(spec, "file:")) return load_schedule_csv(resolve(spec.substr(5), base_dir), horizon.value_or(-1.0));
    const auto [kind, args] = compact(spec, "schedule", "poly", 2);
    if (kind != "poly") throw ConfigError("schedule: unknown kind '" + kind + "' (poly:alpha,N or file:PATH)");
    if (!horizon) throw ConfigError("horizon is required for a polynomial schedule");
    return RewardSchedule::polynomial(args[0], args[1], *horizon);
}

PriceModel parse_price(const std::string& spec, double beta, const std::filesystem::path& base_dir)
{
    if (starts_with(spec, "file:")) return load_discounted_price_csv(resolve(spec.substr(5), base_dir), beta);
    if (starts_with(spec, "gbm")) {
        const auto [kind, a] = compact(spec, "price", "gbm", 3);
        return PriceModel::gbm(a[0], a[1], a[2]);
    }
    const auto [kind, a] = compact(spec, "price", "const", 1);
    if (kind != "const") {
        throw ConfigError("price: unknown kind '" + kind + "' (gbm:P0,mu,sigma, const:P0 or file:PATH)");
    }
    return PriceModel::constant(a[0]);
}

UtilitySpec parse_utility(const std::string& spec)
{
    if (starts_with(spec, "power")) {
        const auto [kind, a] = compact(spec, "utility", "power", 3);
        return UtilitySpec::power(a[0], a[1], a[2]);
    }
    const auto [kind, a] = compact(spec, "utility", "linear", 2);
    if (kind != "linear") throw ConfigError("utility: unknown kind '" + kind + "' (linear:l,h or power:p,lcoef,hcoef)");
    return UtilitySpec::linear(a[0], a[1]);
}

PenaltySpec parse_penalty(const std::string& spec)
{
    const auto [kind, a] = compact(spec, "penalty", "quad", 4);
    if (kind != "quad") throw ConfigError("penalty: unknown kind '" + kind + "' (quad:g,q,delta,K)");
    if (a[3] < 1.0 || a[3] != std::floor(a[3])) throw ConfigError("penalty: K must be a positive integer");
    return PenaltySpec::quadratic(a[0], a[1], a[2], static_cast<int>(a[3]));
}

TradingProblem build_problem(const ScenarioConfig& cfg)
{
    const std::string where = cfg.origin.empty() ? std::string() : cfg.origin + ": ";
    if (!cfg.nu_bar) throw ConfigError(where + "missing required field 'nu_bar'");
    if (cfg.beta < cfg.r) throw ConfigError(where + "beta must be at least r");
    try {
        TradingProblem p{
            .schedule = parse_schedule(cfg.schedule, cfg.horizon, cfg.base_dir),
            .utility = parse_utility(cfg.utility),
            .price = parse_price(cfg.price, cfg.beta, cfg.base_dir),
            .beta = cfg.beta,
            .r = cfg.r,
            .nu_bar = *cfg.nu_bar,
            .x = cfg.x,
            .penalty = cfg.penalty ? std::optional<PenaltySpec>(parse_penalty(*cfg.penalty)) : std::nullopt,
        };
        p.validate();
        return p;
    } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(where + e.what());
    }
}

// ---------------------------------------------------------------------------

namespace {

std::string mark(const std::filesystem::path& path, const YAML::Node& node)
{
    return path.string() + ":" + std::to_string(node.Mark().line + 1);
}

template <class T>
T scalar(const std::filesystem::path& path, const YAML::Node& node, const std::string& field)
{
    if (!node.IsScalar()) throw ConfigError(mark(path, node) + ": field '" + field + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(mark(path, node) + ": field '" + field + "' has an invalid value '" + node.Scalar() + "'");
    }
}

void check_keys(const std::filesystem::path& path, const YAML::Node& block, const std::string& name,
                const std::set<std::string>& allowed)
{
    if (!block.IsMap()) throw ConfigError(mark(path, block) + ": '" + name + "' must be a mapping");
    for (const auto& kv : block) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(mark(path, kv.first) + ": unknown field '" + name + "." + key + "'");
    }
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot open config " + path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError(path.string() + ": top level must be a mapping");
    check_keys(path, root, "config", {"problem", "run"});

    ScenarioConfig cfg;
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const auto problem = root["problem"];
    if (!problem) throw ConfigError(path.string() + ": missing 'problem' block");
    check_keys(path, problem, "problem",
               {"schedule", "horizon", "beta", "r", "nu_bar", "x", "price", "utility", "penalty"});
    cfg.origin = mark(path, problem);

    auto read = [&](const YAML::Node& block, const char* key, auto& target) {
        if (const auto n = block[key]) {
            using T = std::remove_cvref_t<decltype(target)>;
            if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
                target = scalar<typename T::value_type>(path, n, key);
            } else {
                target = scalar<T>(path, n, key);
            }
        }
    };
    read(problem, "schedule", cfg.schedule);
    read(problem, "horizon", cfg.horizon);
    read(problem, "beta", cfg.beta);
    read(problem, "r", cfg.r);
    read(problem, "nu_bar", cfg.nu_bar);
    read(problem, "x", cfg.x);
    read(problem, "price", cfg.price);
    read(problem, "utility", cfg.utility);
    read(problem, "penalty", cfg.penalty);

    if (const auto run = root["run"]) {
        check_keys(path, run, "run",
                   {"command", "method", "variant", "strategy", "bank", "nt", "ny", "step", "m", "levels", "paths",
                    "seed", "out", "save_grid", "grid_csv", "trajectory_csv"});
        read(run, "command", cfg.command);
        read(run, "method", cfg.method);
        read(run, "variant", cfg.variant);
        read(run, "strategy", cfg.strategy);
        read(run, "bank", cfg.bank);
        read(run, "nt", cfg.nt);
        read(run, "ny", cfg.ny);
        read(run, "step", cfg.step);
        read(run, "m", cfg.m);
        read(run, "levels", cfg.levels);
        read(run, "paths", cfg.paths);
        read(run, "seed", cfg.seed);
        read(run, "out", cfg.out);
        read(run, "save_grid", cfg.save_grid);
        read(run, "grid_csv", cfg.grid_csv);
        read(run, "trajectory_csv", cfg.trajectory_csv);
    }
    return cfg;
}

nlohmann::json to_json(const ScenarioConfig& cfg)
{
    nlohmann::json problem = {
        {"schedule", cfg.schedule}, {"beta", cfg.beta},   {"r", cfg.r},
        {"x", cfg.x},               {"price", cfg.price}, {"utility", cfg.utility},
    };
    if (cfg.horizon) problem["horizon"] = *cfg.horizon;
    if (cfg.nu_bar) problem["nu_bar"] = *cfg.nu_bar;
    if (cfg.penalty) problem["penalty"] = *cfg.penalty;
    nlohmann::json run = {
        {"command", cfg.command}, {"method", cfg.method}, {"variant", cfg.variant}, {"strategy", cfg.strategy},
        {"bank", cfg.bank},       {"nt", cfg.nt},         {"ny", cfg.ny},           {"step", cfg.step},
        {"m", cfg.m},             {"levels", cfg.levels}, {"paths", cfg.paths},     {"seed", cfg.seed},
    };
    return {{"problem", problem}, {"run", run}, {"base_dir", cfg.base_dir.string()}};
}

ScenarioConfig config_from_json(const nlohmann::json& j)
{
    ScenarioConfig cfg;
    try {
        const auto& p = j.at("problem");
        cfg.schedule = p.at("schedule").get<std::string>();
        if (p.contains("horizon")) cfg.horizon = p["horizon"].get<double>();
        cfg.beta = p.at("beta").get<double>();
        cfg.r = p.at("r").get<double>();
        if (p.contains("nu_bar")) cfg.nu_bar = p["nu_bar"].get<double>();
        cfg.x = p.at("x").get<double>();
        cfg.price = p.at("price").get<std::string>();
        cfg.utility = p.at("utility").get<std::string>();
        if (p.contains("penalty")) cfg.penalty = p["penalty"].get<std::string>();
        const auto& r = j.at("run");
        cfg.command = r.at("command").get<std::string>();
        cfg.method = r.at("method").get<std::string>();
        cfg.variant = r.at("variant").get<std::string>();
        cfg.strategy = r.at("strategy").get<std::string>();
        cfg.bank = r.at("bank").get<std::string>();
        cfg.nt = r.at("nt").get<std::size_t>();
        cfg.ny = r.at("ny").get<std::size_t>();
        cfg.step = r.at("step").get<double>();
        cfg.m = r.at("m").get<int>();
        cfg.levels = r.at("levels").get<int>();
        cfg.paths = r.at("paths").get<std::size_t>();
        cfg.seed = r.at("seed").get<std::uint64_t>();
        if (j.contains("base_dir")) cfg.base_dir = j["base_dir"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config echo: ") + e.what());
    }
    return cfg;
}

}  // namespace stakeopt::cli
