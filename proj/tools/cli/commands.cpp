#include "commands.hpp"

#include "stakeopt/errors.hpp"
#include "stakeopt/hjb.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

namespace stakeopt::cli {

namespace {

std::vector<double> numbers(const std::string& list, const std::string& field)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto pos = std::min(list.find(',', start), list.size());
        const std::string part = list.substr(start, pos - start);
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (part.empty() || *end != '\0') throw ConfigError(field + ": '" + part + "' is not a number");
        out.push_back(v);
        start = pos + 1;
    }
    return out;
}

HjbVariant parse_variant(const std::string& s)
{
    if (s == "hoarding") return HjbVariant::Hoarding;
    if (s == "trading") return HjbVariant::Trading;
    if (s == "risk" || s == "risk-control") return HjbVariant::RiskControl;
    throw ConfigError("variant must be hoarding, trading or risk (got '" + s + "')");
}

HjbOptions hjb_options(const ScenarioConfig& cfg)
{
    HjbOptions o;
    o.nt = cfg.nt;
    o.ny = cfg.ny;
    return o;
}

nlohmann::json schedule_json(const TradingProblem& p)
{
    return {{"horizon", p.horizon()},
            {"initial_supply", p.initial_supply()},
            {"final_supply", p.schedule.supply(p.horizon())},
            {"approximate_smoothness", p.schedule.approximate_smoothness()}};
}

nlohmann::json run_command(const ScenarioConfig& cfg)
{
    const auto problem = build_problem(cfg);
    nlohmann::json report;
    const std::string& cmd = cfg.command;

    if (cmd == "hoard") {
        report["result"] = to_json(solve_hoarding(problem));
    } else if (cmd == "classify") {
        report["result"] = to_json(classify(problem, cfg.method));
    } else if (cmd == "parity") {
        report["result"] = to_json(solve_stake_parity(problem));
    } else if (cmd == "phase") {
        if (problem.schedule.kind() != RewardSchedule::Kind::Polynomial) {
            throw ConfigError("phase requires a polynomial schedule");
        }
        const auto ph = monopoly_phase(problem.schedule.alpha(), problem.initial_supply(), problem.x, problem.nu_bar);
        nlohmann::json r = {{"never_monopoly", ph.never_monopoly}, {"threshold", ph.threshold}};
        r["limit_share"] = ph.limit_share ? nlohmann::json(*ph.limit_share) : nlohmann::json(nullptr);
        const auto t0 = monopoly_time(problem.schedule, problem.x, problem.nu_bar);
        r["monopoly_time"] = t0 ? nlohmann::json(*t0) : nlohmann::json(nullptr);
        report["result"] = r;
    } else if (cmd == "hjb") {
        const auto grid = solve_hjb(problem, parse_variant(cfg.variant), hjb_options(cfg));
        report["result"] = {{"variant", to_string(grid.variant)},
                            {"nt", grid.nt},
                            {"ny", grid.ny},
                            {"cfl", grid.cfl},
                            {"w0", value_at(grid, 0.0, problem.x)}};
        if (cfg.save_grid) write_grid_binary(grid, *cfg.save_grid);
        if (cfg.grid_csv) write_grid_csv(grid, *cfg.grid_csv);
        if (cfg.trajectory_csv) {
            const auto traj = simulate(problem, extract_feedback(grid), cfg.step > 0 ? cfg.step : default_step(problem.schedule));
            write_trajectory_csv(traj, problem.schedule, *cfg.trajectory_csv);
        }
    } else if (cmd == "evaluate") {
        const auto strat = parse_strategy(cfg.strategy, problem, cfg);
        if (cfg.method == "parity") {
            report["result"] = {{"parity_cost", evaluate_parity_cost(problem, strat, cfg.step)}};
        } else if (cfg.paths > 0) {
            MonteCarloOptions mc;
            mc.paths = cfg.paths;
            mc.seed = cfg.seed;
            mc.threads = thread_count();
            report["result"] = to_json(evaluate_full_monte_carlo(problem, strat, parse_bank(cfg.bank), mc));
        } else {
            report["result"] = to_json(evaluate_j2_report(problem, strat, cfg.step));
        }
        if (cfg.trajectory_csv) {
            const auto traj = simulate(problem, strat, cfg.step > 0 ? cfg.step : default_step(problem.schedule));
            write_trajectory_csv(traj, problem.schedule, *cfg.trajectory_csv);
        }
    } else if (cmd == "oracle") {
        BruteForceOptions o;
        o.intervals = cfg.m;
        o.levels = cfg.levels;
        o.step = cfg.step;
        o.threads = thread_count();
        o.objective = cfg.method == "parity" ? SearchObjective::MinimizeParityCost : SearchObjective::MaximizeJ2;
        const auto best = brute_force_best(problem, o);
        report["result"] = {{"levels", best.levels}, {"value", best.value}, {"evaluated", best.evaluated}};
        if (o.objective == SearchObjective::MaximizeJ2) {
            report["result"]["discretization_slack"] = discretization_slack(problem, cfg.m);
        }
    } else {
        throw ConfigError("unknown command '" + cmd + "'");
    }
    report["command"] = cmd;
    report["schedule"] = schedule_json(problem);
    report["config"] = to_json(cfg);
    return report;
}

void emit(const nlohmann::json& report, const ScenarioConfig& cfg, std::ostream& out)
{
    const std::string text = report.dump(2);
    out << text << '\n';
    if (cfg.out && cfg.command != "figures") {
        std::ofstream file(*cfg.out);
        if (!file) throw Error("cannot write " + *cfg.out);
        file << text << '\n';
    }
}

}  // namespace

unsigned thread_count()
{
    if (const char* env = std::getenv("STAKEOPT_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json to_json(const StrategyClassification& c)
{
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& k : c.conditions) conds.push_back({{"name", k.name}, {"holds", k.holds}, {"value", k.value}});
    nlohmann::json j = {
        {"tag", to_string(c.tag)},
        {"switch_times", c.switch_times},
        {"first_action", to_string(c.first_action)},
        {"value", c.value},
        {"exit_time", c.exit_time},
        {"heuristic", c.heuristic},
        {"conditions", conds},
    };
    if (const auto t0 = c.t0()) j["t0"] = *t0;
    return j;
}

nlohmann::json to_json(const ObjectiveReport& r)
{
    nlohmann::json j = {
        {"j2", r.j2},
        {"j1", r.j1},
        {"exit_time", r.exit_time},
        {"exit_kind", to_string(r.exit_kind)},
    };
    j["mc_mean"] = r.mc_mean ? nlohmann::json(*r.mc_mean) : nlohmann::json(nullptr);
    j["mc_halfwidth"] = r.mc_halfwidth ? nlohmann::json(*r.mc_halfwidth) : nlohmann::json(nullptr);
    return j;
}

StrategyClassification classify(const TradingProblem& problem, const std::string& method)
{
    if (method == "convex" || (method == "auto" && !problem.utility.is_linear())) return classify_convex(problem);
    if (method == "gbm") return classify_gbm_polynomial(problem);
    if (method == "linear" || method == "auto") return classify_linear(problem);
    throw ConfigError("method must be auto, linear, gbm or convex (got '" + method + "')");
}

Strategy parse_strategy(const std::string& spec, const TradingProblem& problem, const ScenarioConfig& cfg)
{
    if (spec == "classify") return classify(problem, cfg.method == "parity" ? "auto" : cfg.method).strategy;
    if (spec == "hjb") return extract_feedback(solve_hjb(problem, parse_variant(cfg.variant), hjb_options(cfg)));
    if (spec.rfind("const:", 0) == 0) return Strategy::constant(numbers(spec.substr(6), "strategy")[0], problem.nu_bar);
    if (spec.rfind("piecewise:", 0) == 0) {
        const std::string body = spec.substr(10);
        const auto slash = body.find('/');
        if (slash == std::string::npos) throw ConfigError("strategy: piecewise needs 'times/levels'");
        return Strategy::piecewise(numbers(body.substr(0, slash), "strategy"), numbers(body.substr(slash + 1), "strategy"),
                                   problem.nu_bar, problem.horizon());
    }
    throw ConfigError("strategy must be classify, hjb, const:L or piecewise:t1,.../l0,... (got '" + spec + "')");
}

BankPolicy parse_bank(const std::string& spec)
{
    if (spec == "zero") return BankPolicy::zero();
    if (spec.rfind("linear:", 0) == 0) {
        const double c = numbers(spec.substr(7), "bank")[0];
        BankPolicy b;
        b.b = [c](double t) { return c * t; };
        b.db = [c](double) { return c; };
        return b;
    }
    if (spec.rfind("step:", 0) == 0) {
        const auto v = numbers(spec.substr(5), "bank");
        if (v.size() != 2) throw ConfigError("bank: step needs t,a");
        const double at = v[0];
        const double size = v[1];
        BankPolicy b;
        b.b = [at, size](double t) { return t >= at ? size : 0.0; };
        b.jumps = {{at, size}};
        return b;
    }
    throw ConfigError("bank must be zero, linear:c or step:t,a (got '" + spec + "')");
}

int run(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        if (cfg.command == "figures") {
            emit(reproduce_figures(cfg.out.value_or("figures")), cfg, out);
        } else {
            emit(run_command(cfg), cfg, out);
        }
        return 0;
    } catch (const ConditionUnverified& e) {
        out << nlohmann::json{{"error", e.kind()}, {"message", e.what()}, {"failing_time", e.failing_time()}}.dump(2)
            << '\n';
        err << e.kind() << ": " << e.what() << '\n';
        return 2;
    } catch (const Refusal& e) {
        out << nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump(2) << '\n';
        err << e.kind() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace stakeopt::cli
