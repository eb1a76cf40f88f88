#include "cli/commands.hpp"
#include "cli/config.hpp"

#include "stakeopt/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using stakeopt::cli::ScenarioConfig;

/// Command-line values; each one set overrides the config file.
struct Overrides {
    std::string config;
    std::optional<std::string> schedule, price, utility, penalty, method, variant, strategy, bank;
    std::optional<double> horizon, beta, r, nu_bar, x, step;
    std::optional<std::size_t> nt, ny, paths;
    std::optional<int> m, levels;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, save_grid, grid_csv, trajectory_csv;
};

void add_options(CLI::App& sub, Overrides& o)
{
    sub.add_option("--config", o.config, "YAML scenario file");
    sub.add_option("--schedule", o.schedule, "poly:alpha,N | file:PATH");
    sub.add_option("--horizon", o.horizon, "T");
    sub.add_option("--beta", o.beta, "discount rate");
    sub.add_option("--r", o.r, "risk-free rate");
    sub.add_option("--nu-bar", o.nu_bar, "trading capacity");
    sub.add_option("--x", o.x, "initial stake");
    sub.add_option("--price", o.price, "gbm:P0,mu,sigma | const:P0 | file:PATH");
    sub.add_option("--utility", o.utility, "linear:l,h | power:p,lcoef,hcoef");
    sub.add_option("--penalty", o.penalty, "quad:g,q,delta,K");
    sub.add_option("--method", o.method, "auto | linear | gbm | convex | parity");
    sub.add_option("--variant", o.variant, "hoarding | trading | risk");
    sub.add_option("--strategy", o.strategy, "classify | hjb | const:L | piecewise:t1,../l0,..");
    sub.add_option("--bank", o.bank, "zero | linear:c | step:t,a");
    sub.add_option("--nt", o.nt, "HJB time nodes");
    sub.add_option("--ny", o.ny, "HJB share nodes");
    sub.add_option("--step", o.step, "simulation step");
    sub.add_option("--m", o.m, "brute-force intervals");
    sub.add_option("--levels", o.levels, "brute-force levels (3, 5 or 9)");
    sub.add_option("--paths", o.paths, "Monte Carlo paths");
    sub.add_option("--seed", o.seed, "seed for stochastic paths");
    sub.add_option("--out", o.out, "JSON report path (output directory for figures)");
    sub.add_option("--save-grid", o.save_grid, "binary HJB grid dump");
    sub.add_option("--grid-csv", o.grid_csv, "HJB grid as t,y,w CSV");
    sub.add_option("--trajectory-csv", o.trajectory_csv, "trajectory as t,X,N,share CSV");
}

template <class T, class U>
void apply(const std::optional<T>& value, U& target)
{
    if (value) target = *value;
}

ScenarioConfig merge(const Overrides& o, const std::string& command)
{
    ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : stakeopt::cli::load_config(o.config);
    cfg.command = command;
    apply(o.schedule, cfg.schedule);
    apply(o.price, cfg.price);
    apply(o.utility, cfg.utility);
    apply(o.penalty, cfg.penalty);
    apply(o.method, cfg.method);
    apply(o.variant, cfg.variant);
    apply(o.strategy, cfg.strategy);
    apply(o.bank, cfg.bank);
    apply(o.horizon, cfg.horizon);
    apply(o.beta, cfg.beta);
    apply(o.r, cfg.r);
    apply(o.nu_bar, cfg.nu_bar);
    apply(o.x, cfg.x);
    apply(o.step, cfg.step);
    apply(o.nt, cfg.nt);
    apply(o.ny, cfg.ny);
    apply(o.paths, cfg.paths);
    apply(o.m, cfg.m);
    apply(o.levels, cfg.levels);
    apply(o.seed, cfg.seed);
    apply(o.out, cfg.out);
    apply(o.save_grid, cfg.save_grid);
    apply(o.grid_csv, cfg.grid_csv);
    apply(o.trajectory_csv, cfg.trajectory_csv);
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal stake trading under proof-of-stake rewards"};
    app.require_subcommand(1);
    Overrides o;
    const std::pair<const char*, const char*> commands[] = {
        {"hoard", "full-capacity buying with zero price"},
        {"classify", "closed-form bang-bang classification"},
        {"parity", "stake-parity risk control"},
        {"phase", "long-horizon monopoly phase"},
        {"hjb", "finite-difference value function"},
        {"evaluate", "objective of a given strategy"},
        {"oracle", "brute-force strategy search"},
        {"figures", "data behind the figure analogues"},
    };
    for (const auto& [name, help] : commands) add_options(*app.add_subcommand(name, help), o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    ScenarioConfig cfg;
    try {
        cfg = merge(o, command);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return stakeopt::cli::run(cfg, std::cout, std::cerr);
}
