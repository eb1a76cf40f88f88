#include "commands.hpp"

#include "stakeopt/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace stakeopt::cli {

namespace {

constexpr int kCurvePoints = 201;

std::ofstream open_csv(const std::filesystem::path& path, const char* header)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << header << '\n';
    return out;
}

TradingProblem linear_problem(double alpha, double n0, double horizon, double x, double nu_bar, double l, double h,
                              PriceModel price)
{
    return TradingProblem{
        .schedule = RewardSchedule::polynomial(alpha, n0, horizon),
        .utility = UtilitySpec::linear(l, h),
        .price = std::move(price),
        .beta = 0.1,
        .r = 0.0,
        .nu_bar = nu_bar,
        .x = x,
        .penalty = std::nullopt,
    };
}

nlohmann::json params(const TradingProblem& p)
{
    nlohmann::json j = {{"initial_supply", p.initial_supply()}, {"horizon", p.horizon()}, {"beta", p.beta},
                        {"nu_bar", p.nu_bar},                   {"x", p.x}};
    if (p.schedule.kind() == RewardSchedule::Kind::Polynomial) j["alpha"] = p.schedule.alpha();
    return j;
}

/// Hoarding trajectories: one that reaches the horizon, one that ends in monopoly.
nlohmann::json figure1(const std::filesystem::path& dir)
{
    auto traj_out = open_csv(dir / "fig1_hoarding.csv", "scenario,t,X,N,share");
    auto marks = open_csv(dir / "fig1_markers.csv", "scenario,event,t,X");
    nlohmann::json scenarios = nlohmann::json::array();
    const std::pair<const char*, double> cases[] = {{"concentration", 1.0}, {"monopoly", 5.0}};
    for (const auto& [name, nu_bar] : cases) {
        const auto p = linear_problem(1.0, 100.0, 10.0, 60.0, nu_bar, 0.001, 1.0, PriceModel::constant(0.0));
        const auto sol = solve_hoarding(p);
        const auto traj = simulate(p, Strategy::constant(nu_bar, nu_bar), default_step(p.schedule));
        for (std::size_t i = 0; i < traj.times.size(); i += 16) {
            const double n = p.schedule.supply(traj.times[i]);
            traj_out << name << ',' << traj.times[i] << ',' << traj.states[i] << ',' << n << ','
                     << traj.states[i] / n << '\n';
        }
        if (traj.exit_kind == ExitKind::Monopoly) {
            marks << name << ",monopoly," << traj.exit_time << ',' << traj.states[traj.exit_index()] << '\n';
        }
        auto j = params(p);
        j["scenario"] = name;
        j["tag"] = to_string(sol.tag);
        j["exit_time"] = sol.exit_time;
        scenarios.push_back(j);
    }
    return {{"files", {"fig1_hoarding.csv", "fig1_markers.csv"}},
            {"caption", "hoarding: concentration and monopoly"},
            {"scenarios", scenarios}};
}

/// Psi against a constant (left) and an increasing (right) discounted price.
nlohmann::json figure2(const std::filesystem::path& dir)
{
    nlohmann::json scenarios = nlohmann::json::array();
    const std::pair<const char*, PriceModel> cases[] = {{"fig2_constant.csv", PriceModel::constant(0.42)},
                                                        {"fig2_increasing.csv", PriceModel::gbm(0.3, 0.12, 0.2)}};
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [file, price] : cases) {
        const auto p = linear_problem(1.0, 100.0, 10.0, 50.0, 1.0, 0.01, 1.0, price);
        const auto c = classify_linear(p);
        auto out = open_csv(dir / file, "t,psi,p_tilde,marker");
        for (int k = 0; k < kCurvePoints; ++k) {
            const double t = p.horizon() * k / (kCurvePoints - 1);
            out << t << ',' << psi(p, t) << ',' << p.discounted_price(t) << ",0\n";
        }
        for (double t : c.switch_times) out << t << ',' << psi(p, t) << ',' << p.discounted_price(t) << ",1\n";
        auto j = params(p);
        j["file"] = file;
        j["tag"] = to_string(c.tag);
        j["switch_times"] = c.switch_times;
        scenarios.push_back(j);
        files.push_back(file);
    }
    return {{"files", files}, {"caption", "linear utilities, constant and increasing discounted price"},
            {"scenarios", scenarios}};
}

/// GBM with beta > mu: Psi against P(0) e^{(mu - beta) t} for a sweep of P(0).
nlohmann::json figure3(const std::filesystem::path& dir)
{
    auto out = open_csv(dir / "fig3_gbm.csv", "p0,t,psi,p_tilde,marker");
    nlohmann::json scenarios = nlohmann::json::array();
    for (double p0 : {0.3, 0.5, 0.8, 1.2}) {
        TradingProblem p = linear_problem(1.0, 1e4, 10.0, 5000.0, 1.0, 0.1, 1.0, PriceModel::gbm(p0, 0.05, 0.2));
        const auto c = classify_linear(p);
        for (int k = 0; k < kCurvePoints; ++k) {
            const double t = p.horizon() * k / (kCurvePoints - 1);
            out << p0 << ',' << t << ',' << psi(p, t) << ',' << p.discounted_price(t) << ",0\n";
        }
        for (double t : c.switch_times) {
            out << p0 << ',' << t << ',' << psi(p, t) << ',' << p.discounted_price(t) << ",1\n";
        }
        auto j = params(p);
        j["p0"] = p0;
        j["tag"] = to_string(c.tag);
        j["switch_times"] = c.switch_times;
        scenarios.push_back(j);
    }
    return {{"files", {"fig3_gbm.csv"}}, {"caption", "linear utilities, GBM price, polynomial schedule"},
            {"scenarios", scenarios}};
}

/// Convex utilities: the two orderings of Psi^+_+(T) and Psi^-(0, x).
nlohmann::json figure4(const std::filesystem::path& dir)
{
    struct Case {
        const char* file;
        double x;
        double price;
    };
    const Case cases[] = {{"fig4_left.csv", 50.0, 0.3}, {"fig4_right.csv", 50.0, 0.8}};
    nlohmann::json scenarios = nlohmann::json::array();
    nlohmann::json files = nlohmann::json::array();
    for (const auto& c : cases) {
        TradingProblem p{
            .schedule = RewardSchedule::polynomial(1.0, 100.0, 10.0),
            .utility = UtilitySpec::power(2.0, 1e-3, 1e-3),
            .price = PriceModel::constant(c.price),
            .beta = 0.1,
            .r = 0.0,
            .nu_bar = 1.0,
            .x = c.x,
            .penalty = std::nullopt,
        };
        const TwoPhase pp = parse_pattern("++");
        const TwoPhase mm = parse_pattern("--");
        const TwoPhase mp = parse_pattern("-+");
        auto out = open_csv(dir / c.file, "t,psi_pp,psi_mm,psi_mp,p_tilde");
        for (int k = 0; k < kCurvePoints; ++k) {
            const double t = p.horizon() * k / (kCurvePoints - 1);
            out << t << ',' << psi_two_phase(p, t, pp) << ',' << psi_two_phase(p, t, mm) << ','
                << psi_two_phase(p, t, mp) << ',' << p.discounted_price(t) << '\n';
        }
        auto j = params(p);
        j["file"] = c.file;
        j["psi_pp_T"] = psi_two_phase(p, p.horizon(), pp);
        j["psi_minus_0"] = psi_branch(p, 0.0, p.x, Direction::Sell);
        const auto cls = classify_convex(p);
        j["tag"] = to_string(cls.tag);
        j["switch_times"] = cls.switch_times;
        files.push_back(c.file);
        scenarios.push_back(j);
    }
    return {{"files", files}, {"caption", "convex utilities, constant discounted price"}, {"scenarios", scenarios}};
}

}  // namespace

nlohmann::json reproduce_figures(const std::filesystem::path& outdir)
{
    std::filesystem::create_directories(outdir);
    nlohmann::json manifest = {
        {"fig1", figure1(outdir)},
        {"fig2", figure2(outdir)},
        {"fig3", figure3(outdir)},
        {"fig4", figure4(outdir)},
    };
    std::ofstream out(outdir / "manifest.json");
    if (!out) throw Error("cannot write manifest in " + outdir.string());
    out << manifest.dump(2) << '\n';
    return manifest;
}

}  // namespace stakeopt::cli
