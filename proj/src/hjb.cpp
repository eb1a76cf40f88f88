#include "stakeopt/hjb.hpp"

#include "stakeopt/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <variant>

namespace stakeopt {

static_assert(std::endian::native == std::endian::little, "grid dumps assume a little-endian host");

const char* to_string(HjbVariant v)
{
    switch (v) {
    case HjbVariant::Hoarding: return "Hoarding";
    case HjbVariant::Trading: return "Trading";
    case HjbVariant::RiskControl: return "RiskControl";
    }
    return "unknown";
}

namespace {

struct Terms {
    const TradingProblem& p;
    HjbVariant variant;

    double price(double t) const { return variant == HjbVariant::Hoarding ? 0.0 : p.discounted_price(t); }

    double running(double t, double y) const
    {
        const double n = p.schedule.supply(t);
        double v = std::exp(-p.beta * t) * p.utility.running.value(y * n);
        if (variant == HjbVariant::RiskControl) {
            const auto& pen = *p.penalty;
            v -= std::exp(-pen.delta * t) * pen.g.value(y * n - n / pen.participants);
        }
        return v;
    }

    double terminal(double y) const
    {
        const double horizon = p.horizon();
        const double n = p.schedule.supply(horizon);
        double v = std::exp(-p.beta * horizon) * p.utility.terminal.value(y * n);
        if (variant == HjbVariant::RiskControl) {
            const auto& pen = *p.penalty;
            v -= std::exp(-pen.delta * horizon) * pen.q.value(y * n - n / pen.participants);
        }
        return v;
    }

    // Absorbed at an edge: the terminal utility of the edge stake, plus the q penalty
    // for the risk-control problem.
    double edge(double t, double y) const
    {
        const double n = p.schedule.supply(t);
        double v = std::exp(-p.beta * t) * p.utility.terminal.value(y * n);
        if (variant == HjbVariant::RiskControl) {
            const auto& pen = *p.penalty;
            v -= std::exp(-pen.delta * t) * pen.q.value(y * n - n / pen.participants);
        }
        return v;
    }
};

void check_finite(double v, double t, double y)
{
    if (!std::isfinite(v)) {
        throw NumericError("HJB grid value is not finite at y = " + std::to_string(y), t);
    }
}

}  // namespace

ValueGrid solve_hjb(const TradingProblem& problem, HjbVariant variant, const HjbOptions& opts)
{
    if (opts.nt < 16 || opts.ny < 16) throw ConfigError("HJB grid needs at least 16 nodes in t and y");
    if (variant == HjbVariant::RiskControl && !problem.penalty) {
        throw ConfigError("risk-control HJB requires a penalty");
    }
    if (std::holds_alternative<PriceModel::TabulatedDiscounted>(problem.price.variant())) {
        std::vector<double> probe(4097);
        for (std::size_t k = 0; k < probe.size(); ++k) probe[k] = problem.horizon() * k / (probe.size() - 1);
        if (!std::isfinite(lipschitz_estimate(problem.price, problem.beta, probe))) {
            throw ConfigError("tabulated discounted price is not Lipschitz on [0, T]");
        }
    }

    const double horizon = problem.horizon();
    const std::size_t ny = opts.ny;
    const double dy = 1.0 / static_cast<double>(ny - 1);
    // N is non-decreasing, so N(0) is the smallest supply on the grid.
    const double speed = problem.nu_bar / problem.initial_supply();
    std::size_t nt = opts.nt;
    const double needed = std::ceil(horizon * speed / (opts.max_cfl * dy));
    if (needed + 1 > static_cast<double>(nt)) {
        if ((needed + 1) * static_cast<double>(ny) > static_cast<double>(opts.max_cells)) {
            throw NumericError("CFL refinement needs " + std::to_string(needed + 1) + " time nodes, over budget", 0.0);
        }
        nt = static_cast<std::size_t>(needed) + 1;
    }
    const double dt = horizon / static_cast<double>(nt - 1);

    ValueGrid g{
        .nt = nt,
        .ny = ny,
        .times = std::vector<double>(nt),
        .shares = std::vector<double>(ny),
        .values = std::vector<double>(nt * ny),
        .variant = variant,
        .problem = problem,
        .cfl = dt * speed / dy,
    };
    for (std::size_t i = 0; i < nt; ++i) g.times[i] = i + 1 == nt ? horizon : horizon * i / (nt - 1);
    for (std::size_t j = 0; j < ny; ++j) g.shares[j] = j + 1 == ny ? 1.0 : static_cast<double>(j) / (ny - 1);

    const Terms terms{g.problem, variant};
    double* last = &g.values[(nt - 1) * ny];
    for (std::size_t j = 0; j < ny; ++j) last[j] = terms.terminal(g.shares[j]);

    std::vector<double> run_next(ny);
    std::vector<double> run_cur(ny);
    for (std::size_t j = 0; j < ny; ++j) run_next[j] = terms.running(horizon, g.shares[j]);

    for (std::size_t i = nt - 1; i-- > 0;) {
        const double t = g.times[i];
        const double t_next = g.times[i + 1];
        const double n_next = g.problem.schedule.supply(t_next);
        const double price = terms.price(t_next);
        const double* next = &g.values[(i + 1) * ny];
        double* cur = &g.values[i * ny];
        for (std::size_t j = 0; j < ny; ++j) run_cur[j] = terms.running(t, g.shares[j]);

        cur[0] = terms.edge(t, 0.0);
        cur[ny - 1] = terms.edge(t, 1.0);
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const double up = (next[j + 1] - next[j]) / (dy * n_next) - price;
            const double down = (next[j] - next[j - 1]) / (dy * n_next) - price;
            const double hamiltonian = std::max({problem.nu_bar * up, -problem.nu_bar * down, 0.0});
            cur[j] = next[j] + dt * (0.5 * (run_cur[j] + run_next[j]) + hamiltonian);
            check_finite(cur[j], t, g.shares[j]);
        }
        std::swap(run_cur, run_next);
    }
    return g;
}

namespace {

/// Locates t in the uniform time grid: index i with t in [t_i, t_{i+1}] and the weight of t_{i+1}.
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double v)
{
    const std::size_t n = nodes.size();
    const double span = nodes.back() - nodes.front();
    double pos = (v - nodes.front()) / span * static_cast<double>(n - 1);
    std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 2)));
    // Guard against rounding placing v just outside the cell.
    if (v < nodes[i] && i > 0) --i;
    if (v > nodes[i + 1] && i + 2 < n) ++i;
    const double w = std::clamp((v - nodes[i]) / (nodes[i + 1] - nodes[i]), 0.0, 1.0);
    return {i, w};
}

}  // namespace

double value_at(const ValueGrid& grid, double t, double x)
{
    const double horizon = grid.times.back();
    if (t < 0.0 || t > horizon) throw DomainError("value_at: t outside [0, T]");
    const double n = grid.problem.schedule.supply(t);
    if (x < 0.0 || x > n) throw DomainError("value_at: x outside [0, N(t)]");
    const auto [i, wt] = locate(grid.times, t);
    const auto [j, wy] = locate(grid.shares, x / n);
    auto row = [&](std::size_t r) { return (1.0 - wy) * grid.at(r, j) + wy * grid.at(r, j + 1); };
    if (wt == 0.0) return row(i);
    if (wt == 1.0) return row(i + 1);
    return (1.0 - wt) * row(i) + wt * row(i + 1);
}

Strategy extract_feedback(const ValueGrid& grid)
{
    auto held = std::make_shared<const ValueGrid>(grid);
    auto rule = [held](double t, double x) {
        const ValueGrid& grid = *held;
        const auto& p = grid.problem;
        const double horizon = grid.times.back();
        const double tc = std::clamp(t, 0.0, horizon);
        const auto [i, wt] = locate(grid.times, tc);
        // The control on [t_i, t_{i+1}) comes from the later slice used to step into it.
        const std::size_t row = std::min(i + 1, grid.nt - 1);
        const double n = p.schedule.supply(tc);
        const double y = std::clamp(x / n, 0.0, 1.0);
        const double dy = grid.shares[1] - grid.shares[0];
        const std::size_t j = std::min(static_cast<std::size_t>(std::lround(y / dy)), grid.ny - 1);
        double slope;
        if (j == 0) {
            slope = (grid.at(row, 1) - grid.at(row, 0)) / dy;
        } else if (j + 1 == grid.ny) {
            slope = (grid.at(row, j) - grid.at(row, j - 1)) / dy;
        } else {
            slope = (grid.at(row, j + 1) - grid.at(row, j - 1)) / (2.0 * dy);
        }
        const double price = grid.variant == HjbVariant::Hoarding ? 0.0 : p.discounted_price(tc);
        const double diff = slope / n - price;
        const double scale = std::max({1.0, std::abs(price), std::abs(slope / n)});
        if (std::abs(diff) < 1e-12 * scale) return p.nu_bar;
        return diff > 0.0 ? p.nu_bar : -p.nu_bar;
    };
    return Strategy::feedback(rule, grid.problem.nu_bar);
}

void write_grid_csv(const ValueGrid& grid, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << "t,y,w\n";
    for (std::size_t i = 0; i < grid.nt; ++i) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            out << grid.times[i] << ',' << grid.shares[j] << ',' << grid.at(i, j) << '\n';
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

void write_grid_binary(const ValueGrid& grid, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const std::uint64_t header[2] = {grid.nt, grid.ny};
    const double horizon = grid.times.back();
    const auto variant = static_cast<std::uint64_t>(grid.variant);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(&horizon), sizeof horizon);
    out.write(reinterpret_cast<const char*>(&variant), sizeof variant);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) throw Error("failed writing " + path.string());
}

GridDump read_grid_binary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    GridDump d;
    std::uint64_t variant = 0;
    in.read(reinterpret_cast<char*>(&d.nt), sizeof d.nt);
    in.read(reinterpret_cast<char*>(&d.ny), sizeof d.ny);
    in.read(reinterpret_cast<char*>(&d.horizon), sizeof d.horizon);
    in.read(reinterpret_cast<char*>(&variant), sizeof variant);
    if (!in || variant > 2) throw Error("bad grid header in " + path.string());
    d.variant = static_cast<HjbVariant>(variant);
    d.values.resize(d.nt * d.ny);
    in.read(reinterpret_cast<char*>(d.values.data()), static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!in) throw Error("truncated grid in " + path.string());
    return d;
}

}  // namespace stakeopt
