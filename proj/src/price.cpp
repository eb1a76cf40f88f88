#include "stakeopt/price.hpp"

#include "stakeopt/errors.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

namespace stakeopt {

PriceModel PriceModel::constant(double p0)
{
    if (!(p0 >= 0.0) || !std::isfinite(p0)) {
        throw DomainError("constant price: P0 must be non-negative");
    }
    return PriceModel(Constant{p0});
}

PriceModel PriceModel::gbm(double p0, double mu, double sigma)
{
    if (!(p0 > 0.0)) throw DomainError("gbm price: P0 must be positive");
    if (!(sigma >= 0.0)) throw DomainError("gbm price: sigma must be non-negative");
    if (!std::isfinite(mu)) throw DomainError("gbm price: mu must be finite");
    return PriceModel(Gbm{p0, mu, sigma});
}

PriceModel PriceModel::tabulated(std::vector<std::pair<double, double>> knots, double beta)
{
    std::vector<double> t;
    std::vector<double> p;
    for (const auto& [ti, pi] : knots) {
        if (!(pi > 0.0)) throw ConfigError("tabulated price: P~ must be positive");
        t.push_back(ti);
        p.push_back(pi);
    }
    if (t.empty() || t.front() != 0.0) throw ConfigError("tabulated price: first knot must be at t = 0");
    return PriceModel(TabulatedDiscounted{beta, numerics::MonotoneCubic(std::move(t), std::move(p))});
}

const PriceModel::Gbm& PriceModel::as_gbm() const
{
    if (const auto* g = std::get_if<Gbm>(&model_)) return *g;
    throw ConfigError("price model is not GBM");
}

double PriceModel::initial_price() const { return discounted_mean(0.0, 0.0); }

double PriceModel::discounted_mean(double beta, double t) const
{
    if (t < 0.0) throw DomainError("discounted_mean_price: negative time");
    struct Visitor {
        double beta;
        double t;
        double operator()(const Constant& c) const { return c.p0; }
        double operator()(const Gbm& g) const { return g.p0 * std::exp(-(beta - g.mu) * t); }
        double operator()(const TabulatedDiscounted& tab) const
        {
            if (t > 0.0 && std::abs(tab.beta - beta) > 1e-12 * std::max(1.0, std::abs(beta))) {
                throw ConfigError("tabulated price curve was discounted at beta = " + std::to_string(tab.beta) +
                                  ", queried with beta = " + std::to_string(beta));
            }
            if (t > tab.curve.knots().back() * (1 + 1e-12)) {
                throw DomainError("tabulated price: t beyond last knot");
            }
            return tab.curve(t);
        }
    };
    return std::visit(Visitor{beta, t}, model_);
}

PriceModel::Shape PriceModel::shape(double beta, double horizon) const
{
    if (std::holds_alternative<Constant>(model_)) return Shape::Constant;
    if (const auto* g = std::get_if<Gbm>(&model_)) {
        if (beta == g->mu) return Shape::Constant;
        return beta < g->mu ? Shape::Increasing : Shape::Decreasing;
    }
    const auto& tab = std::get<TabulatedDiscounted>(model_);
    const auto& v = tab.curve.values();
    const auto& k = tab.curve.knots();
    bool up = false;
    bool down = false;
    for (std::size_t i = 1; i < v.size() && k[i - 1] < horizon; ++i) {
        if (v[i] > v[i - 1]) up = true;
        if (v[i] < v[i - 1]) down = true;
    }
    if (up && down) return Shape::NonMonotone;
    if (up) return Shape::Increasing;
    if (down) return Shape::Decreasing;
    return Shape::Constant;
}

const char* to_string(PriceModel::Shape shape)
{
    switch (shape) {
    case PriceModel::Shape::Constant: return "constant";
    case PriceModel::Shape::Increasing: return "increasing";
    case PriceModel::Shape::Decreasing: return "decreasing";
    case PriceModel::Shape::NonMonotone: return "non-monotone";
    }
    return "unknown";
}

double discounted_mean_price(const PriceModel& model, double beta, double t)
{
    if (beta < 0.0) throw DomainError("discounted_mean_price: beta must be non-negative");
    return model.discounted_mean(beta, t);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer over the (seed, stream) pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> sample_price_path(const PriceModel& model, std::uint64_t seed, std::span<const double> grid,
                                      std::uint64_t stream)
{
    const auto& g = model.as_gbm();
    if (g.sigma < 0.0) throw DomainError("sample_price_path: sigma must be non-negative");
    if (grid.empty() || grid.front() != 0.0) throw DomainError("sample_price_path: grid must start at 0");
    std::mt19937_64 rng(substream_seed(seed, stream));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> path(grid.size());
    double log_p = std::log(g.p0);
    path[0] = g.p0;
    const double drift = g.mu - 0.5 * g.sigma * g.sigma;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dt = grid[i] - grid[i - 1];
        if (!(dt > 0.0)) throw DomainError("sample_price_path: grid must be strictly increasing");
        log_p += drift * dt + g.sigma * std::sqrt(dt) * normal(rng);
        path[i] = std::exp(log_p);
    }
    return path;
}

double lipschitz_estimate(const PriceModel& model, double beta, std::span<const double> grid)
{
    double best = 0.0;
    if (grid.size() < 2) return best;
    double prev = model.discounted_mean(beta, grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = model.discounted_mean(beta, grid[i]);
        best = std::max(best, std::abs(cur - prev) / (grid[i] - grid[i - 1]));
        prev = cur;
    }
    return best;
}

PriceModel load_discounted_price_csv(const std::filesystem::path& path, double beta)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open price file " + path.string());
    std::string line;
    int line_no = 0;
    bool header = false;
    std::vector<std::pair<double, double>> knots;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body;
        for (char c : line) {
            if (c != ' ' && c != '\t' && c != '\r') body += c;
        }
        if (body.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        if (!header) {
            if (body != "t,p_tilde") throw ConfigError(where + "expected header `t,p_tilde`");
            header = true;
            continue;
        }
        const auto comma = body.find(',');
        if (comma == std::string::npos) throw ConfigError(where + "expected two comma-separated values");
        try {
            const double t = std::stod(body.substr(0, comma));
            const double p = std::stod(body.substr(comma + 1));
            if (!knots.empty() && !(t > knots.back().first)) throw ConfigError(where + "t must be strictly increasing");
            if (!(p > 0.0)) throw ConfigError(where + "p_tilde must be positive");
            knots.emplace_back(t, p);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(where + "malformed number");
        }
    }
    return PriceModel::tabulated(std::move(knots), beta);
}

}  // namespace stakeopt
