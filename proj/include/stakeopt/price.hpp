#pragma once

#include "stakeopt/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace stakeopt {

/// Price model for one stake, reduced to what trading decisions need:
/// the discounted mean price P~(t) = e^{-beta t} E P(t).
class PriceModel {
public:
    /// The discounted curve itself is constant (the martingale case).
    /// A zero level is accepted and reproduces the degenerate hoarding problem.
    struct Constant {
        double p0;
    };
    /// dP/P = mu dt + sigma dB.
    struct Gbm {
        double p0;
        double mu;
        double sigma;
    };
    /// Knots of P~ itself, computed for a specific discount rate.
    struct TabulatedDiscounted {
        double beta;
        numerics::MonotoneCubic curve;
    };

    enum class Shape { Constant, Increasing, Decreasing, NonMonotone };

    static PriceModel constant(double p0);
    static PriceModel gbm(double p0, double mu, double sigma);
    static PriceModel tabulated(std::vector<std::pair<double, double>> knots, double beta);

    const auto& variant() const { return model_; }
    bool is_gbm() const { return std::holds_alternative<Gbm>(model_); }
    const Gbm& as_gbm() const;
    double initial_price() const;

    /// P~(t) for discount rate beta.
    double discounted_mean(double beta, double t) const;
    /// Monotonicity of P~ on [0, horizon] for discount rate beta.
    Shape shape(double beta, double horizon) const;

private:
    explicit PriceModel(std::variant<Constant, Gbm, TabulatedDiscounted> m) : model_(std::move(m)) {}
    std::variant<Constant, Gbm, TabulatedDiscounted> model_;
};

const char* to_string(PriceModel::Shape shape);

double discounted_mean_price(const PriceModel& model, double beta, double t);

/// Exact log-normal sampling of a GBM path on an increasing grid starting at 0.
/// Deterministic for a given (seed, stream) pair.
std::vector<double> sample_price_path(const PriceModel& model, std::uint64_t seed, std::span<const double> grid,
                                      std::uint64_t stream = 0);

/// Largest finite-difference slope of P~ between consecutive grid points.
double lipschitz_estimate(const PriceModel& model, double beta, std::span<const double> grid);

/// Reads a `t,p_tilde` CSV whose curve was discounted at rate beta.
PriceModel load_discounted_price_csv(const std::filesystem::path& path, double beta);

/// Seed for an independent substream, so path i never depends on scheduling.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace stakeopt
