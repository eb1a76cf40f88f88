#pragma once

#include "stakeopt/reward.hpp"

#include <functional>
#include <optional>
#include <string>

namespace stakeopt {

/// One increasing utility function of the stake level, with its derivatives.
class UtilityFunction {
public:
    enum class Kind { Linear, Power, Exponential, Custom };

    /// coef * x
    static UtilityFunction linear(double coef);
    /// coef * x^p, p >= 1
    static UtilityFunction power(double p, double coef = 1.0);
    /// scale * (e^{c x} - 1), c > 0
    static UtilityFunction exponential(double c, double scale = 1.0);
    /// Derivative is required; the second derivative falls back to finite differences.
    static UtilityFunction custom(std::string name, std::function<double(double)> f,
                                  std::function<double(double)> df,
                                  std::function<double(double)> d2f = nullptr);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    /// Slope of a linear function; zero otherwise.
    double linear_coefficient() const { return kind_ == Kind::Linear ? coef_ : 0.0; }
    /// True for the named convex family (linear, power p >= 1, exponential).
    bool known_convex() const { return kind_ != Kind::Custom; }

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

private:
    Kind kind_ = Kind::Linear;
    std::string name_;
    double coef_ = 1.0;
    double param_ = 1.0;
    std::function<double(double)> f_;
    std::function<double(double)> df_;
    std::function<double(double)> d2f_;
};

enum class UtilityRole { Running, Terminal };

/// Running utility l and terminal utility h.
struct UtilitySpec {
    enum class Shape { Linear, Convex, Custom };

    UtilityFunction running = UtilityFunction::linear(1.0);
    UtilityFunction terminal = UtilityFunction::linear(1.0);

    static UtilitySpec linear(double l, double h);
    static UtilitySpec power(double p, double l_coef, double h_coef);

    Shape shape() const;
    bool is_linear() const { return shape() == Shape::Linear; }
    const UtilityFunction& get(UtilityRole role) const { return role == UtilityRole::Running ? running : terminal; }
};

const char* to_string(UtilitySpec::Shape shape);

/// Samples [0, x_max] on `points` points: both functions must be non-decreasing,
/// and convex when the functions are custom but claimed convex via `require_convex`.
/// Throws ConfigError on violation.
void check_regularity(const UtilitySpec& spec, double x_max, bool require_convex = false, int points = 2048);

double eval_utility(const UtilitySpec& spec, UtilityRole role, double x);
double eval_utility_derivative(const UtilitySpec& spec, UtilityRole role, double x);

struct HoardingCheck {
    bool holds = true;
    std::optional<double> fails_at;
    /// min over the grid of  beta h(N) - (h o N)' - l(N); negative means violated.
    double worst_margin = 0.0;
};

/// Checks (h o N)'(t) + l(N(t)) <= beta h(N(t)) on a uniform grid over [0, T].
HoardingCheck validate_hoarding_condition(const UtilitySpec& spec, const RewardSchedule& sched, double beta,
                                          int points = 2048);

/// Symmetric penalty of the deviation from parity.
class PenaltyFunction {
public:
    enum class Kind { Quadratic, AbsPower, Custom };

    /// coef * d^2
    static PenaltyFunction quadratic(double coef);
    /// coef * |d|^p, p >= 1
    static PenaltyFunction abs_power(double p, double coef = 1.0);
    static PenaltyFunction custom(std::string name, std::function<double(double)> f);

    Kind kind() const { return kind_; }
    double value(double deviation) const;
    bool is_zero() const { return kind_ != Kind::Custom && coef_ == 0.0; }

private:
    Kind kind_ = Kind::Quadratic;
    std::string name_;
    double coef_ = 0.0;
    double p_ = 2.0;
    std::function<double(double)> f_;
};

enum class PenaltyRole { Running, Terminal };

struct PenaltySpec {
    PenaltyFunction g = PenaltyFunction::quadratic(1.0);
    PenaltyFunction q = PenaltyFunction::quadratic(1.0);
    double delta = 0.1;
    int participants = 2;

    static PenaltySpec quadratic(double g, double q, double delta, int participants);

    /// Symmetry, monotonicity on R+ and minimum at 0, sampled on [-d_max, d_max].
    void validate(double d_max) const;
};

double eval_penalty(const PenaltySpec& spec, PenaltyRole role, double deviation);

}  // namespace stakeopt
