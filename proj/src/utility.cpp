#include "stakeopt/utility.hpp"

#include "stakeopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stakeopt {

UtilityFunction UtilityFunction::linear(double coef)
{
    if (!(coef >= 0.0)) throw ConfigError("linear utility: coefficient must be non-negative");
    UtilityFunction u;
    u.kind_ = Kind::Linear;
    u.name_ = "linear";
    u.coef_ = coef;
    return u;
}

UtilityFunction UtilityFunction::power(double p, double coef)
{
    if (!(p >= 1.0)) throw ConfigError("power utility: exponent must be >= 1");
    if (!(coef >= 0.0)) throw ConfigError("power utility: coefficient must be non-negative");
    if (p == 1.0) return linear(coef);
    UtilityFunction u;
    u.kind_ = Kind::Power;
    u.name_ = "power";
    u.coef_ = coef;
    u.param_ = p;
    return u;
}

UtilityFunction UtilityFunction::exponential(double c, double scale)
{
    if (!(c > 0.0)) throw ConfigError("exponential utility: rate must be positive");
    if (!(scale >= 0.0)) throw ConfigError("exponential utility: scale must be non-negative");
    UtilityFunction u;
    u.kind_ = Kind::Exponential;
    u.name_ = "exponential";
    u.coef_ = scale;
    u.param_ = c;
    return u;
}

UtilityFunction UtilityFunction::custom(std::string name, std::function<double(double)> f,
                                        std::function<double(double)> df, std::function<double(double)> d2f)
{
    if (!f || !df) throw ConfigError("custom utility: value and derivative are required");
    UtilityFunction u;
    u.kind_ = Kind::Custom;
    u.name_ = std::move(name);
    u.f_ = std::move(f);
    u.df_ = std::move(df);
    u.d2f_ = std::move(d2f);
    return u;
}

double UtilityFunction::value(double x) const
{
    if (x < 0.0) throw DomainError("utility evaluated at negative stake level");
    switch (kind_) {
    case Kind::Linear: return coef_ * x;
    case Kind::Power: return coef_ * std::pow(x, param_);
    case Kind::Exponential: return coef_ * std::expm1(param_ * x);
    case Kind::Custom: return f_(x);
    }
    return 0.0;
}

double UtilityFunction::derivative(double x) const
{
    if (x < 0.0) throw DomainError("utility derivative evaluated at negative stake level");
    switch (kind_) {
    case Kind::Linear: return coef_;
    case Kind::Power: return coef_ * param_ * std::pow(x, param_ - 1.0);
    case Kind::Exponential: return coef_ * param_ * std::exp(param_ * x);
    case Kind::Custom: return df_(x);
    }
    return 0.0;
}

double UtilityFunction::second_derivative(double x) const
{
    if (x < 0.0) throw DomainError("utility second derivative evaluated at negative stake level");
    switch (kind_) {
    case Kind::Linear: return 0.0;
    case Kind::Power: return coef_ * param_ * (param_ - 1.0) * std::pow(x, param_ - 2.0);
    case Kind::Exponential: return coef_ * param_ * param_ * std::exp(param_ * x);
    case Kind::Custom:
        if (d2f_) return d2f_(x);
        {
            const double h = 1e-5 * std::max(1.0, x);
            const double lo = std::max(0.0, x - h);
            return (df_(x + h) - df_(lo)) / (x + h - lo);
        }
    }
    return 0.0;
}

UtilitySpec UtilitySpec::linear(double l, double h)
{
    return UtilitySpec{UtilityFunction::linear(l), UtilityFunction::linear(h)};
}

UtilitySpec UtilitySpec::power(double p, double l_coef, double h_coef)
{
    return UtilitySpec{UtilityFunction::power(p, l_coef), UtilityFunction::power(p, h_coef)};
}

UtilitySpec::Shape UtilitySpec::shape() const
{
    using K = UtilityFunction::Kind;
    if (running.kind() == K::Linear && terminal.kind() == K::Linear) return Shape::Linear;
    if (running.known_convex() && terminal.known_convex()) return Shape::Convex;
    return Shape::Custom;
}

const char* to_string(UtilitySpec::Shape shape)
{
    switch (shape) {
    case UtilitySpec::Shape::Linear: return "linear";
    case UtilitySpec::Shape::Convex: return "convex";
    case UtilitySpec::Shape::Custom: return "custom";
    }
    return "unknown";
}

void check_regularity(const UtilitySpec& spec, double x_max, bool require_convex, int points)
{
    if (points < 2) points = 2;
    for (const auto* fn : {&spec.running, &spec.terminal}) {
        double prev = fn->value(0.0);
        for (int i = 1; i < points; ++i) {
            const double x = x_max * i / (points - 1);
            const double v = fn->value(x);
            if (!std::isfinite(v)) throw ConfigError("utility " + fn->name() + " is not finite on [0, N(T)]");
            if (v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
                throw ConfigError("utility " + fn->name() + " is not increasing near x = " + std::to_string(x));
            }
            if (require_convex && fn->second_derivative(x) < -1e-9 * std::max(1.0, std::abs(fn->derivative(x)))) {
                throw ConfigError("utility " + fn->name() + " is not convex near x = " + std::to_string(x));
            }
            prev = v;
        }
    }
}

double eval_utility(const UtilitySpec& spec, UtilityRole role, double x) { return spec.get(role).value(x); }

double eval_utility_derivative(const UtilitySpec& spec, UtilityRole role, double x)
{
    return spec.get(role).derivative(x);
}

HoardingCheck validate_hoarding_condition(const UtilitySpec& spec, const RewardSchedule& sched, double beta,
                                          int points)
{
    HoardingCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    const double horizon = sched.horizon();
    if (points < 2) points = 2;
    for (int i = 0; i < points; ++i) {
        const double t = horizon * i / (points - 1);
        const double n = sched.supply(t);
        const double h = spec.terminal.value(n);
        const double lhs = spec.terminal.derivative(n) * sched.rate(t) + spec.running.value(n);
        const double margin = beta * h - lhs;
        out.worst_margin = std::min(out.worst_margin, margin);
        if (margin < -1e-12 * std::max(1.0, std::abs(beta * h)) && out.holds) {
            out.holds = false;
            out.fails_at = t;
        }
    }
    return out;
}

PenaltyFunction PenaltyFunction::quadratic(double coef)
{
    if (!(coef >= 0.0)) throw ConfigError("quadratic penalty: coefficient must be non-negative");
    PenaltyFunction p;
    p.kind_ = Kind::Quadratic;
    p.name_ = "quadratic";
    p.coef_ = coef;
    return p;
}

PenaltyFunction PenaltyFunction::abs_power(double p, double coef)
{
    if (!(p >= 1.0)) throw ConfigError("power penalty: exponent must be >= 1");
    if (!(coef >= 0.0)) throw ConfigError("power penalty: coefficient must be non-negative");
    PenaltyFunction out;
    out.kind_ = Kind::AbsPower;
    out.name_ = "abs_power";
    out.coef_ = coef;
    out.p_ = p;
    return out;
}

PenaltyFunction PenaltyFunction::custom(std::string name, std::function<double(double)> f)
{
    if (!f) throw ConfigError("custom penalty: function required");
    PenaltyFunction out;
    out.kind_ = Kind::Custom;
    out.name_ = std::move(name);
    out.f_ = std::move(f);
    return out;
}

double PenaltyFunction::value(double d) const
{
    switch (kind_) {
    case Kind::Quadratic: return coef_ * d * d;
    case Kind::AbsPower: return coef_ * std::pow(std::abs(d), p_);
    case Kind::Custom: return f_(d);
    }
    return 0.0;
}

PenaltySpec PenaltySpec::quadratic(double g, double q, double delta, int participants)
{
    PenaltySpec s{PenaltyFunction::quadratic(g), PenaltyFunction::quadratic(q), delta, participants};
    s.validate(1.0);
    return s;
}

void PenaltySpec::validate(double d_max) const
{
    if (!(delta > 0.0)) throw ConfigError("penalty: delta must be positive");
    if (participants < 2) throw ConfigError("penalty: participant count K must be >= 2");
    constexpr int points = 2048;
    for (const auto* fn : {&g, &q}) {
        const double at_zero = fn->value(0.0);
        double prev = at_zero;
        for (int i = 1; i < points; ++i) {
            const double d = d_max * i / (points - 1);
            const double plus = fn->value(d);
            const double minus = fn->value(-d);
            const double scale = std::max(1.0, std::abs(plus));
            if (std::abs(plus - minus) > 1e-12 * scale) throw ConfigError("penalty is not symmetric");
            if (plus < prev - 1e-12 * scale) throw ConfigError("penalty is not increasing on R+");
            if (plus < at_zero) throw ConfigError("penalty is not minimized at 0");
            prev = plus;
        }
    }
}

double eval_penalty(const PenaltySpec& spec, PenaltyRole role, double deviation)
{
    return role == PenaltyRole::Running ? spec.g.value(deviation) : spec.q.value(deviation);
}

}  // namespace stakeopt
