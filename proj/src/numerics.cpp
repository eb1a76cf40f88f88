#include "stakeopt/numerics.hpp"

#include "stakeopt/errors.hpp"

// pchip.hpp calls isnan unqualified.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace stakeopt::numerics {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol)
{
    if (!(a <= b)) {
        throw DomainError("integrate: lower limit exceeds upper limit");
    }
    if (b - a <= 0.0) {
        return 0.0;
    }
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &error, &l1);
    if (!std::isfinite(value)) {
        throw NumericError("integrate: non-finite quadrature result", a);
    }
    return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol)
{
    double total = 0.0;
    double left = a;
    for (double bp : breakpoints) {
        if (bp <= left || bp >= b) continue;
        total += integrate(f, left, bp, rel_tol);
        left = bp;
    }
    return total + integrate(f, left, b, rel_tol);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NumericError("bisect: root not bracketed", lo);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(x), y_(y)
{
    if (x.size() != y.size()) {
        throw ConfigError("monotone interpolant: knot and value counts differ");
    }
    if (x.size() < 4) {
        throw ConfigError("monotone interpolant: at least four knots are required");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw ConfigError("monotone interpolant: knots must be strictly increasing");
        }
    }
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    auto spline = std::make_shared<Pchip>(std::move(x), std::move(y));
    const double lo = x_.front();
    const double hi = x_.back();
    eval_ = [spline, lo, hi](double t) { return (*spline)(std::clamp(t, lo, hi)); };
    prime_ = [spline, lo, hi](double t) { return spline->prime(std::clamp(t, lo, hi)); };
}

double MonotoneCubic::operator()(double t) const { return eval_(t); }

double MonotoneCubic::derivative(double t) const { return prime_(t); }

}  // namespace stakeopt::numerics
