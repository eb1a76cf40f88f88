#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stakeopt::numerics {

inline constexpr double kQuadRelTol = 1e-10;

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
/// Converges to rel_tol relative to the L1 norm of f, with an absolute floor.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = kQuadRelTol);

/// Same as integrate(), splitting [a, b] at the given interior breakpoints first.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol = kQuadRelTol);

/// Bisection for a root of f on [lo, hi]; f(lo) and f(hi) must not share a strict sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Monotone piecewise-cubic Hermite interpolant (shape preserving, C1).
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::function<double(double)> eval_;
    std::function<double(double)> prime_;
};

}  // namespace stakeopt::numerics
