#pragma once

#include "stakeopt/dynamics.hpp"
#include "stakeopt/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stakeopt {

enum class HjbVariant : std::uint64_t { Hoarding = 0, Trading = 1, RiskControl = 2 };
const char* to_string(HjbVariant v);

/// w(t_i, y_j) on uniform grids t in [0, T] and y = x / N(t) in [0, 1].
struct ValueGrid {
    std::size_t nt = 0;
    std::size_t ny = 0;
    std::vector<double> times;
    std::vector<double> shares;
    /// Row-major, row i is the slice at times[i].
    std::vector<double> values;
    HjbVariant variant = HjbVariant::Trading;
    TradingProblem problem;
    /// Courant number actually used.
    double cfl = 0.0;

    double at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }
};

struct HjbOptions {
    std::size_t nt = 512;
    std::size_t ny = 512;
    double max_cfl = 0.9;
    /// Refining nt beyond this many stored values is refused.
    std::size_t max_cells = std::size_t{1} << 27;
};

/// Backward explicit upwind scheme for
///   w_t + running(t, y N(t)) + max(nu_bar (D+w/N - P~), -nu_bar (D-w/N - P~), 0) = 0,
/// Dirichlet rows at y = 0 and y = 1. nt is refined when the CFL number exceeds max_cfl.
/// RiskControl requires problem.penalty. Hoarding uses P~ = 0.
ValueGrid solve_hjb(const TradingProblem& problem, HjbVariant variant, const HjbOptions& opts = {});

/// nu*(t, x) = nu_bar sign(w_y / N - P~), centered differences inside, one-sided at the edges;
/// ties go to +nu_bar.
Strategy extract_feedback(const ValueGrid& grid);

/// Bilinear interpolation in (t, y). Throws DomainError outside 0 <= t <= T, 0 <= x <= N(t).
double value_at(const ValueGrid& grid, double t, double x);

/// Long-form CSV `t,y,w`.
void write_grid_csv(const ValueGrid& grid, const std::filesystem::path& path);

/// Little-endian: u64 nt, u64 ny, f64 T, u64 variant, then nt*ny f64 row-major.
void write_grid_binary(const ValueGrid& grid, const std::filesystem::path& path);

struct GridDump {
    std::uint64_t nt = 0;
    std::uint64_t ny = 0;
    double horizon = 0.0;
    HjbVariant variant = HjbVariant::Trading;
    std::vector<double> values;
};

GridDump read_grid_binary(const std::filesystem::path& path);

}  // namespace stakeopt
