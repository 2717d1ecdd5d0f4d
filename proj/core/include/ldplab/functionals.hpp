#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ldplab/grid.hpp"
#include "ldplab/solver.hpp"

namespace ldplab {

/// Observation times T_k = (t_1, ..., t_k); duplicates allowed.
struct TimePoints {
  std::vector<double> times;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws ConfigError unless nonempty and every t lies in [0, T].
  void validate(double T) const;
};

/// [a, b] snapped outward to nodes j0 <= j1.
struct SnappedWindow {
  std::size_t j0 = 0;
  std::size_t j1 = 0;
  double a = 0.0;
  double b = 0.0;
  double snap_error = 0.0;  ///< max distance moved by either end
};

/// Throws ConfigError when [a, b] leaves [x_lo, x_hi] or b < a.
SnappedWindow snap_window(const GridConfig& grid, double a, double b);

/// Trapezoid rule of (field - mean) over the snapped window; `field` holds
/// every node of the grid.
double centered_integral(std::span<const double> field, const SnappedWindow& w, double mean,
                         double dx);

/// F^a_b(t) for a < b.
double spatial_average(std::span<const double> field, double t, double a, double b,
                       const EquationSpec& eq, const GridConfig& grid);

struct AverageSample {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> times;
  std::vector<double> values;      ///< F^a_b(t_i)
  std::vector<double> normalized;  ///< F^a_b(t_i) / (b - a)
};

/// Component-wise F^a_b over the snapshots, snapshots[i] taken at times[i].
AverageSample multi_time_vector(std::span<const std::vector<double>> snapshots,
                                const TimePoints& times, double a, double b,
                                const EquationSpec& eq, const GridConfig& grid);

/// F^L_{L+theta}(t) - F^{L+R}_{L+R+theta}(t).
double window_difference(std::span<const double> field, double t, double L, double R,
                         double theta, const GridConfig& grid, const EquationSpec& eq);

}  // namespace ldplab
