#include "ldplab/functionals.hpp"

#include <cmath>
#include <string>

#include "ldplab/errors.hpp"

namespace ldplab {

void TimePoints::validate(double T) const {
  if (times.empty()) throw ConfigError("time points must be nonempty");
  for (double t : times) {
    if (!(t >= 0.0) || t > T + 1e-12) {
      throw ConfigError("time point " + std::to_string(t) + " lies outside [0, T]");
    }
  }
}

SnappedWindow snap_window(const GridConfig& grid, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw ConfigError("window needs finite a <= b");
  }
  const double lo = grid.x_lo();
  const double tol = 1e-9 * grid.dx;
  if (a < lo - tol || b > grid.x_hi() + tol) {
    throw ConfigError("window [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] leaves the domain [" + std::to_string(lo) + ", " + std::to_string(grid.x_hi()) + "]");
  }
  SnappedWindow w;
  w.j0 = static_cast<std::size_t>(std::max(0.0, std::floor((a - lo) / grid.dx + 1e-9)));
  w.j1 = static_cast<std::size_t>(std::ceil((b - lo) / grid.dx - 1e-9));
  w.j1 = std::min(w.j1, grid.node_count() - 1);
  if (w.j1 < w.j0) w.j1 = w.j0;
  w.a = grid.x(w.j0);
  w.b = grid.x(w.j1);
  w.snap_error = std::max(std::abs(w.a - a), std::abs(w.b - b));
  return w;
}

double centered_integral(std::span<const double> field, const SnappedWindow& w, double mean,
                         double dx) {
  if (w.j1 >= field.size()) throw ConfigError("window exceeds the field");
  if (w.j1 == w.j0) return 0.0;
  double s = 0.5 * ((field[w.j0] - mean) + (field[w.j1] - mean));
  for (std::size_t j = w.j0 + 1; j < w.j1; ++j) s += field[j] - mean;
  return s * dx;
}

double spatial_average(std::span<const double> field, double t, double a, double b,
                       const EquationSpec& eq, const GridConfig& grid) {
  if (!(a < b)) throw ConfigError("spatial_average needs a < b");
  return centered_integral(field, snap_window(grid, a, b), mean_function(eq, t), grid.dx);
}

AverageSample multi_time_vector(std::span<const std::vector<double>> snapshots,
                                const TimePoints& times, double a, double b,
                                const EquationSpec& eq, const GridConfig& grid) {
  if (snapshots.size() < times.size()) throw ConfigError("missing snapshot for a requested time");
  AverageSample s;
  s.a = a;
  s.b = b;
  s.times = times.times;
  const auto w = snap_window(grid, a, b);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (snapshots[i].size() != grid.node_count()) throw ConfigError("missing snapshot for a requested time");
    const double v = centered_integral(snapshots[i], w, mean_function(eq, times.times[i]), grid.dx);
    s.values.push_back(v);
    s.normalized.push_back(v / (b - a));
  }
  return s;
}

double window_difference(std::span<const double> field, double t, double L, double R,
                         double theta, const GridConfig& grid, const EquationSpec& eq) {
  const double mean = mean_function(eq, t);
  const auto left = snap_window(grid, L, L + theta);
  const auto right = snap_window(grid, L + R, L + R + theta);
  return centered_integral(field, left, mean, grid.dx) - centered_integral(field, right, mean, grid.dx);
}

}  // namespace ldplab
