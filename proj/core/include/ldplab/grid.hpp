#pragma once

#include <cstddef>
#include <cstdint>

#include "ldplab/kernels.hpp"

namespace ldplab {

/// Uniform space-time grid on [x_lo, x_hi] x [0, T]. The averaging region
/// [0, r_max] is extended by `pad` on each side, rounded outward to nodes.
/// Nodes 0 and node_count()-1 are boundary nodes; the rest are interior.
struct GridConfig {
  double dx = 0.05;
  double dt = 0.002;
  double T = 1.0;
  double r_max = 64.0;
  double pad = 8.0;

  /// Throws ConfigError unless all steps are positive and finite and pad >= 0.
  void validate() const;

  std::size_t pad_nodes() const;
  std::size_t node_count() const;
  std::size_t interior_count() const { return node_count() - 2; }
  /// ceil(T / dt), so the last grid time is >= T.
  std::size_t step_count() const;

  double x_lo() const;
  double x_hi() const;
  double x(std::size_t j) const { return x_lo() + static_cast<double>(j) * dx; }
  double t(std::size_t n) const { return static_cast<double>(n) * dt; }

  /// Stable identifier of the grid parameters, used to tag noise slices.
  std::uint64_t id() const;
};

/// Heat: 6 sqrt(T) + 3 l; wave: T + 3 l, with l the kernel correlation length.
double minimum_pad(OperatorKind kind, double T, const CovarianceKernel& gamma);

/// Throws ConfigError naming the violated bound when the pad is too small.
void check_domain(const GridConfig& grid, OperatorKind kind, const CovarianceKernel& gamma);

}  // namespace ldplab
