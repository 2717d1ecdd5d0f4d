#include "ldplab/grid.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "ldplab/errors.hpp"

namespace ldplab {

namespace {

// Counts of whole cells; the small slack keeps 0.3/0.1 from rounding up to 4.
std::size_t cells(double length, double dx) {
  return static_cast<std::size_t>(std::ceil(length / dx - 1e-9));
}

}  // namespace

void GridConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(dx)) throw ConfigError("grid.dx must be positive");
  if (!positive(dt)) throw ConfigError("grid.dt must be positive");
  if (!positive(T)) throw ConfigError("grid.T must be positive");
  if (!positive(r_max)) throw ConfigError("grid.R_max must be positive");
  if (!(pad >= 0.0) || !std::isfinite(pad)) throw ConfigError("grid.pad must be >= 0");
  if (node_count() > (std::size_t{1} << 26)) throw ConfigError("grid has too many nodes");
}

std::size_t GridConfig::pad_nodes() const { return std::max<std::size_t>(cells(pad, dx), 1); }

std::size_t GridConfig::node_count() const { return 2 * pad_nodes() + cells(r_max, dx) + 1; }

std::size_t GridConfig::step_count() const { return cells(T, dt); }

double GridConfig::x_lo() const { return -static_cast<double>(pad_nodes()) * dx; }

double GridConfig::x_hi() const { return x(node_count() - 1); }

std::uint64_t GridConfig::id() const {
  // FNV-1a over the raw parameter bits.
  std::uint64_t h = 1469598103934665603ull;
  for (double v : {dx, dt, T, r_max, pad}) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

double minimum_pad(OperatorKind kind, double T, const CovarianceKernel& gamma) {
  const double ell = gamma.correlation_length();
  return kind == OperatorKind::Heat ? 6.0 * std::sqrt(T) + 3.0 * ell : T + 3.0 * ell;
}

void check_domain(const GridConfig& grid, OperatorKind kind, const CovarianceKernel& gamma) {
  grid.validate();
  const double need = minimum_pad(kind, grid.T, gamma);
  if (grid.pad < need) {
    throw ConfigError("grid.pad = " + std::to_string(grid.pad) + " is below the " +
                      std::string(to_string(kind)) + " minimum " + std::to_string(need) +
                      (kind == OperatorKind::Heat ? " (6 sqrt(T) + 3 l)" : " (T + 3 l)"));
  }
}

}  // namespace ldplab
