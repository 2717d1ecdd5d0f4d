#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ldplab/grid.hpp"
#include "ldplab/kernels.hpp"
#include "ldplab/noise.hpp"

namespace ldplab {

/// Bounded C^1 diffusion coefficient with recorded sup norm and Lipschitz constant.
class SigmaFunction {
 public:
  enum class Kind { Const, Tanh, CosDamp };

  /// c
  static SigmaFunction constant(double c);
  /// a tanh(b x)
  static SigmaFunction tanh(double a, double b);
  /// a cos(x) / (1 + x^2)
  static SigmaFunction cosdamp(double a);
  /// Preset by name ("const", "tanh", "cosdamp") with positional parameters.
  static SigmaFunction preset(const std::string& name, const std::vector<double>& params);

  double operator()(double u) const {
    switch (kind_) {
      case Kind::Const:
        return a_;
      case Kind::Tanh:
        return a_ * std::tanh(b_ * u);
      case Kind::CosDamp:
        return a_ * std::cos(u) / (1.0 + u * u);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_constant() const noexcept { return kind_ == Kind::Const; }
  bool is_zero() const noexcept { return kind_ == Kind::Const && a_ == 0.0; }
  double sup_norm() const noexcept;
  double lipschitz() const noexcept;
  const std::string& name() const noexcept { return name_; }
  std::vector<double> params() const;
  /// e.g. "tanh(1,1)"
  std::string describe() const;

  /// max |d/dx cos(x)/(1+x^2)|, attained near x = -0.5599.
  static constexpr double kCosDampSlope = 0.954302536064745;

 private:
  SigmaFunction(Kind k, std::string name, double a, double b) : kind_(k), name_(std::move(name)), a_(a), b_(b) {}
  Kind kind_;
  std::string name_;
  double a_;
  double b_;
};

struct EquationSpec {
  OperatorKind kind = OperatorKind::Heat;
  SigmaFunction sigma = SigmaFunction::constant(1.0);
  double c_h = 0.0;   ///< heat initial value
  double c_w1 = 0.0;  ///< wave initial displacement
  double c_w2 = 0.0;  ///< wave initial velocity

  void validate() const;
};

/// E[u(t, x)]: c_h for heat, c_w1 + t c_w2 for wave.
double mean_function(const EquationSpec& eq, double t);

struct StabilityReport {
  double ratio = 0.0;  ///< dt / dx^2 (heat) or dt / dx (wave); stable iff <= 1
  bool pass = false;
  std::string bound;
};

StabilityReport stability_check(const GridConfig& grid, OperatorKind kind);
/// Throws ConfigError naming the violated bound.
void enforce_stability(const GridConfig& grid, OperatorKind kind);

struct FieldState {
  std::vector<double> current;
  std::vector<double> previous;  ///< wave only
  std::size_t time_index = 0;

  /// Constant initial data (wave: previous = c_w1, current = c_w1 + dt c_w2 at index 1).
  static FieldState initial(const EquationSpec& eq, const GridConfig& grid);
};

/// One forward-Euler step of du = (1/2) u_xx dt + sigma(u) dW on the interior;
/// boundaries clamped to the mean. `xi` has one entry per interior node.
/// Throws NumericalError on a non-finite result.
void step_heat(FieldState& state, std::span<const double> xi, const EquationSpec& eq,
               const GridConfig& grid, std::size_t path = 0);

/// One leapfrog step of u_tt = u_xx + sigma(u) W_dot.
void step_wave(FieldState& state, std::span<const double> xi, const EquationSpec& eq,
               const GridConfig& grid, std::size_t path = 0);

struct SnappedTimes {
  std::vector<std::size_t> steps;
  std::vector<double> snap_error;
  double max_snap_error = 0.0;
};

/// Nearest grid time for each requested time. Throws ConfigError outside [0, T].
SnappedTimes snap_times(std::span<const double> times, const GridConfig& grid);

/// Receives (observation index, field on all nodes) at each snapped time, in
/// increasing time order (duplicates delivered once per request).
using SnapshotCallback = std::function<void(std::size_t, std::span<const double>)>;

/// Scratch for repeated simulations on one thread.
struct PathWorkspace {
  FieldState state;
  std::vector<double> xi;
  NoiseSource::Workspace noise;
};

/// Run one path from the constant initial data to the last requested time.
/// The noise of step n is keyed by (seed, path, n).
void simulate_path(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                   const SnappedTimes& observe, std::uint64_t seed, std::uint32_t path,
                   const SnapshotCallback& on_snapshot, PathWorkspace& ws);

/// Convenience overload returning full-field snapshots.
std::vector<std::vector<double>> simulate_path(const EquationSpec& eq, const GridConfig& grid,
                                               const NoiseSource& noise,
                                               std::span<const double> observe_times,
                                               std::uint64_t seed, std::uint32_t path);

}  // namespace ldplab
