#include "ldplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ldplab/errors.hpp"

namespace ldplab {

SigmaFunction SigmaFunction::constant(double c) {
  if (!std::isfinite(c)) throw ConfigError("sigma const(c) needs finite c");
  return {Kind::Const, "const", c, 0.0};
}

SigmaFunction SigmaFunction::tanh(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("sigma tanh(a,b) needs finite a, b");
  return {Kind::Tanh, "tanh", a, b};
}

SigmaFunction SigmaFunction::cosdamp(double a) {
  if (!std::isfinite(a)) throw ConfigError("sigma cosdamp(a) needs finite a");
  return {Kind::CosDamp, "cosdamp", a, 0.0};
}

SigmaFunction SigmaFunction::preset(const std::string& name, const std::vector<double>& params) {
  auto want = [&](std::size_t n) {
    if (params.size() != n) {
      throw ConfigError("sigma preset '" + name + "' takes " + std::to_string(n) + " parameter(s), got " +
                        std::to_string(params.size()));
    }
  };
  if (name == "const") {
    want(1);
    return constant(params[0]);
  }
  if (name == "tanh") {
    want(2);
    return tanh(params[0], params[1]);
  }
  if (name == "cosdamp") {
    want(1);
    return cosdamp(params[0]);
  }
  throw ConfigError("unknown sigma preset '" + name + "' (const, tanh, cosdamp)");
}

double SigmaFunction::sup_norm() const noexcept { return std::abs(a_); }

double SigmaFunction::lipschitz() const noexcept {
  switch (kind_) {
    case Kind::Const:
      return 0.0;
    case Kind::Tanh:
      return std::abs(a_ * b_);
    case Kind::CosDamp:
      return std::abs(a_) * kCosDampSlope;
  }
  return 0.0;
}

std::vector<double> SigmaFunction::params() const {
  if (kind_ == Kind::Tanh) return {a_, b_};
  return {a_};
}

std::string SigmaFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name_ << '(';
  const auto p = params();
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
  os << ')';
  return os.str();
}

void EquationSpec::validate() const {
  if (!std::isfinite(c_h) || !std::isfinite(c_w1) || !std::isfinite(c_w2)) {
    throw ConfigError("initial data must be finite constants");
  }
}

double mean_function(const EquationSpec& eq, double t) {
  return eq.kind == OperatorKind::Heat ? eq.c_h : eq.c_w1 + t * eq.c_w2;
}

StabilityReport stability_check(const GridConfig& grid, OperatorKind kind) {
  if (!(grid.dx > 0.0) || !(grid.dt > 0.0)) throw ConfigError("stability check needs positive dx, dt");
  StabilityReport r;
  if (kind == OperatorKind::Heat) {
    r.ratio = grid.dt / (grid.dx * grid.dx);
    r.bound = "heat: dt <= dx^2";
  } else {
    r.ratio = grid.dt / grid.dx;
    r.bound = "wave: dt <= dx (CFL)";
  }
  r.pass = r.ratio <= 1.0 + 1e-12;
  return r;
}

void enforce_stability(const GridConfig& grid, OperatorKind kind) {
  const auto r = stability_check(grid, kind);
  if (!r.pass) {
    throw ConfigError("unstable grid, violates " + r.bound + " (ratio " + std::to_string(r.ratio) + ")");
  }
}

FieldState FieldState::initial(const EquationSpec& eq, const GridConfig& grid) {
  FieldState s;
  const std::size_t n = grid.node_count();
  if (eq.kind == OperatorKind::Heat) {
    s.current.assign(n, eq.c_h);
    s.previous.assign(n, eq.c_h);
    s.time_index = 0;
  } else {
    s.previous.assign(n, eq.c_w1);
    s.current.assign(n, eq.c_w1 + grid.dt * eq.c_w2);
    s.time_index = 1;
  }
  return s;
}

namespace {

void check_sizes(const FieldState& state, std::span<const double> xi, const GridConfig& grid) {
  const std::size_t n = grid.node_count();
  if (state.current.size() != n || state.previous.size() != n || xi.size() != n - 2) {
    throw ConfigError("field state or noise slice does not match the grid");
  }
}

}  // namespace

void step_heat(FieldState& state, std::span<const double> xi, const EquationSpec& eq,
               const GridConfig& grid, std::size_t path) {
  check_sizes(state, xi, grid);
  const std::size_t n = grid.node_count();
  const double r = grid.dt / (2.0 * grid.dx * grid.dx);
  const double* u = state.current.data();
  double* next = state.previous.data();
  double sum = 0.0;
  if (eq.sigma.is_constant()) {
    const double c = eq.sigma(0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      next[j] = u[j] + r * (u[j + 1] - 2.0 * u[j] + u[j - 1]) + c * xi[j - 1];
      sum += next[j];
    }
  } else {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      next[j] = u[j] + r * (u[j + 1] - 2.0 * u[j] + u[j - 1]) + eq.sigma(u[j]) * xi[j - 1];
      sum += next[j];
    }
  }
  if (!std::isfinite(sum)) throw NumericalError("heat scheme produced a non-finite value", state.time_index, path);
  ++state.time_index;
  next[0] = next[n - 1] = mean_function(eq, grid.t(state.time_index));
  std::swap(state.current, state.previous);
}

void step_wave(FieldState& state, std::span<const double> xi, const EquationSpec& eq,
               const GridConfig& grid, std::size_t path) {
  check_sizes(state, xi, grid);
  const std::size_t n = grid.node_count();
  const double c2 = (grid.dt / grid.dx) * (grid.dt / grid.dx);
  const double dt = grid.dt;
  const double* u = state.current.data();
  double* prev = state.previous.data();  // overwritten in place with the next layer
  double sum = 0.0;
  if (eq.sigma.is_constant()) {
    const double c = dt * eq.sigma(0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      prev[j] = 2.0 * u[j] - prev[j] + c2 * (u[j + 1] - 2.0 * u[j] + u[j - 1]) + c * xi[j - 1];
      sum += prev[j];
    }
  } else {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      prev[j] = 2.0 * u[j] - prev[j] + c2 * (u[j + 1] - 2.0 * u[j] + u[j - 1]) +
                dt * eq.sigma(u[j]) * xi[j - 1];
      sum += prev[j];
    }
  }
  if (!std::isfinite(sum)) throw NumericalError("wave scheme produced a non-finite value", state.time_index, path);
  ++state.time_index;
  prev[0] = prev[n - 1] = mean_function(eq, grid.t(state.time_index));
  std::swap(state.current, state.previous);
}

SnappedTimes snap_times(std::span<const double> times, const GridConfig& grid) {
  SnappedTimes s;
  for (double t : times) {
    if (!(t >= 0.0) || t > grid.T + 1e-12) {
      throw ConfigError("observation time " + std::to_string(t) + " lies outside [0, T]");
    }
    const auto n = static_cast<std::size_t>(std::llround(t / grid.dt));
    const double err = std::abs(grid.t(n) - t);
    s.steps.push_back(n);
    s.snap_error.push_back(err);
    s.max_snap_error = std::max(s.max_snap_error, err);
  }
  return s;
}

void simulate_path(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                   const SnappedTimes& observe, std::uint64_t seed, std::uint32_t path,
                   const SnapshotCallback& on_snapshot, PathWorkspace& ws) {
  if (observe.steps.empty()) return;
  std::vector<std::size_t> order(observe.steps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return observe.steps[a] < observe.steps[b]; });

  ws.state = FieldState::initial(eq, grid);
  ws.xi.resize(grid.interior_count());
  std::size_t next_obs = 0;
  // Wave starts at index 1; its t = 0 layer sits in `previous`.
  while (next_obs < order.size() && observe.steps[order[next_obs]] < ws.state.time_index) {
    on_snapshot(order[next_obs], ws.state.previous);
    ++next_obs;
  }
  const std::size_t last = observe.steps[order.back()];
  while (true) {
    while (next_obs < order.size() && observe.steps[order[next_obs]] == ws.state.time_index) {
      on_snapshot(order[next_obs], ws.state.current);
      ++next_obs;
    }
    if (ws.state.time_index >= last) break;
    if (eq.sigma.is_zero()) {
      std::fill(ws.xi.begin(), ws.xi.end(), 0.0);
    } else {
      noise.fill({seed, path, static_cast<std::uint32_t>(ws.state.time_index)}, ws.xi, ws.noise);
    }
    if (eq.kind == OperatorKind::Heat) {
      step_heat(ws.state, ws.xi, eq, grid, path);
    } else {
      step_wave(ws.state, ws.xi, eq, grid, path);
    }
  }
}

std::vector<std::vector<double>> simulate_path(const EquationSpec& eq, const GridConfig& grid,
                                               const NoiseSource& noise,
                                               std::span<const double> observe_times,
                                               std::uint64_t seed, std::uint32_t path) {
  const auto snapped = snap_times(observe_times, grid);
  std::vector<std::vector<double>> out(observe_times.size());
  PathWorkspace ws;
  ws.noise = noise.make_workspace();
  simulate_path(eq, grid, noise, snapped, seed, path,
                [&](std::size_t i, std::span<const double> field) { out[i].assign(field.begin(), field.end()); },
                ws);
  return out;
}

}  // namespace ldplab
