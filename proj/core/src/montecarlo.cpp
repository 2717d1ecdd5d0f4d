#include "ldplab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ldplab/errors.hpp"

namespace ldplab {

void EnsembleConfig::validate(const GridConfig& grid) const {
  if (n_paths < 100) throw ConfigError("ensemble.n_paths must be >= 100");
  if (batch_count < 8) throw ConfigError("ensemble.batch_count must be >= 8");
  if (batch_count > n_paths) throw ConfigError("ensemble.batch_count exceeds n_paths");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  if (r_ladder.empty()) throw ConfigError("ensemble.R_ladder must be nonempty");
  for (std::size_t i = 0; i < r_ladder.size(); ++i) {
    if (!(r_ladder[i] > 0.0)) throw ConfigError("ensemble.R_ladder entries must be positive");
    if (i > 0 && !(r_ladder[i] > r_ladder[i - 1])) throw ConfigError("ensemble.R_ladder must be increasing");
  }
  if (r_ladder.back() > grid.r_max + 1e-12) throw ConfigError("largest ladder R exceeds grid.R_max");
  if (n_paths > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("too many paths");
}

void parallel_paths(std::size_t n, std::size_t threads,
                    const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_path = n;
  std::exception_ptr error;

  auto worker = [&](std::size_t id) {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t p = next.fetch_add(1);
      if (p >= n) return;
      try {
        fn(p, id);
      } catch (...) {
        std::lock_guard lock(mu);
        // Claims are handed out in increasing order, so every lower path has
        // been claimed and will finish: the lowest failure is deterministic.
        if (p < failed_path) {
          failed_path = p;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<double> SampleTensor::window_matrix(std::size_t w) const {
  std::vector<double> m(paths_ * k_);
  for (std::size_t p = 0; p < paths_; ++p) {
    for (std::size_t i = 0; i < k_; ++i) m[p * k_ + i] = at(p, w, i);
  }
  return m;
}

std::vector<double> SampleTensor::column(std::size_t w, std::size_t i) const {
  std::vector<double> c(paths_);
  for (std::size_t p = 0; p < paths_; ++p) c[p] = at(p, w, i);
  return c;
}

SampleTensor run_windows(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                         const TimePoints& times, std::span<const Window> windows,
                         std::size_t n_paths, std::uint64_t seed, std::size_t threads,
                         std::uint32_t path_offset) {
  eq.validate();
  times.validate(grid.T);
  enforce_stability(grid, eq.kind);
  if (windows.empty()) throw ConfigError("run_windows needs at least one window");
  std::vector<SnappedWindow> snapped;
  for (const auto& w : windows) snapped.push_back(snap_window(grid, w.a, w.b));
  const auto observe = snap_times(times.times, grid);
  std::vector<double> means;
  for (double t : times.times) means.push_back(mean_function(eq, t));

  SampleTensor out(n_paths, windows.size(), times.size());
  std::vector<PathWorkspace> workspaces(std::max<std::size_t>(1, threads));
  for (auto& ws : workspaces) ws.noise = noise.make_workspace();
  parallel_paths(n_paths, threads, [&](std::size_t p, std::size_t worker) {
    auto on_snapshot = [&](std::size_t i, std::span<const double> field) {
      for (std::size_t w = 0; w < snapped.size(); ++w) {
        out.at(p, w, i) = centered_integral(field, snapped[w], means[i], grid.dx);
      }
    };
    simulate_path(eq, grid, noise, observe, seed, static_cast<std::uint32_t>(p) + path_offset,
                  on_snapshot, workspaces[worker]);
  });
  return out;
}

SampleTensor run_ensemble(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                          const TimePoints& times, const EnsembleConfig& config) {
  config.validate(grid);
  std::vector<Window> windows;
  for (double r : config.r_ladder) windows.push_back({0.0, r});
  return run_windows(eq, grid, noise, times, windows, config.n_paths, config.seed, config.threads);
}

void ExpMomentAccumulator::rescale(double new_shift) {
  if (count_ > 0) {
    const double f = std::exp(shift_ - new_shift);
    sum_.scale(f);
    sum_sq_.scale(f * f);
  }
  shift_ = new_shift;
}

void ExpMomentAccumulator::add(double exponent) {
  if (!std::isfinite(exponent)) throw StatisticsError("non-finite exponent");
  if (exponent > shift_) rescale(exponent);
  const double w = std::exp(exponent - shift_);
  sum_.add(w);
  sum_sq_.add(w * w);
  ++count_;
}

void ExpMomentAccumulator::merge(const ExpMomentAccumulator& other) {
  if (other.context_ != context_) throw MergeError("merging accumulators built for different contexts");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double s = std::max(shift_, other.shift_);
  rescale(s);
  stats::CompensatedSum a = other.sum_, b = other.sum_sq_;
  const double f = std::exp(other.shift_ - s);
  a.scale(f);
  b.scale(f * f);
  sum_.merge(a);
  sum_sq_.merge(b);
  count_ += other.count_;
}

double ExpMomentAccumulator::log_mean() const {
  if (count_ == 0) throw StatisticsError("log_mean of an empty accumulator");
  return shift_ + std::log(sum_.value() / static_cast<double>(count_));
}

double ExpMomentAccumulator::ess() const {
  if (count_ == 0) return 0.0;
  const double s = sum_.value();
  return s * s / sum_sq_.value();
}

std::uint64_t context_id(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

double log_mean_exp(std::span<const double> exponents) {
  if (exponents.empty()) throw StatisticsError("log_mean_exp of an empty sample");
  const double m = *std::max_element(exponents.begin(), exponents.end());
  if (!std::isfinite(m)) throw StatisticsError("log_mean_exp: non-finite input");
  stats::CompensatedSum s;
  for (double x : exponents) s.add(std::exp(x - m));
  return m + std::log(s.value() / static_cast<double>(exponents.size()));
}

namespace {

struct Batched {
  double value;
  double halfwidth;
  double ess;
};

// (1/scale) log mean exp over all samples and per batch.
Batched batched_log_mean_exp(std::span<const double> exponents, double scale, std::size_t batches,
                             std::uint64_t context) {
  const auto edges = stats::batch_edges(exponents.size(), batches);
  ExpMomentAccumulator total(context);
  std::vector<double> per_batch;
  for (std::size_t b = 0; b < batches; ++b) {
    ExpMomentAccumulator acc(context);
    for (std::size_t i = edges[b]; i < edges[b + 1]; ++i) acc.add(exponents[i]);
    per_batch.push_back(acc.log_mean() / scale);
    total.merge(acc);
  }
  const double value = total.log_mean() / scale;
  return {value, stats::batch_ci(per_batch, value).halfwidth, total.ess()};
}

}  // namespace

std::vector<CgfEstimate> estimate_cgf(std::span<const double> samples, std::size_t k,
                                      std::span<const std::vector<double>> lambdas, double R,
                                      const CgfOptions& options) {
  if (k == 0 || samples.size() % k != 0) throw StatisticsError("estimate_cgf: samples are not n x k");
  if (!(R > 0.0)) throw DomainError("estimate_cgf: R must be positive");
  const std::size_t n = samples.size() / k;
  if (n == 0) throw StatisticsError("estimate_cgf: no samples");
  std::vector<CgfEstimate> out;
  std::vector<double> exps(n);
  for (const auto& lam : lambdas) {
    if (lam.size() != k) throw ConfigError("lambda dimension does not match the sample dimension");
    CgfEstimate e;
    e.lambda = lam;
    double norm2 = 0.0;
    for (double l : lam) norm2 += l * l;
    if (norm2 == 0.0) {
      e.value = 0.0;
      e.ci_halfwidth = 0.0;
      e.ess = static_cast<double>(n);
      out.push_back(e);
      continue;
    }
    for (std::size_t p = 0; p < n; ++p) {
      double x = 0.0;
      for (std::size_t i = 0; i < k; ++i) x += lam[i] * samples[p * k + i];
      exps[p] = x;
    }
    const auto b = batched_log_mean_exp(exps, R, options.batch_count, context_id(lam));
    e.value = b.value;
    e.ci_halfwidth = b.halfwidth;
    e.ess = b.ess;
    if (std::isfinite(options.c_qv)) {
      e.spread_ok = std::sqrt(norm2) * std::sqrt(options.c_qv * R) * 4.0 <= options.exponent_cap;
    }
    e.ess_ok = e.ess >= options.ess_min_fraction * static_cast<double>(n);
    out.push_back(e);
  }
  return out;
}

GFunctionalEstimate estimate_gfunctional(std::span<const double> samples, std::size_t k,
                                         const ConcaveTestFunction& g, double R,
                                         const CgfOptions& options) {
  if (k == 0 || samples.size() % k != 0 || k != g.k) {
    throw StatisticsError("estimate_gfunctional: samples are not n x k with k = dim(g)");
  }
  if (!(R > 0.0)) throw DomainError("estimate_gfunctional: R must be positive");
  const std::size_t n = samples.size() / k;
  if (n == 0) throw StatisticsError("estimate_gfunctional: no samples");
  const ConcaveTestFunction h = strictly_negative(g);
  GFunctionalEstimate e;
  e.g_id = h.id;
  e.shift = g.sup < 0.0 ? 0.0 : g.sup + 1.0;
  e.m_g = h.m_g;
  std::vector<double> exps(n), x(k);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < k; ++i) x[i] = samples[p * k + i] / R;
    exps[p] = R * h(x);
  }
  const auto b = batched_log_mean_exp(exps, R, options.batch_count, context_id(std::span<const double>(&R, 1)));
  e.value = b.value;
  e.ci_halfwidth = b.halfwidth;
  e.ess = b.ess;
  e.trusted = e.ess >= options.ess_min_fraction * static_cast<double>(n);
  e.lower_bound = -e.m_g + std::log(0.5) / R;
  e.lower_bound_ok = e.value + e.ci_halfwidth >= e.lower_bound;
  return e;
}

}  // namespace ldplab
