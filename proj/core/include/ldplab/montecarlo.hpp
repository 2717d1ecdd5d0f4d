#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ldplab/functionals.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/noise.hpp"
#include "ldplab/solver.hpp"
#include "ldplab/statistics.hpp"
#include "ldplab/test_functions.hpp"

namespace ldplab {

struct EnsembleConfig {
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  std::vector<double> r_ladder{8, 16, 32, 64};
  std::size_t batch_count = 16;
  std::size_t threads = 1;

  /// n_paths >= 100, batch_count >= 8, ladder increasing, positive and <= R_max.
  void validate(const GridConfig& grid) const;
};

/// Calls fn(path, worker) for every path in [0, n) on `threads` workers.
/// Results must be written to per-path slots. If paths throw, the exception
/// of the lowest failing path is rethrown after all workers stop.
void parallel_paths(std::size_t n, std::size_t threads,
                    const std::function<void(std::size_t path, std::size_t worker)>& fn);

struct Window {
  double a = 0.0;
  double b = 0.0;
};

/// Centered window integrals for every path, window and time:
/// at(p, w, i) = F^{a_w}_{b_w}(t_i) on path p.
class SampleTensor {
 public:
  SampleTensor() = default;
  SampleTensor(std::size_t paths, std::size_t windows, std::size_t k)
      : paths_(paths), windows_(windows), k_(k), data_(paths * windows * k) {}

  std::size_t paths() const noexcept { return paths_; }
  std::size_t windows() const noexcept { return windows_; }
  std::size_t k() const noexcept { return k_; }

  double& at(std::size_t p, std::size_t w, std::size_t i) { return data_[(p * windows_ + w) * k_ + i]; }
  double at(std::size_t p, std::size_t w, std::size_t i) const { return data_[(p * windows_ + w) * k_ + i]; }

  /// Row-major n_paths x k matrix for one window.
  std::vector<double> window_matrix(std::size_t w) const;
  /// One (window, time) column across paths.
  std::vector<double> column(std::size_t w, std::size_t i) const;
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t paths_ = 0, windows_ = 0, k_ = 0;
  std::vector<double> data_;
};

/// Simulate n_paths paths (path ids path_offset .. path_offset + n_paths - 1)
/// and record every window integral at every time.
SampleTensor run_windows(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                         const TimePoints& times, std::span<const Window> windows,
                         std::size_t n_paths, std::uint64_t seed, std::size_t threads,
                         std::uint32_t path_offset = 0);

/// Windows [0, R] for every R of the ladder.
SampleTensor run_ensemble(const EquationSpec& eq, const GridConfig& grid, const NoiseSource& noise,
                          const TimePoints& times, const EnsembleConfig& config);

/// Streaming estimator of log mean exp(x_i) with a running max shift.
class ExpMomentAccumulator {
 public:
  explicit ExpMomentAccumulator(std::uint64_t context = 0) : context_(context) {}

  void add(double exponent);
  /// Throws MergeError when the contexts differ.
  void merge(const ExpMomentAccumulator& other);

  std::uint64_t context() const noexcept { return context_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  /// log((1/n) sum exp(x_i)); throws StatisticsError when empty.
  double log_mean() const;
  /// (sum w)^2 / sum w^2 with w_i = exp(x_i).
  double ess() const;

 private:
  void rescale(double new_shift);

  std::uint64_t context_;
  double shift_ = -std::numeric_limits<double>::infinity();
  stats::CompensatedSum sum_;
  stats::CompensatedSum sum_sq_;
  std::size_t count_ = 0;
};

/// Context tag for accumulators: FNV-1a over the bits of the values.
std::uint64_t context_id(std::span<const double> values);

/// log((1/n) sum exp(x_i)); throws StatisticsError when empty.
double log_mean_exp(std::span<const double> exponents);

struct CgfOptions {
  std::size_t batch_count = 16;
  double exponent_cap = 20.0;
  double ess_min_fraction = 0.01;
  /// QV bound per unit length for the trust region; NaN disables the spread guard.
  double c_qv = std::numeric_limits<double>::quiet_NaN();
};

struct CgfEstimate {
  std::vector<double> lambda;
  double value = 0.0;          ///< (1/R) log mean exp(lambda . F_R)
  double ci_halfwidth = 0.0;   ///< batch means, 95%
  double ess = 0.0;
  bool spread_ok = true;       ///< |lambda| sqrt(c_qv R) 4 <= exponent_cap
  bool ess_ok = true;          ///< ess >= ess_min_fraction n
  bool trusted() const noexcept { return spread_ok && ess_ok; }
};

/// `samples` is a row-major n x k matrix of F_R(T_k) (not normalized).
/// Every lambda reuses the same samples.
std::vector<CgfEstimate> estimate_cgf(std::span<const double> samples, std::size_t k,
                                      std::span<const std::vector<double>> lambdas, double R,
                                      const CgfOptions& options = {});

struct GFunctionalEstimate {
  std::string g_id;
  double value = 0.0;        ///< (1/R) log mean exp(R g(F_R / R))
  double ci_halfwidth = 0.0;
  double ess = 0.0;
  double shift = 0.0;        ///< subtracted from g to make it strictly negative
  double m_g = 0.0;          ///< of the (shifted) function
  double lower_bound = 0.0;  ///< -m_g + (1/R) log(1/2)
  bool lower_bound_ok = true;
  bool trusted = true;       ///< ess >= ess_min_fraction n
};

GFunctionalEstimate estimate_gfunctional(std::span<const double> samples, std::size_t k,
                                         const ConcaveTestFunction& g, double R,
                                         const CgfOptions& options = {});

}  // namespace ldplab
