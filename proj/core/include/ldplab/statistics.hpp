#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ldplab::stats {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const noexcept { return sum_ + comp_; }
  void merge(const CompensatedSum& other);
  void scale(double f) {
    sum_ *= f;
    comp_ *= f;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  std::size_t n = 0;
  double standard_error() const;
};

MeanVar mean_var(std::span<const double> x);

/// Halfwidth 1.96 s / sqrt(B) from B contiguous batches.
struct BatchCi {
  double mean = 0.0;
  double halfwidth = 0.0;
  std::vector<double> batch_values;
};

/// Contiguous batch boundaries: batch b covers [edges[b], edges[b+1]).
std::vector<std::size_t> batch_edges(std::size_t n, std::size_t batches);

/// CI of an arbitrary statistic from its per-batch values; `point` is the
/// full-sample estimate that the interval is centered on.
BatchCi batch_ci(std::span<const double> batch_values, double point);

struct JackknifeResult {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Delete-one-group jackknife of Cov(x, y) over `groups` contiguous groups.
JackknifeResult jackknife_covariance(std::span<const double> x, std::span<const double> y,
                                     std::size_t groups = 20);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_j (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test; asymptotic p-value with the
/// (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) small-sample correction.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double max_abs_residual = 0.0;
  std::vector<double> residuals;
};

/// Least squares y = intercept + slope x, optionally with weights. Standard
/// errors are filled only for unweighted fits with more than two points.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

/// One-sided Clopper-Pearson upper bound on p at the given confidence.
double binomial_upper_bound(std::size_t trials, std::size_t successes, double confidence = 0.99);

}  // namespace ldplab::stats
