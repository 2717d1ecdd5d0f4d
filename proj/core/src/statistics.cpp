#include "ldplab/statistics.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>

#include "ldplab/errors.hpp"

namespace ldplab::stats {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) {
  add(other.sum_);
  add(other.comp_);
}

double MeanVar::standard_error() const {
  return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

MeanVar mean_var(std::span<const double> x) {
  if (x.empty()) throw StatisticsError("mean_var of an empty sample");
  MeanVar r;
  double m2 = 0.0;
  for (double v : x) {
    ++r.n;
    const double d = v - r.mean;
    r.mean += d / static_cast<double>(r.n);
    m2 += d * (v - r.mean);
  }
  r.variance = r.n > 1 ? m2 / static_cast<double>(r.n - 1) : 0.0;
  return r;
}

std::vector<std::size_t> batch_edges(std::size_t n, std::size_t batches) {
  if (batches == 0 || batches > n) throw StatisticsError("need 1 <= batches <= sample size");
  std::vector<std::size_t> e(batches + 1);
  for (std::size_t b = 0; b <= batches; ++b) e[b] = b * n / batches;
  return e;
}

BatchCi batch_ci(std::span<const double> batch_values, double point) {
  if (batch_values.size() < 2) throw StatisticsError("batch CI needs at least two batches");
  BatchCi r;
  r.mean = point;
  r.batch_values.assign(batch_values.begin(), batch_values.end());
  const auto mv = mean_var(batch_values);
  r.halfwidth = 1.96 * std::sqrt(mv.variance / static_cast<double>(batch_values.size()));
  return r;
}

JackknifeResult jackknife_covariance(std::span<const double> x, std::span<const double> y,
                                     std::size_t groups) {
  if (x.size() != y.size()) throw StatisticsError("jackknife_covariance: size mismatch");
  if (groups < 2 || x.size() < 2 * groups) throw StatisticsError("jackknife_covariance: too few samples");
  const auto edges = batch_edges(x.size(), groups);
  std::vector<double> sx(groups), sy(groups), sxy(groups), cnt(groups);
  double tx = 0, ty = 0, txy = 0;
  // Shift by the first sample to limit cancellation in the cross moments.
  const double x0 = x[0], y0 = y[0];
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = edges[g]; i < edges[g + 1]; ++i) {
      const double a = x[i] - x0, b = y[i] - y0;
      sx[g] += a;
      sy[g] += b;
      sxy[g] += a * b;
    }
    cnt[g] = static_cast<double>(edges[g + 1] - edges[g]);
    tx += sx[g];
    ty += sy[g];
    txy += sxy[g];
  }
  auto cov = [](double n, double a, double b, double ab) { return (ab - a * b / n) / (n - 1.0); };
  const double n = static_cast<double>(x.size());
  JackknifeResult r;
  r.estimate = cov(n, tx, ty, txy);
  std::vector<double> loo(groups);
  double mean_loo = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    loo[g] = cov(n - cnt[g], tx - sx[g], ty - sy[g], txy - sxy[g]);
    mean_loo += loo[g] / static_cast<double>(groups);
  }
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  const double G = static_cast<double>(groups);
  r.standard_error = std::sqrt((G - 1.0) / G * ss);
  return r;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) return std::clamp(2.0 * sum, 0.0, 1.0);
    sign = -sign;
  }
  // Series did not settle: only happens for tiny lambda, where Q = 1.
  return 1.0;
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw StatisticsError("KS test needs two nonempty samples");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n != y.size() || (!weights.empty() && weights.size() != n)) {
    throw StatisticsError("fit_line: size mismatch");
  }
  if (n < 2) throw StatisticsError("fit_line needs at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    mx += w(i) * x[i];
    my += w(i) * y[i];
  }
  if (!(sw > 0.0)) throw StatisticsError("fit_line: weights sum to zero");
  mx /= sw;
  my /= sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (x[i] - mx) * (x[i] - mx);
    sxy += w(i) * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw StatisticsError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.residuals.push_back(r);
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
    rss += w(i) * r * r;
  }
  if (n > 2 && weights.empty()) {
    const double s2 = rss / static_cast<double>(n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return f;
}

double binomial_upper_bound(std::size_t trials, std::size_t successes, double confidence) {
  if (trials == 0) throw StatisticsError("binomial bound needs at least one trial");
  if (successes > trials) throw StatisticsError("binomial bound: successes exceed trials");
  if (successes == trials) return 1.0;
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(
      static_cast<double>(trials), static_cast<double>(successes), 1.0 - confidence,
      binomial_distribution<>::clopper_pearson_exact_interval);
}

}  // namespace ldplab::stats
