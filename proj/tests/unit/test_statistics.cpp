#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ldplab/errors.hpp"
#include "ldplab/statistics.hpp"

using namespace ldplab;
using namespace ldplab::stats;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mu, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// P(Bin(n, p) <= k) by direct summation in log space.
double binomial_cdf(std::size_t n, std::size_t k, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    s += std::exp(lc + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return s;
}

}  // namespace

TEST(CompensatedSum, RecoversSmallTerms) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);

  CompensatedSum a, b;
  a.add(1e16);
  b.add(1.0);
  b.add(-1e16);
  a.merge(b);
  EXPECT_EQ(a.value(), 1.0);
  a.scale(4.0);
  EXPECT_EQ(a.value(), 4.0);
}

TEST(MeanVar, MatchesTwoPass) {
  auto x = normals(5000, 3, 1e6, 2.0);
  const auto mv = mean_var(x);
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  EXPECT_NEAR(mv.mean, m, 1e-8);
  EXPECT_NEAR(mv.variance, ss / (x.size() - 1), 1e-8);
  EXPECT_NEAR(mv.standard_error(), std::sqrt(mv.variance / 5000.0), 1e-12);
  EXPECT_THROW(mean_var(std::span<const double>{}), StatisticsError);
}

TEST(Batches, EdgesPartitionTheSample) {
  for (std::size_t n : {10u, 17u, 10000u}) {
    for (std::size_t b : {1u, 3u, 8u}) {
      const auto e = batch_edges(n, b);
      ASSERT_EQ(e.size(), b + 1);
      EXPECT_EQ(e.front(), 0u);
      EXPECT_EQ(e.back(), n);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t len = e[i + 1] - e[i];
        EXPECT_TRUE(len == n / b || len == n / b + 1);
      }
    }
  }
  EXPECT_THROW(batch_edges(3, 4), StatisticsError);
  EXPECT_THROW(batch_edges(3, 0), StatisticsError);
}

TEST(Batches, CiCoversTheMeanAtNominalRate) {
  // Batch means of N(0,1) over 16 batches: 95% intervals should cover 0 in
  // roughly 95% of 400 repetitions (t_15 makes 1.96 a bit narrow: ~93%).
  int cover = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const auto x = normals(1600, 100 + rep);
    const auto e = batch_edges(x.size(), 16);
    std::vector<double> bm;
    for (std::size_t b = 0; b < 16; ++b) {
      bm.push_back(mean_var(std::span(x).subspan(e[b], e[b + 1] - e[b])).mean);
    }
    const auto ci = batch_ci(bm, mean_var(x).mean);
    if (std::abs(ci.mean) <= ci.halfwidth) ++cover;
  }
  EXPECT_GT(cover, 350);
  EXPECT_LT(cover, 395);
}

TEST(Jackknife, CovarianceAndStandardError) {
  const std::size_t n = 20000;
  const double rho = 0.5;
  const auto z1 = normals(n, 5), z2 = normals(n, 6);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 10.0 + z1[i];
    y[i] = -4.0 + rho * z1[i] + std::sqrt(1 - rho * rho) * z2[i];
  }
  const auto r = jackknife_covariance(x, y, 20);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (x[i] - mx) * (y[i] - my);
  c /= n - 1.0;
  EXPECT_NEAR(r.estimate, c, 1e-10);
  // Gaussian theory: Var(cov_hat) ~ (1 + rho^2) / n.
  const double se = std::sqrt((1 + rho * rho) / n);
  EXPECT_NEAR(r.standard_error, se, 0.5 * se);
  EXPECT_NEAR(r.estimate, rho, 5 * se);
  EXPECT_THROW(jackknife_covariance(std::span(x).first(10), std::span(y).first(10), 20), StatisticsError);
}

TEST(Kolmogorov, SurvivalValues) {
  EXPECT_NEAR(kolmogorov_q(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(kolmogorov_q(1.3580986393225505), 0.05, 1e-9);
  EXPECT_EQ(kolmogorov_q(0.0), 1.0);
  EXPECT_LT(kolmogorov_q(3.0), 1e-7);
}

TEST(KolmogorovSmirnov, StatisticMatchesBruteForce) {
  const auto x = normals(300, 1), y = normals(200, 2, 0.1);
  double d = 0.0;
  for (const auto* s : {&x, &y}) {
    for (double t : *s) {
      const double fx = std::count_if(x.begin(), x.end(), [&](double v) { return v <= t; }) / 300.0;
      const double fy = std::count_if(y.begin(), y.end(), [&](double v) { return v <= t; }) / 200.0;
      d = std::max(d, std::abs(fx - fy));
    }
  }
  const auto r = ks_two_sample(x, y);
  EXPECT_NEAR(r.statistic, d, 1e-15);
  const double ne = std::sqrt(300.0 * 200.0 / 500.0);
  EXPECT_NEAR(r.p_value, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d), 1e-15);
}

TEST(KolmogorovSmirnov, PowerAndSize) {
  EXPECT_GT(ks_two_sample(normals(5000, 1), normals(5000, 2)).p_value, 0.01);
  EXPECT_LT(ks_two_sample(normals(5000, 1), normals(5000, 2, 0.2)).p_value, 1e-6);
}

TEST(FitLine, ExactAndWeighted) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 + 3.0 * v);
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-13);
  EXPECT_NEAR(f.intercept, 2.0, 1e-13);
  EXPECT_LT(f.max_abs_residual, 1e-12);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-7);

  y[4] += 10.0;
  const std::vector<double> w{1, 1, 1, 1, 1e-12};
  const auto g = fit_line(x, y, w);
  EXPECT_NEAR(g.slope, 3.0, 1e-9);
  EXPECT_NEAR(g.residuals[4], 10.0, 1e-8);

  // Textbook standard errors against the closed form.
  const std::vector<double> yn{0.1, 0.9, 2.2, 2.8, 4.1};
  const auto h = fit_line(x, yn);
  double rss = 0;
  for (double r : h.residuals) rss += r * r;
  const double sxx = 10.0;
  EXPECT_NEAR(h.slope_se, std::sqrt(rss / 3.0 / sxx), 1e-12);
  EXPECT_NEAR(h.intercept_se, std::sqrt(rss / 3.0 * (0.2 + 4.0 / sxx)), 1e-12);

  EXPECT_THROW(fit_line(std::vector<double>{1, 1}, std::vector<double>{0, 1}), StatisticsError);
}

TEST(ClopperPearson, UpperBoundSolvesTheTailEquation) {
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{100, 0}, {100, 3}, {10000, 17}, {50, 49}}) {
    const double p = binomial_upper_bound(n, k, 0.99);
    EXPECT_NEAR(binomial_cdf(n, k, p), 0.01, 1e-8) << n << " " << k;
  }
  EXPECT_NEAR(binomial_upper_bound(1000, 0, 0.99), 1.0 - std::pow(0.01, 1.0 / 1000.0), 1e-12);
  EXPECT_EQ(binomial_upper_bound(5, 5), 1.0);
  EXPECT_THROW(binomial_upper_bound(0, 0), StatisticsError);
  EXPECT_THROW(binomial_upper_bound(3, 4), StatisticsError);
}
