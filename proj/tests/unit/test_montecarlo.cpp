#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ldplab/errors.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab/statistics.hpp"
#include "ldplab/window_covariance.hpp"

using namespace ldplab;

namespace {

GridConfig small_grid(OperatorKind kind) {
  GridConfig g;
  g.T = 0.5;
  g.r_max = 4.0;
  if (kind == OperatorKind::Heat) {
    g.dx = 0.1;
    g.dt = 0.004;
  } else {
    g.dx = 0.05;
    g.dt = 0.025;
  }
  g.pad = minimum_pad(kind, g.T, CovarianceKernel::white());
  return g;
}

}  // namespace

TEST(ParallelPaths, EveryPathOnce) {
  for (std::size_t threads : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_paths(101, threads, [&](std::size_t p, std::size_t worker) {
      EXPECT_LT(worker, threads);
      hits[p]++;
    });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelPaths, LowestFailingPathIsRethrown) {
  for (std::size_t threads : {1u, 4u}) {
    try {
      parallel_paths(50, threads, [](std::size_t p, std::size_t) {
        if (p == 17 || p == 40) throw std::runtime_error("path " + std::to_string(p));
      });
      FAIL() << "no exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "path 17");
    }
  }
}

TEST(ExpMoments, StableForLargeExponents) {
  ExpMomentAccumulator acc;
  acc.add(1000.0);
  acc.add(1001.0);
  EXPECT_NEAR(acc.log_mean(), 1000.0 + std::log((1.0 + std::exp(1.0)) / 2.0), 1e-12);
  const double w1 = 1.0, w2 = std::exp(1.0);
  EXPECT_NEAR(acc.ess(), (w1 + w2) * (w1 + w2) / (w1 * w1 + w2 * w2), 1e-12);
  acc.add(-1e6);
  EXPECT_NEAR(acc.log_mean(), 1000.0 + std::log((1.0 + std::exp(1.0)) / 3.0), 1e-12);
  EXPECT_THROW(acc.add(INFINITY), StatisticsError);
  EXPECT_THROW(ExpMomentAccumulator().log_mean(), StatisticsError);
}

TEST(ExpMoments, MergeMatchesSequential) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 30.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = d(rng);
  ExpMomentAccumulator all(7), a(7), b(7);
  for (std::size_t i = 0; i < x.size(); ++i) {
    all.add(x[i]);
    (i % 3 == 0 ? a : b).add(x[i]);
  }
  b.merge(a);
  EXPECT_NEAR(b.log_mean(), all.log_mean(), 1e-12 * std::abs(all.log_mean()));
  EXPECT_NEAR(b.ess(), all.ess(), 1e-9);
  EXPECT_EQ(b.count(), 1000u);
  EXPECT_NEAR(log_mean_exp(x), all.log_mean(), 1e-12 * std::abs(all.log_mean()));
  EXPECT_THROW(b.merge(ExpMomentAccumulator(8)), MergeError);
  EXPECT_THROW(log_mean_exp(std::span<const double>{}), StatisticsError);
}

TEST(ExpMoments, EqualWeightsHaveFullEss) {
  ExpMomentAccumulator acc;
  for (int i = 0; i < 500; ++i) acc.add(3.0);
  EXPECT_NEAR(acc.ess(), 500.0, 1e-9);
  EXPECT_NEAR(acc.log_mean(), 3.0, 1e-14);
}

TEST(EstimateCgf, GaussianSamplesRecoverQuadraticCgf) {
  const std::size_t n = 200000;
  const double s = 2.0, R = 4.0;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, s);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  std::vector<std::vector<double>> lambdas{{0.0}, {0.25}, {-0.5}, {0.75}};
  const auto est = estimate_cgf(x, 1, lambdas, R);
  EXPECT_EQ(est[0].value, 0.0);
  EXPECT_EQ(est[0].ess, static_cast<double>(n));
  for (std::size_t i = 1; i < est.size(); ++i) {
    const double l = lambdas[i][0];
    const double exact = 0.5 * l * l * s * s / R;
    EXPECT_NEAR(est[i].value, exact, 3 * est[i].ci_halfwidth + 1e-3) << l;
    EXPECT_GT(est[i].ci_halfwidth, 0.0);
    // Lognormal weights: ESS / n = exp(-l^2 s^2).
    EXPECT_NEAR(est[i].ess / n, std::exp(-l * l * s * s), 0.1);
  }
}

TEST(EstimateCgf, TrustFlags) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 10.0);
  std::vector<double> x(2000);
  for (auto& v : x) v = d(rng);
  CgfOptions opt;
  opt.c_qv = 1.0;
  std::vector<std::vector<double>> lambdas{{0.1}, {3.0}};
  const auto est = estimate_cgf(x, 1, lambdas, 4.0, opt);
  // |l| sqrt(c R) 4 = 0.8 vs 24
  EXPECT_TRUE(est[0].spread_ok);
  EXPECT_FALSE(est[1].spread_ok);
  EXPECT_FALSE(est[1].ess_ok);
  EXPECT_FALSE(est[1].trusted());
  std::vector<std::vector<double>> bad{{1.0, 2.0}};
  EXPECT_THROW(estimate_cgf(x, 1, bad, 4.0), ConfigError);
  EXPECT_THROW(estimate_cgf(x, 1, lambdas, 0.0), DomainError);
  EXPECT_THROW(estimate_cgf(x, 3, lambdas, 1.0), StatisticsError);
}

TEST(EstimateGFunctional, ConstantFunctionIsExact) {
  const auto g = make_test_function("const", {1.5}, 2);
  std::vector<double> x(2 * 400, 0.3);
  const auto e = estimate_gfunctional(x, 2, g, 8.0);
  EXPECT_NEAR(e.value, -1.5, 1e-13);
  EXPECT_NEAR(e.ci_halfwidth, 0.0, 1e-13);
  EXPECT_TRUE(e.lower_bound_ok);
  EXPECT_EQ(e.shift, 0.0);
  EXPECT_NEAR(e.lower_bound, -1.5 + std::log(0.5) / 8.0, 1e-15);
}

TEST(EstimateGFunctional, ShiftsNonNegativeFunctions) {
  const auto g = shifted(make_test_function("negsqrt", {}, 1), -2.0);  // sup = 1
  std::vector<double> x(400, 0.0);
  const auto e = estimate_gfunctional(x, 1, g, 2.0);
  EXPECT_EQ(e.shift, 2.0);
  EXPECT_NEAR(e.value, 1.0 - 2.0, 1e-13);
}

TEST(RunWindows, ZeroSigmaIsIdenticallyZero) {
  const auto g = small_grid(OperatorKind::Heat);
  EquationSpec eq;
  eq.sigma = SigmaFunction::constant(0.0);
  eq.c_h = 3.0;
  const NoiseSource noise(CovarianceKernel::white(), g);
  const std::vector<Window> w{{0, 4}, {1, 2}};
  const auto s = run_windows(eq, g, noise, TimePoints{{0.25, 0.5}}, w, 10, 1, 1);
  for (double v : s.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(RunWindows, ThreadCountAndOffsetDoNotChangeSamples) {
  const auto g = small_grid(OperatorKind::Heat);
  EquationSpec eq;
  eq.sigma = SigmaFunction::tanh(1.0, 1.0);
  eq.c_h = 0.5;
  const NoiseSource noise(CovarianceKernel::white(), g);
  const std::vector<Window> w{{0, 4}};
  const TimePoints tp{{0.5}};
  const auto one = run_windows(eq, g, noise, tp, w, 8, 42, 1);
  const auto three = run_windows(eq, g, noise, tp, w, 8, 42, 3);
  EXPECT_EQ(one.data(), three.data());
  const auto tail = run_windows(eq, g, noise, tp, w, 3, 42, 1, 5);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(tail.at(p, 0, 0), one.at(p + 5, 0, 0));
  const auto other = run_windows(eq, g, noise, tp, w, 8, 43, 1);
  EXPECT_NE(other.data(), one.data());
}

TEST(RunWindows, TensorLayout) {
  SampleTensor t(2, 3, 4);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t w = 0; w < 3; ++w)
      for (std::size_t i = 0; i < 4; ++i) t.at(p, w, i) = 100.0 * p + 10.0 * w + i;
  const auto m = t.window_matrix(1);
  ASSERT_EQ(m.size(), 8u);
  EXPECT_EQ(m[4 + 2], 112.0);
  const auto c = t.column(2, 3);
  EXPECT_EQ(c, (std::vector<double>{23.0, 123.0}));
}

class WindowVariance : public ::testing::TestWithParam<OperatorKind> {};

// Linear equation: the sample variance of F^0_4(t) must match the
// deterministic quadrature of the covariance functional.
TEST_P(WindowVariance, MatchesQuadrature) {
  const auto kind = GetParam();
  const auto g = small_grid(kind);
  EquationSpec eq;
  eq.kind = kind;
  eq.sigma = SigmaFunction::constant(1.0);
  const auto white = CovarianceKernel::white();
  const NoiseSource noise(white, g);
  const std::vector<Window> w{{0, 4}};
  const std::size_t n = 4000;
  const auto s = run_windows(eq, g, noise, TimePoints{{0.5}}, w, n, 11, 1);
  const auto mv = stats::mean_var(s.column(0, 0));
  const double exact = window_pair_covariance(kind, white, {0.5, 0, 4}, {0.5, 0, 4});
  const double rel_se = std::sqrt(2.0 / n);
  EXPECT_NEAR(mv.variance / exact, 1.0, 5 * rel_se + 0.03) << mv.variance << " vs " << exact;
  EXPECT_LT(std::abs(mv.mean), 5 * std::sqrt(exact / n));
}

INSTANTIATE_TEST_SUITE_P(Operators, WindowVariance,
                         ::testing::Values(OperatorKind::Heat, OperatorKind::Wave));

TEST(EnsembleConfig, Validation) {
  GridConfig g;
  g.r_max = 32;
  EnsembleConfig c;
  c.r_ladder = {8, 16, 32};
  EXPECT_NO_THROW(c.validate(g));
  c.r_ladder = {8, 64};
  EXPECT_THROW(c.validate(g), ConfigError);
  c.r_ladder = {16, 8};
  EXPECT_THROW(c.validate(g), ConfigError);
  c.r_ladder = {8};
  c.n_paths = 50;
  EXPECT_THROW(c.validate(g), ConfigError);
  c.n_paths = 100;
  c.batch_count = 4;
  EXPECT_THROW(c.validate(g), ConfigError);
}
