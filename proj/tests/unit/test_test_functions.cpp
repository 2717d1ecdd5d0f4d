#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ldplab/errors.hpp"
#include "ldplab/test_functions.hpp"

using namespace ldplab;

namespace {

// Largest |g(x) - g(y)| / |x - y| over random pairs.
double empirical_lipschitz(const ConcaveTestFunction& f, std::size_t pairs = 20000) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(f.k), y(f.k);
  double best = 0.0;
  for (std::size_t n = 0; n < pairs; ++n) {
    double d2 = 0.0;
    for (std::size_t d = 0; d < f.k; ++d) {
      x[d] = u(rng);
      y[d] = x[d] + 0.1 * u(rng);
      d2 += (x[d] - y[d]) * (x[d] - y[d]);
    }
    if (d2 > 0) best = std::max(best, std::abs(f(x) - f(y)) / std::sqrt(d2));
  }
  return best;
}

}  // namespace

TEST(TestFunctions, NegSqrtConstants) {
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto f = make_test_function("negsqrt", {}, k);
    EXPECT_EQ(f.k, k);
    const std::vector<double> zero(k, 0.0);
    EXPECT_DOUBLE_EQ(f(zero), -1.0);
    EXPECT_EQ(f.sup, -1.0);
    EXPECT_NEAR(f.m_g, std::sqrt(1.0 + k), 1e-12);
    EXPECT_LE(empirical_lipschitz(f), f.lipschitz + 1e-12);
    EXPECT_GT(empirical_lipschitz(f), 0.9 * f.lipschitz);
  }
  const auto c = make_test_function("negsqrt", {0.5, -0.5}, 2);
  EXPECT_DOUBLE_EQ(c(std::vector<double>{0.5, -0.5}), -1.0);
  EXPECT_NEAR(c.m_g, std::sqrt(1.0 + 1.5 * 1.5 * 2), 1e-12);
  EXPECT_THROW(make_test_function("negsqrt", {1.0}, 2), ConfigError);
}

TEST(TestFunctions, MinAffineConstants) {
  // min(-1, 2x, -x - 3) on R
  const auto f = make_test_function("negconst_minaffine", {1.0, 2.0, 0.0, -1.0, -3.0}, 1);
  EXPECT_DOUBLE_EQ(f(std::vector<double>{0.0}), -3.0);
  EXPECT_DOUBLE_EQ(f(std::vector<double>{-1.0}), -2.0);
  EXPECT_DOUBLE_EQ(f(std::vector<double>{1.0}), -4.0);
  EXPECT_NEAR(f.m_g, 4.0, 1e-12);
  EXPECT_EQ(f.lipschitz, 2.0);
  EXPECT_LE(empirical_lipschitz(f), 2.0 + 1e-12);
  EXPECT_LE(f(std::vector<double>{0.3}), f.sup);
  EXPECT_THROW(make_test_function("negconst_minaffine", {0.0, 1.0, 0.0}, 1), ConfigError);
  EXPECT_THROW(make_test_function("negconst_minaffine", {1.0, 1.0}, 1), ConfigError);
}

TEST(TestFunctions, ConstantAndUnknown) {
  const auto f = make_test_function("const", {2.0}, 3);
  EXPECT_EQ(f(std::vector<double>{7, 8, 9}), -2.0);
  EXPECT_EQ(f.m_g, 2.0);
  EXPECT_EQ(f.lipschitz, 0.0);
  EXPECT_THROW(make_test_function("const", {-2.0}, 1), ConfigError);
  EXPECT_THROW(make_test_function("bogus", {}, 1), ConfigError);
  EXPECT_THROW(make_test_function("negsqrt", {}, 0), ConfigError);
}

TEST(TestFunctions, ConcavityCheckRejectsConvex) {
  ConcaveTestFunction f;
  f.k = 1;
  f.g = [](std::span<const double> x) { return x[0] * x[0]; };
  EXPECT_FALSE(check_concavity(f));
  f.g = [](std::span<const double> x) { return -std::abs(x[0]); };
  EXPECT_TRUE(check_concavity(f));
}

TEST(TestFunctions, ClosureUnderMinAndShift) {
  const auto a = make_test_function("negsqrt", {0.0}, 1);
  const auto b = make_test_function("negsqrt", {3.0}, 1);
  const auto m = min_of(a, b);
  EXPECT_TRUE(check_concavity(m));
  // Maximizer at x = 1.5 where both equal -sqrt(1 + 2.25).
  EXPECT_NEAR(m.sup, -std::sqrt(3.25), 1e-5);
  EXPECT_EQ(m.lipschitz, 1.0);
  EXPECT_NEAR(m.m_g, std::sqrt(17.0), 1e-12);
  EXPECT_THROW(min_of(a, make_test_function("negsqrt", {}, 2)), ConfigError);

  const auto s = shifted(a, 0.5);
  EXPECT_DOUBLE_EQ(s(std::vector<double>{0.0}), -1.5);
  EXPECT_EQ(s.sup, -1.5);
  EXPECT_NEAR(s.m_g, a.m_g + 0.5, 1e-15);
}

TEST(TestFunctions, StrictlyNegative) {
  const auto a = make_test_function("negsqrt", {}, 1);
  EXPECT_EQ(strictly_negative(a).sup, a.sup);
  const auto up = shifted(a, -3.0);  // sup = 2
  const auto n = strictly_negative(up);
  EXPECT_EQ(n.sup, -1.0);
  EXPECT_DOUBLE_EQ(n(std::vector<double>{0.0}), -1.0);
}

TEST(TestFunctions, GridMg) {
  const auto f = make_test_function("negsqrt", {}, 2);
  EXPECT_NEAR(grid_m_g(f, 10), std::sqrt(3.0), 1e-12);
}
