#include <gtest/gtest.h>

#include <cmath>

#include "ldplab/errors.hpp"
#include "ldplab/noise.hpp"

using namespace ldplab;

namespace {

GridConfig grid() {
  GridConfig g;
  g.dx = 0.1;
  g.dt = 0.004;
  g.T = 1.0;
  g.r_max = 6.0;
  g.pad = 8.0;
  return g;
}

std::vector<NoiseSlice> slices(const NoiseSource& src, std::size_t count) {
  std::vector<NoiseSlice> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(src.sample({3, static_cast<std::uint32_t>(i / 100), static_cast<std::uint32_t>(i % 100)}));
  }
  return out;
}

}  // namespace

TEST(WhiteNoise, MomentsAndShape) {
  const auto g = grid();
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  for (std::uint32_t step = 0; step < 200; ++step) {
    const auto slice = sample_white_slice(g, {11, 0, step});
    ASSERT_EQ(slice.values.size(), g.interior_count());
    EXPECT_EQ(slice.step_index, step);
    EXPECT_EQ(slice.grid_id, g.id());
    for (double v : slice.values) {
      s += v;
      s2 += v * v;
      ++n;
    }
  }
  const double var = g.dt / g.dx;
  const double mean = s / static_cast<double>(n);
  EXPECT_LT(std::abs(mean), 5 * std::sqrt(var / static_cast<double>(n)));
  // Var of the sample variance is about 2 var^2 / n.
  EXPECT_NEAR(s2 / static_cast<double>(n), var, 5 * var * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(WhiteNoise, KeyedDeterminism) {
  const auto g = grid();
  const auto a = sample_white_slice(g, {1, 2, 3});
  EXPECT_EQ(a.values, sample_white_slice(g, {1, 2, 3}).values);
  EXPECT_NE(a.values, sample_white_slice(g, {1, 2, 4}).values);
  EXPECT_NE(a.values, sample_white_slice(g, {1, 3, 3}).values);
  EXPECT_NE(a.values, sample_white_slice(g, {2, 2, 3}).values);
}

TEST(WhiteNoise, PassesCovarianceCheck) {
  const auto g = grid();
  const NoiseSource src(CovarianceKernel::white(), g);
  const auto sl = slices(src, 10000);
  const auto chk = empirical_covariance_check(sl, CovarianceKernel::white(), g);
  EXPECT_TRUE(chk.pass) << "max |z| = " << chk.max_abs_z;
  EXPECT_NEAR(chk.target[0], g.dt / g.dx, 1e-15);
  EXPECT_EQ(chk.target[1], 0.0);
}

TEST(ColoredNoise, SpectrumAndEmbedding) {
  const auto g = grid();
  const auto s = ColoredSampler::build(make_kernel_preset("gauss"), g);
  EXPECT_EQ(s.size(), g.interior_count());
  EXPECT_GE(s.embedding_size(), 2 * s.size());
  // 2^a 3^b 5^c length.
  std::size_t m = s.embedding_size();
  for (std::size_t p : {2u, 3u, 5u}) {
    while (m % p == 0) m /= p;
  }
  EXPECT_EQ(m, 1u);
  EXPECT_LT(s.clip_fraction(), 1e-6);
  for (double l : s.spectrum()) EXPECT_GE(l, 0.0);
  EXPECT_THROW(ColoredSampler::build(CovarianceKernel::white(), g), ConfigError);
}

TEST(ColoredNoise, PassesCovarianceCheck) {
  const auto g = grid();
  const auto gamma = make_kernel_preset("gauss");
  const NoiseSource src(gamma, g);
  const auto sl = slices(src, 10000);
  const auto chk = empirical_covariance_check(sl, gamma, g);
  EXPECT_TRUE(chk.pass) << "max |z| = " << chk.max_abs_z;
  EXPECT_NEAR(chk.target[0], g.dt * gamma(0.0), 1e-15);
  EXPECT_NEAR(chk.target[5], g.dt * gamma(0.5), 1e-15);
}

TEST(ColoredNoise, CheckDetectsTheWrongKernel) {
  const auto g = grid();
  const NoiseSource src(make_kernel_preset("gauss"), g);
  const auto sl = slices(src, 10000);
  EXPECT_FALSE(empirical_covariance_check(sl, make_kernel_preset("gauss", 1.0, 2.0), g).pass);
  EXPECT_THROW(empirical_covariance_check(std::span(sl).first(500), make_kernel_preset("gauss"), g),
               StatisticsError);
}

TEST(ColoredNoise, PairedStepsIndependentOfCallOrder) {
  const auto g = grid();
  const NoiseSource src(make_kernel_preset("stretched15"), g);
  auto ws = src.make_workspace();
  std::vector<double> s3(g.interior_count()), s2(g.interior_count()), s2b(g.interior_count());
  src.fill({5, 1, 3}, s3, ws);
  src.fill({5, 1, 2}, s2, ws);
  auto fresh = src.make_workspace();
  src.fill({5, 1, 2}, s2b, fresh);
  EXPECT_EQ(s2, s2b);
  EXPECT_NE(s2, s3);
  EXPECT_EQ(s3, src.sample({5, 1, 3}).values);
}

TEST(ColoredNoise, IndefiniteKernelIsRejected) {
  const auto g = grid();
  // A box is not positive definite: its spectrum is a sinc with negative lobes.
  const auto box = CovarianceKernel::density("box", [](double x) { return x < 1.0 ? 1.0 : 0.0; }, {1.0, 1.0, 2.0, 1.0});
  EXPECT_THROW(ColoredSampler::build(box, g), EmbeddingError);
}
