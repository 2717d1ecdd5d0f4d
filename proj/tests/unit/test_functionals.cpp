#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ldplab/errors.hpp"
#include "ldplab/functionals.hpp"

using namespace ldplab;

namespace {

GridConfig grid() {
  GridConfig g;
  g.dx = 0.1;
  g.dt = 0.004;
  g.T = 1.0;
  g.r_max = 8.0;
  g.pad = 2.0;
  return g;
}

std::vector<double> field_of(const GridConfig& g, double (*f)(double), double offset) {
  std::vector<double> u(g.node_count());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = offset + f(g.x(j));
  return u;
}

}  // namespace

TEST(SnapWindow, OnGridEndsAreExact) {
  const auto g = grid();
  const auto w = snap_window(g, 1.0, 3.0);
  EXPECT_NEAR(w.a, 1.0, 1e-12);
  EXPECT_NEAR(w.b, 3.0, 1e-12);
  EXPECT_LT(w.snap_error, 1e-12);
  EXPECT_EQ(w.j1 - w.j0, 20u);
}

TEST(SnapWindow, OffGridEndsMoveOutward) {
  const auto g = grid();
  const auto w = snap_window(g, 1.03, 2.96);
  EXPECT_NEAR(w.a, 1.0, 1e-12);
  EXPECT_NEAR(w.b, 3.0, 1e-12);
  EXPECT_NEAR(w.snap_error, 0.04, 1e-12);
  EXPECT_LE(w.snap_error, g.dx);
}

TEST(SnapWindow, Rejections) {
  const auto g = grid();
  EXPECT_THROW(snap_window(g, 3.0, 1.0), ConfigError);
  EXPECT_THROW(snap_window(g, g.x_lo() - 1.0, 1.0), ConfigError);
  EXPECT_THROW(snap_window(g, 0.0, g.x_hi() + 1.0), ConfigError);
  EXPECT_THROW(snap_window(g, 0.0, std::nan("")), ConfigError);
}

TEST(SpatialAverage, ConstantFieldAtMeanIsZero) {
  const auto g = grid();
  EquationSpec eq;
  eq.c_h = 2.5;
  const std::vector<double> u(g.node_count(), 2.5);
  EXPECT_EQ(spatial_average(u, 0.5, 0.0, 8.0, eq, g), 0.0);
  EXPECT_THROW(spatial_average(u, 0.5, 1.0, 1.0, eq, g), ConfigError);
}

TEST(SpatialAverage, LinearFieldIsExact) {
  const auto g = grid();
  EquationSpec eq;
  eq.c_h = 1.0;
  const auto u = field_of(g, [](double x) { return x; }, 1.0);
  const double a = -1.5, b = 4.0;
  EXPECT_NEAR(spatial_average(u, 0.3, a, b, eq, g), 0.5 * (b * b - a * a), 1e-12);
}

TEST(SpatialAverage, QuadraticFieldHasTrapezoidError) {
  const auto g = grid();
  EquationSpec eq;
  const auto u = field_of(g, [](double x) { return x * x; }, 0.0);
  const double a = 0.0, b = 5.0;
  const double exact = (b * b * b - a * a * a) / 3.0;
  EXPECT_NEAR(spatial_average(u, 0.0, a, b, eq, g), exact + (b - a) * g.dx * g.dx / 6.0, 1e-10);
}

TEST(SpatialAverage, WaveMeanMovesWithTime) {
  const auto g = grid();
  EquationSpec eq;
  eq.kind = OperatorKind::Wave;
  eq.c_w1 = 1.0;
  eq.c_w2 = 2.0;
  const double t = 0.25;
  const std::vector<double> u(g.node_count(), 1.0 + 2.0 * t);
  EXPECT_NEAR(spatial_average(u, t, 0.0, 4.0, eq, g), 0.0, 1e-12);
  EXPECT_NEAR(spatial_average(u, 0.0, 0.0, 4.0, eq, g), 4.0 * 2.0 * t, 1e-12);
}

TEST(MultiTimeVector, ComponentsAndNormalization) {
  const auto g = grid();
  EquationSpec eq;
  TimePoints tp{{0.2, 0.2, 0.8}};
  tp.validate(g.T);
  std::vector<std::vector<double>> snaps;
  for (double c : {1.0, 2.0, -3.0}) snaps.emplace_back(g.node_count(), c);
  const auto s = multi_time_vector(snaps, tp, 2.0, 6.0, eq, g);
  ASSERT_EQ(s.values.size(), 3u);
  EXPECT_NEAR(s.values[0], 4.0, 1e-12);
  EXPECT_NEAR(s.values[1], 8.0, 1e-12);
  EXPECT_NEAR(s.values[2], -12.0, 1e-12);
  EXPECT_NEAR(s.normalized[2], -3.0, 1e-12);
  snaps.pop_back();
  EXPECT_THROW(multi_time_vector(snaps, tp, 2.0, 6.0, eq, g), ConfigError);
  EXPECT_THROW((TimePoints{{}}).validate(1.0), ConfigError);
  EXPECT_THROW((TimePoints{{1.5}}).validate(1.0), ConfigError);
}

TEST(WindowDifference, LinearFieldGivesShiftTimesWidth) {
  const auto g = grid();
  EquationSpec eq;
  const auto u = field_of(g, [](double x) { return x; }, 0.0);
  // int_L^{L+th} x - int_{L+R}^{L+R+th} x = -R th
  EXPECT_NEAR(window_difference(u, 0.0, 0.5, 4.0, 2.0, g, eq), -8.0, 1e-12);
  EXPECT_NEAR(window_difference(u, 0.0, 1.0, 0.0, 2.0, g, eq), 0.0, 1e-14);
}
