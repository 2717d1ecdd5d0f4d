#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ldplab/kernels.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab/solver.hpp"

namespace ldplab {

/// Tensor-product lattice in R^k. Flat index: the last axis varies fastest.
struct Lattice {
  std::vector<std::vector<double>> axes;

  static Lattice uniform(std::size_t k, double lo, double hi, std::size_t count);

  std::size_t k() const noexcept { return axes.size(); }
  std::size_t size() const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> idx) const;
  std::vector<double> point(std::size_t flat) const;
  std::vector<std::vector<double>> points() const;
  /// Smallest spacing along `axis` (0 for single-point axes).
  double spacing(std::size_t axis) const;
};

/// Minimum discrete second difference along all lattice lines, using only
/// consecutive triples whose points are all in `mask` (empty = all).
/// Nonuniform spacing is handled by divided differences scaled by the
/// spacing; returns +inf when no triple qualifies.
double min_second_difference(const Lattice& lattice, std::span<const double> values,
                             const std::vector<bool>& mask = {});

struct LadderPoint {
  double R = 0.0;
  double value = 0.0;
  double ci = 0.0;
};

struct Extrapolation {
  double value = 0.0;         ///< Lambda_inf estimate
  double slope = 0.0;         ///< a in Lambda_R = Lambda_inf + a / R
  double max_residual = 0.0;  ///< largest |residual_i|
  bool used_fallback = false; ///< value taken from the largest R
  bool flagged = false;       ///< fewer than 3 points
  bool monotone = true;       ///< ladder values monotone in R
  std::string note;
};

/// Weighted (1/ci^2) fit of Lambda_R = Lambda_inf + a / R. Falls back to the
/// largest-R value when some |residual_i| exceeds ci_i, and (flagged) when
/// fewer than 3 points are given. Ordinary least squares if any ci <= 0.
Extrapolation extrapolate_cgf(std::span<const LadderPoint> ladder);

struct CgfTable {
  Lattice lambda;
  std::vector<double> ladder;
  /// per_r[r][j]: estimate at ladder[r] and lattice point j.
  std::vector<std::vector<CgfEstimate>> per_r;
  std::vector<double> extrapolated;
  std::vector<Extrapolation> fits;
  std::vector<bool> trusted;  ///< at least one trusted ladder point fed the extrapolation

  std::size_t k() const noexcept { return lambda.k(); }
};

/// c_qv[r] is the QV bound per unit length at ladder[r] (NaN disables the guard).
CgfTable build_cgf_table(const SampleTensor& samples, std::span<const double> ladder,
                         const Lattice& lambda, std::span<const double> c_qv,
                         const CgfOptions& options = {});

struct RateFunctionGrid {
  Lattice x;
  std::vector<double> values;
  std::vector<bool> boundary_flag;  ///< maximizing lambda sits on the edge of the trusted set
  std::vector<std::size_t> argmax_lambda;
  std::size_t argmin = 0;
};

/// I(x) = max over trusted lattice lambda of (lambda . x - Lambda(lambda)).
/// Throws ConfigError on empty grids or when no lambda is trusted.
RateFunctionGrid legendre_transform(const Lattice& lambda, std::span<const double> values,
                                    const std::vector<bool>& trusted, const Lattice& x);
RateFunctionGrid legendre_transform(const CgfTable& table, const Lattice& x);

/// max over the x-lattice of (lambda . x - I(x)) at every lambda point.
std::vector<double> biconjugate(const RateFunctionGrid& rate, const Lattice& lambda);

struct GaussianReference {
  double v_R = 0.0;  ///< Var(F_R(t)) / R
  double v = 0.0;    ///< R -> infinity limit
  double cgf(double lambda) const { return 0.5 * lambda * lambda * v; }
  /// x^2 / (2v); for v = 0: 0 at x = 0 and +inf elsewhere.
  double rate(double x) const;
};

/// Exact variance structure for constant sigma; throws PreconditionError otherwise.
GaussianReference gaussian_reference(const EquationSpec& eq, const CovarianceKernel& gamma, double t,
                                     double R);

/// Worst-case error of the lattice conjugate of lambda^2 v / 2 at x:
/// 0.5 (dlambda |x|)^2 / v for |x| >= v/2, else v dlambda^2 / 8.
double gaussian_conjugate_tolerance(double x, double v, double dlambda);

}  // namespace ldplab
