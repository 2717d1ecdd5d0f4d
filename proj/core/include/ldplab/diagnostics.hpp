#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldplab/grid.hpp"
#include "ldplab/kernels.hpp"
#include "ldplab/solver.hpp"
#include "ldplab/test_functions.hpp"

namespace ldplab {

/// Monte Carlo budget shared by the statistical checks.
struct RunSpec {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct QvBound {
  double c_hat = 0.0;  ///< QV bound per unit window length
  double qv = 0.0;     ///< c_hat * R
  double t = 0.0;
  double R = 0.0;
};

/// sup |sigma|^2 times Var(F_R(t)) of the sigma = 1 field, divided by R.
QvBound qv_bound(const EquationSpec& eq, const CovarianceKernel& gamma, double t, double R);

/// QV bound of F^L_{L+theta}(t) - F^{L+R}_{L+R+theta}(t).
double window_difference_qv(const EquationSpec& eq, const CovarianceKernel& gamma, double t,
                            double L, double R, double theta);

/// max over the pairs of QV(F_R(t) - F_R(s)) / (R |t - s|).
double increment_constant(const EquationSpec& eq, const CovarianceKernel& gamma, double R,
                          std::span<const std::pair<double, double>> time_pairs);

struct TailRow {
  double r = 0.0;          ///< as passed in
  double threshold = 0.0;  ///< s with P(|X| >= s) examined
  std::size_t exceed = 0;
  double empirical = 0.0;
  double bound = 0.0;      ///< 2 exp(-s^2 / (2 V))
  double slack = 0.0;      ///< Clopper-Pearson 99% upper bound minus empirical
  bool pass = true;
};

struct TailReport {
  std::vector<TailRow> rows;
  double variance_bound = 0.0;
  std::size_t n = 0;
  bool pass = true;
};

/// P(|X| >= s_i) <= 2 exp(-s_i^2 / (2 V)) + slack for each threshold.
/// Throws StatisticsError below 10^4 samples or on non-finite samples.
TailReport tail_bound_check_thresholds(std::span<const double> samples,
                                       std::span<const double> thresholds, double variance_bound);

/// F_R(t) form: thresholds r R and V = c_hat R.
TailReport tail_bound_check(std::span<const double> samples, std::span<const double> r_grid,
                            double c_hat, double R);

/// Thresholds s = z sqrt(V) for z = z_lo .. z_hi (count points).
std::vector<double> standardized_grid(double variance_bound, double z_lo, double z_hi, std::size_t count);

struct LipschitzMap {
  std::string name = "clamp";
  std::function<double(double)> f;
  double lipschitz = 1.0;

  /// clamp(x, -level, level)
  static LipschitzMap clamped_identity(double level);
};

struct CovDecayReport {
  std::vector<double> thetas;
  std::vector<double> covariance;
  std::vector<double> standard_error;  ///< jackknife
  std::vector<double> oracle;          ///< exact covariance for constant sigma (NaN otherwise)
  double fitted_slope = 0.0;           ///< of log|Cov| against theta^(2 ^ eta)
  double decay_exponent = 2.0;         ///< 2 ^ eta
  bool monotone = false;               ///< no significant increase between consecutive thetas
  bool inconclusive = false;           ///< smallest-theta covariance within 2 SE of 0
  double smallest_detected_theta = 0.0;  ///< first theta with |Cov| > 2 SE (NaN if none)
  std::size_t n_paths = 0;
  bool pass = false;
};

CovDecayReport covariance_decay_probe(const EquationSpec& eq, const CovarianceKernel& gamma,
                                      const GridConfig& grid, double t, double L, double R,
                                      std::span<const double> thetas, const LipschitzMap& phi,
                                      const LipschitzMap& psi, const RunSpec& run);

struct ShiftRow {
  double shift = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;
};

struct ShiftReport {
  std::vector<ShiftRow> rows;
  double threshold = 0.01;  ///< per-shift level after Bonferroni
  bool pass = true;
};

/// F^0_b(t) from one ensemble against F^a_{a+b}(t) from an independent one
/// (seed + 1); a = 0 compares the first ensemble with itself.
ShiftReport shift_invariance_test(const EquationSpec& eq, const CovarianceKernel& gamma,
                                  const GridConfig& grid, double t, double b,
                                  std::span<const double> shifts, const RunSpec& run,
                                  double level = 0.01);

struct SubadditivityRow {
  double L = 0.0, R = 0.0;
  double minus_log_h_sum = 0.0;  ///< -log H_{L+R}
  double minus_log_h_l = 0.0;
  double minus_log_h_r = 0.0;
  double ci = 0.0;               ///< sum of the three CI halfwidths on the -log H scale
  double c_lip = 0.0;            ///< k Lip(g)^2 c_diff / 2
  double slack = 0.0;            ///< (m_g + 1)(L+R)^(1-beta) + c_lip (L+R)^(alpha+beta)
  double slack_explicit = 0.0;   ///< log 16 + denominator term + m_g (L+R)^(1-beta) + c_lip (L+R)^(alpha+beta)
  double margin = 0.0;           ///< slack - (lhs - rhs)
  bool trusted = true;
  bool pass = false;
};

struct LadderRow {
  double R = 0.0;
  double value = 0.0;  ///< (1/R) log H_R
  double ci = 0.0;
  double difference = 0.0;  ///< |value - previous value|
};

struct SubadditivityReport {
  std::vector<SubadditivityRow> rows;
  std::vector<LadderRow> ladder;
  bool cauchy_shrinking = false;
  bool inconclusive = false;
  bool pass = false;
};

/// alpha in (1/(2 ^ eta), 1), beta > 0, alpha + beta < 1. `ladder` may be empty.
SubadditivityReport subadditivity_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                                        const GridConfig& grid, const ConcaveTestFunction& g,
                                        std::span<const double> times,
                                        std::span<const std::pair<double, double>> pairs,
                                        double alpha, double beta, std::span<const double> ladder,
                                        const RunSpec& run);

struct IncrementRow {
  double gap = 0.0;
  double mean_square = 0.0;  ///< E|F_R(s+gap) - F_R(s)|^2 / R^2
  double standard_error = 0.0;
  double bound = 0.0;        ///< 4 C gap / R
  double fourth_moment = 0.0;  ///< E|dF/R|^4
  double fourth_bound = 0.0;   ///< 16 C^2 gap^2 / R^2
};

struct IncrementReport {
  std::vector<IncrementRow> rows;
  double c_hat = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  bool slope_ok = false;
  bool intercept_ok = false;
  bool moments_ok = false;
  bool skipped = false;
  std::string note;
  bool pass = false;
};

IncrementReport increment_scaling_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                                        const GridConfig& grid, double R, double base,
                                        std::span<const double> gaps, const RunSpec& run);

/// T^(q-q') (1 + Q!) 2^(q' + 1 + n/Q) / (1 - 2^(-(q-q') + n/Q)), Q = floor(n/(q-q')) + 1.
double compute_schied_constant(int n, double q, double q_prime, double T);

struct HolderRow {
  double M = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct HolderReport {
  std::vector<HolderRow> rows;
  double c_hat = 0.0;
  double c_t_delta = 0.0;
  double max_observed = 0.0;
  bool informative = false;  ///< some bound on the grid is below 1
  bool pass = true;
};

/// Discrete sup over all pairs of `time_points` + 1 equispaced times on [0, T].
/// An empty M grid is replaced by multiples of the level where the bound reaches 1.
HolderReport holder_tail_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                               const GridConfig& grid, double R, double delta,
                               std::span<const double> m_grid, const RunSpec& run,
                               std::size_t time_points = 64);

/// One verified inequality with its measured values and bounds.
struct CheckRecord {
  std::string name;
  std::map<std::string, double> measured;
  std::map<std::string, double> bounds;
  double margin = 0.0;
  bool pass = false;
  bool control = false;       ///< designed to fail
  bool inconclusive = false;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string note;
};

struct DiagnosticsReport {
  std::vector<CheckRecord> records;

  /// True iff every non-control, conclusive record passed.
  bool all_pass() const;
  /// True iff every control record failed.
  bool controls_failed() const;
};

}  // namespace ldplab
