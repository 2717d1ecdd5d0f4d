#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ldplab {

enum class OperatorKind { Heat, Wave };

std::string_view to_string(OperatorKind kind);
/// Accepts "heat" or "wave".
OperatorKind parse_operator_kind(std::string_view name);

/// Fundamental solution of d/dt - (1/2) d2/dx2 (heat) or d2/dt2 - d2/dx2 (wave).
/// Throws DomainError unless t > 0 and x is finite.
double greens_eval(OperatorKind kind, double t, double x);

/// Total integral of greens_eval(kind, t, .) over the real line: 1 (heat) or t (wave).
double greens_mass(OperatorKind kind, double t);

/// Smallest C with (1/2) 1{|x|<t} <= C (2 pi t)^(-1/2) exp(-x^2/(2t)) for all
/// x and all t in (0, horizon]: sqrt(2 pi horizon) exp(horizon/2) / 2.
double wave_heat_domination_constant(double horizon);

/// Tail envelope |f(x)| <= amplitude * exp(-rate * |x|^exponent) for |x| > threshold.
struct DecayEnvelope {
  double amplitude = 1.0;
  double rate = 1.0;
  double exponent = 2.0;
  double threshold = 0.0;

  double operator()(double x) const;
  /// A point beyond which the envelope is below `fraction` * amplitude.
  double reach(double fraction = 1e-20) const;
};

/// Spatial covariance of the driving noise: either the Dirac mass (white
/// noise) or an even, nonnegative, nonnegative-definite density with a
/// stretched-exponential tail.
class CovarianceKernel {
 public:
  using Shape = std::function<double(double)>;

  static CovarianceKernel white();
  /// `shape` is evaluated at |x| only, so the kernel is even by construction.
  static CovarianceKernel density(std::string name, Shape shape, DecayEnvelope envelope);

  bool is_white() const noexcept { return !shape_; }
  const std::string& name() const noexcept { return name_; }

  /// Density value. Throws KernelError for the white kernel.
  double operator()(double x) const;

  const DecayEnvelope& envelope() const noexcept { return envelope_; }

  /// Decay exponent eta; +infinity for white noise.
  double decay_exponent() const noexcept;

  /// e-folding length (1/rate)^(1/eta); 0 for white noise.
  double correlation_length() const noexcept;

  /// Half-width beyond which the density is negligible (envelope below 1e-20).
  double support_radius() const noexcept;

  /// L1 norm, computed once and cached (1 for white noise).
  double l1_norm() const;

 private:
  struct L1Cache;

  std::string name_ = "white";
  Shape shape_;
  DecayEnvelope envelope_{0.0, std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity(), 0.0};
  std::shared_ptr<L1Cache> l1_;
};

/// Presets: "white", "gauss" = exp(-x^2), "stretched15" = exp(-|x|^1.5),
/// "selfconv" = (f * f)(x) with f(x) = exp(-2^1.5 |x|^1.5). Density presets
/// are rescaled to amplitude * shape(x / length); white ignores both.
CovarianceKernel make_kernel_preset(std::string_view name, double amplitude = 1.0,
                                    double length = 1.0);
std::vector<std::string> kernel_preset_names();

/// L1 norm of the kernel (white -> 1 by convention). Relative quadrature
/// error below 1e-8; throws KernelError when the shape is not integrable.
double kernel_l1(const CovarianceKernel& kernel);

/// Eigenvalues of the circulant matrix whose first row is
/// scale * kernel(dx * min(m, size - m)), m = 0..size-1.
std::vector<double> sampled_circulant_spectrum(const CovarianceKernel& kernel, double dx,
                                               std::size_t size, double scale = 1.0);

/// A function with a recorded tail envelope, as consumed by the
/// convolution-decay analysis. A point mass is the white-noise surrogate.
struct DecayingFunction {
  std::function<double(double)> f;
  DecayEnvelope envelope;
  bool point_mass = false;

  static DecayingFunction point();
  static DecayingFunction from_kernel(const CovarianceKernel& kernel);

  double l1_norm() const;
};

double convolve_at(const DecayingFunction& f1, const DecayingFunction& f2, double x);

struct DecayFit {
  std::vector<double> x;
  std::vector<double> convolution;
  std::vector<double> bound;        ///< right-hand side of the decay bound; NaN where not applicable
  double bound_exponent = 0.0;      ///< beta1 ^ beta2
  double bound_rate = 0.0;          ///< alpha1/2^beta1 ^ alpha2/2^beta2
  double bound_constant = 0.0;      ///< 2 (C1 |f2|_1 v C2 |f1|_1)
  double fitted_rate = 0.0;         ///< -slope of log|f1*f2| against |x|^(beta1^beta2)
  double fitted_intercept = 0.0;
  std::size_t fit_points = 0;
  bool bound_respected = true;
};

/// (f1 * f2)(x) on the grid by quadrature, checked against the product
/// envelope bound for |x| > 2 (K1 v K2), with a least-squares fit of the
/// log-magnitude over the outer half of the grid. Throws ConfigError when
/// the grid does not reach beyond 2 (K1 v K2).
DecayFit convolution_decay_fit(const DecayingFunction& f1, const DecayingFunction& f2,
                               std::span<const double> x_grid);

struct SmoothedDecay {
  double exponent = 0.0;           ///< fitted p in log h ~ c - a |x|^p
  double rate = 0.0;               ///< fitted a
  double expected_exponent = 0.0;  ///< 2 ^ eta
  double residual_rms = 0.0;
  std::vector<double> x;
  std::vector<double> values;
  bool stretched_exponential = false;  ///< fitted rate > 0 and values decrease monotonically
};

/// Decay of (G~ * Gamma)(x) with G~(x) = exp(-x^2 / (2T)).
SmoothedDecay smoothed_kernel_decay(const CovarianceKernel& kernel, double horizon);

}  // namespace ldplab
