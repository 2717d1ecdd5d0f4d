#include "ldplab/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "fftw_planner.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/quadrature.hpp"

namespace ldplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2 * integral over [0, inf) of an even function, unit panels up to `reach`.
quad::Result integrate_even(const quad::Integrand& f, double reach, double rel_tol) {
  auto r = quad::integrate_half_line(f, 0.0, std::ceil(std::max(reach, 1.0)), rel_tol, 0.0);
  r.value *= 2.0;
  r.error *= 2.0;
  return r;
}

// f(x) = exp(-2^1.5 |x|^1.5); selfconv is f * f.
double selfconv_factor(double x) { return std::exp(-2.0 * std::numbers::sqrt2 * std::pow(std::abs(x), 1.5)); }

double selfconv_shape(double x) {
  auto integrand = [x](double y) { return selfconv_factor(y) * selfconv_factor(x - y); };
  const double lo = std::min(0.0, x) - 6.0;
  const double hi = std::max(0.0, x) + 6.0;
  return quad::integrate_real_line(integrand, lo, hi, 1e-12, 0.0).value;
}

// Ordinary least squares y = c + s x. Returns {c, s, rss}.
struct Line {
  double intercept, slope, rss;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double s = sxx > 0 ? sxy / sxx : 0.0;
  const double c = my - s * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - c - s * x[i];
    rss += r * r;
  }
  return {c, s, rss};
}

}  // namespace

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::string_view to_string(OperatorKind kind) {
  return kind == OperatorKind::Heat ? "heat" : "wave";
}

OperatorKind parse_operator_kind(std::string_view name) {
  if (name == "heat") return OperatorKind::Heat;
  if (name == "wave") return OperatorKind::Wave;
  throw ConfigError("unknown operator kind '" + std::string(name) + "' (expected heat or wave)");
}

double greens_eval(OperatorKind kind, double t, double x) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("greens_eval: t must be positive");
  if (!std::isfinite(x)) throw DomainError("greens_eval: x must be finite");
  if (kind == OperatorKind::Heat) {
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
  }
  return std::abs(x) < t ? 0.5 : 0.0;
}

double greens_mass(OperatorKind kind, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("greens_mass: t must be positive");
  return kind == OperatorKind::Heat ? 1.0 : t;
}

double wave_heat_domination_constant(double horizon) {
  if (!(horizon > 0.0)) throw DomainError("wave_heat_domination_constant: horizon must be positive");
  // For fixed t the worst x sits at the edge of the light cone, and the
  // resulting ratio sqrt(2 pi t) e^{t/2} / 2 increases in t.
  return 0.5 * std::sqrt(2.0 * std::numbers::pi * horizon) * std::exp(0.5 * horizon);
}

double DecayEnvelope::operator()(double x) const {
  return amplitude * std::exp(-rate * std::pow(std::abs(x), exponent));
}

double DecayEnvelope::reach(double fraction) const {
  if (!std::isfinite(rate) || !std::isfinite(exponent)) return threshold;
  return threshold + std::pow(-std::log(fraction) / rate, 1.0 / exponent);
}

struct CovarianceKernel::L1Cache {
  std::once_flag once;
  double value = 0.0;
};

CovarianceKernel CovarianceKernel::white() { return CovarianceKernel{}; }

CovarianceKernel CovarianceKernel::density(std::string name, Shape shape, DecayEnvelope envelope) {
  if (!shape) throw ConfigError("density kernel '" + name + "' has no shape");
  if (!(envelope.rate > 0.0) || !(envelope.exponent > 1.0) || !(envelope.amplitude >= 0.0) ||
      !(envelope.threshold >= 0.0)) {
    throw ConfigError("density kernel '" + name +
                      "' needs rate > 0, exponent > 1, amplitude >= 0, threshold >= 0");
  }
  CovarianceKernel k;
  k.name_ = std::move(name);
  k.shape_ = std::move(shape);
  k.envelope_ = envelope;
  k.l1_ = std::make_shared<L1Cache>();
  return k;
}

double CovarianceKernel::operator()(double x) const {
  if (is_white()) throw KernelError("white noise kernel has no density");
  return shape_(std::abs(x));
}

double CovarianceKernel::decay_exponent() const noexcept {
  return is_white() ? kInf : envelope_.exponent;
}

double CovarianceKernel::correlation_length() const noexcept {
  return is_white() ? 0.0 : std::pow(1.0 / envelope_.rate, 1.0 / envelope_.exponent);
}

double CovarianceKernel::support_radius() const noexcept {
  return is_white() ? 0.0 : envelope_.reach(1e-20);
}

double CovarianceKernel::l1_norm() const {
  if (is_white()) return 1.0;
  std::call_once(l1_->once, [this] {
    const auto r = integrate_even([this](double x) { return std::abs(shape_(x)); },
                                  support_radius(), 1e-12);
    if (!(r.error <= 1e-8 * std::abs(r.value))) {
      throw KernelError("kernel '" + name_ + "': L1 quadrature did not reach 1e-8 relative error");
    }
    l1_->value = r.value;
  });
  return l1_->value;
}

CovarianceKernel make_kernel_preset(std::string_view name, double amplitude, double length) {
  if (name == "white") return CovarianceKernel::white();
  if (!(amplitude >= 0.0) || !(length > 0.0)) {
    throw ConfigError("kernel preset needs amplitude >= 0 and length > 0");
  }
  auto scaled = [amplitude, length](double (*shape)(double)) {
    return [=](double x) { return amplitude * shape(x / length); };
  };
  const std::string id(name);
  if (name == "gauss") {
    return CovarianceKernel::density(id, scaled([](double x) { return std::exp(-x * x); }),
                                     {amplitude, std::pow(length, -2.0), 2.0, 0.0});
  }
  if (name == "stretched15") {
    return CovarianceKernel::density(
        id, scaled([](double x) { return std::exp(-std::pow(std::abs(x), 1.5)); }),
        {amplitude, std::pow(length, -1.5), 1.5, 0.0});
  }
  if (name == "selfconv") {
    // |f| <= exp(-2^1.5 |x|^1.5) everywhere, so the convolution tail has rate
    // 2^1.5 / 2^1.5 = 1 and constant 2 |f|_1 = 2 Gamma(5/3).
    const double f_l1 = std::tgamma(5.0 / 3.0);
    return CovarianceKernel::density(id, scaled(&selfconv_shape),
                                     {2.0 * f_l1 * amplitude, std::pow(length, -1.5), 1.5, 0.0});
  }
  throw ConfigError("unknown kernel preset '" + id + "'");
}

std::vector<std::string> kernel_preset_names() { return {"white", "gauss", "stretched15", "selfconv"}; }

double kernel_l1(const CovarianceKernel& kernel) { return kernel.l1_norm(); }

std::vector<double> sampled_circulant_spectrum(const CovarianceKernel& kernel, double dx,
                                               std::size_t size, double scale) {
  if (kernel.is_white()) throw KernelError("circulant spectrum requested for white noise");
  if (size < 2 || !(dx > 0.0)) throw ConfigError("circulant spectrum needs size >= 2 and dx > 0");
  const std::size_t half = size / 2 + 1;
  double* row = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(half);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), row, spec, FFTW_ESTIMATE);
  }
  for (std::size_t m = 0; m < size; ++m) {
    row[m] = scale * kernel(dx * static_cast<double>(std::min(m, size - m)));
  }
  fftw_execute(plan);
  std::vector<double> eig(size);
  for (std::size_t k = 0; k < half; ++k) eig[k] = spec[k][0];
  for (std::size_t k = half; k < size; ++k) eig[k] = eig[size - k];
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(row);
  fftw_free(spec);
  return eig;
}

DecayingFunction DecayingFunction::point() {
  DecayingFunction d;
  d.point_mass = true;
  d.envelope = {0.0, kInf, kInf, 0.0};
  return d;
}

DecayingFunction DecayingFunction::from_kernel(const CovarianceKernel& kernel) {
  if (kernel.is_white()) return point();
  return {[kernel](double x) { return kernel(x); }, kernel.envelope(), false};
}

double DecayingFunction::l1_norm() const {
  if (point_mass) return 1.0;
  const double reach = envelope.reach(1e-20);
  return quad::integrate_real_line([this](double x) { return std::abs(f(x)); }, -reach, reach,
                                   1e-12, 0.0)
      .value;
}

double convolve_at(const DecayingFunction& f1, const DecayingFunction& f2, double x) {
  if (f1.point_mass && f2.point_mass) throw KernelError("convolution of two point masses");
  if (f2.point_mass) return f1.f(x);
  if (f1.point_mass) return f2.f(x);
  const double r1 = f1.envelope.reach(1e-20);
  const double r2 = f2.envelope.reach(1e-20);
  const double lo = std::min(-r2, x - r1);
  const double hi = std::max(r2, x + r1);
  auto integrand = [&](double y) { return f1.f(x - y) * f2.f(y); };
  return quad::integrate_real_line(integrand, lo, hi, 1e-12, 0.0).value;
}

DecayFit convolution_decay_fit(const DecayingFunction& f1, const DecayingFunction& f2,
                               std::span<const double> x_grid) {
  const double k = std::max(f1.envelope.threshold, f2.envelope.threshold);
  const double far = 2.0 * k;
  if (x_grid.empty() ||
      std::none_of(x_grid.begin(), x_grid.end(), [far](double x) { return std::abs(x) > far; })) {
    throw ConfigError("convolution_decay_fit: grid must extend beyond 2 (K1 v K2) = " +
                      std::to_string(far));
  }

  DecayFit fit;
  fit.bound_exponent = std::min(f1.envelope.exponent, f2.envelope.exponent);
  fit.bound_rate = std::min(f1.envelope.rate / std::pow(2.0, f1.envelope.exponent),
                            f2.envelope.rate / std::pow(2.0, f2.envelope.exponent));
  if (!std::isfinite(fit.bound_exponent)) throw KernelError("convolution of two point masses");
  fit.bound_constant =
      2.0 * std::max(f1.envelope.amplitude * f2.l1_norm(), f2.envelope.amplitude * f1.l1_norm());

  fit.x.assign(x_grid.begin(), x_grid.end());
  fit.convolution.resize(fit.x.size());
  fit.bound.assign(fit.x.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double x = fit.x[i];
    fit.convolution[i] = convolve_at(f1, f2, x);
    if (std::abs(x) > far) {
      fit.bound[i] =
          fit.bound_constant * std::exp(-fit.bound_rate * std::pow(std::abs(x), fit.bound_exponent));
      // Quadrature noise can exceed a bound that is itself below 1e-300.
      if (std::abs(fit.convolution[i]) > fit.bound[i] * (1.0 + 1e-9) + 1e-300) {
        fit.bound_respected = false;
      }
    }
  }

  std::vector<std::size_t> order(fit.x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(fit.x[a]) < std::abs(fit.x[b]); });
  std::vector<double> xs, ys;
  for (std::size_t j = order.size() / 2; j < order.size(); ++j) {
    const std::size_t i = order[j];
    const double v = std::abs(fit.convolution[i]);
    if (v < 1e-300) continue;
    xs.push_back(std::pow(std::abs(fit.x[i]), fit.bound_exponent));
    ys.push_back(std::log(v));
  }
  fit.fit_points = xs.size();
  if (xs.size() < 2) throw StatisticsError("convolution_decay_fit: fewer than 2 usable fit points");
  const Line line = fit_line(xs, ys);
  fit.fitted_rate = -line.slope;
  fit.fitted_intercept = line.intercept;
  return fit;
}

SmoothedDecay smoothed_kernel_decay(const CovarianceKernel& kernel, double horizon) {
  if (!(horizon > 0.0)) throw DomainError("smoothed_kernel_decay: horizon must be positive");
  const DecayingFunction smoother{[horizon](double x) { return std::exp(-x * x / (2.0 * horizon)); },
                                  {1.0, 1.0 / (2.0 * horizon), 2.0, 0.0},
                                  false};
  const DecayingFunction gamma = DecayingFunction::from_kernel(kernel);

  SmoothedDecay out;
  out.expected_exponent = std::min(2.0, kernel.decay_exponent());
  constexpr double step = 0.25;
  for (double x = 0.0; x <= 400.0; x += step) {
    const double v = convolve_at(smoother, gamma, x);
    out.x.push_back(x);
    out.values.push_back(v);
    if (v < 1e-250) break;
  }

  std::vector<double> ax, ly;
  for (std::size_t i = out.x.size() / 2; i < out.x.size(); ++i) {
    if (out.values[i] < 1e-300 || out.x[i] <= 0.0) continue;
    ax.push_back(out.x[i]);
    ly.push_back(std::log(out.values[i]));
  }
  if (ax.size() < 3) throw StatisticsError("smoothed_kernel_decay: too few usable points");

  // Profile least squares in p: for fixed p the model is linear in (c, a).
  auto rss_at = [&](double p) {
    std::vector<double> xp(ax.size());
    for (std::size_t i = 0; i < ax.size(); ++i) xp[i] = std::pow(ax[i], p);
    return fit_line(xp, ly);
  };
  double lo = 0.5, hi = 4.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = rss_at(c).rss, fd = rss_at(d).rss;
  while (hi - lo > 1e-9) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = rss_at(c).rss;
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = rss_at(d).rss;
    }
  }
  out.exponent = 0.5 * (lo + hi);
  const Line best = rss_at(out.exponent);
  out.rate = -best.slope;
  out.residual_rms = std::sqrt(best.rss / static_cast<double>(ax.size()));

  bool monotone = true;
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    if (out.values[i] > out.values[i - 1] * (1.0 + 1e-9)) monotone = false;
  }
  out.stretched_exponential = out.rate > 0.0 && monotone;
  return out;
}

}  // namespace ldplab
