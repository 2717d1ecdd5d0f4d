#include "ldplab/window_covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ldplab/errors.hpp"
#include "ldplab/quadrature.hpp"

namespace ldplab {

namespace {

// Piecewise-linear bump: 0 at k[0], rising to `height` at k[1], flat to k[2],
// back to 0 at k[3]. Both the window-overlap function and the convolution of
// two wave kernels have this shape.
struct Trapezoid {
  std::array<double, 4> k{};
  double height = 0.0;

  double operator()(double d) const {
    if (d <= k[0] || d >= k[3]) return 0.0;
    if (d < k[1]) return height * (d - k[0]) / (k[1] - k[0]);
    if (d <= k[2]) return height;
    return height * (k[3] - d) / (k[3] - k[2]);
  }
};

// |[a1,b1] intersect ([a2,b2] + d)| as a function of d.
Trapezoid overlap(const WindowTerm& w1, const WindowTerm& w2) {
  const double x = w1.a - w2.a;
  const double y = w1.b - w2.b;
  return {{w1.a - w2.b, std::min(x, y), std::max(x, y), w1.b - w2.a},
          std::min(w1.b - w1.a, w2.b - w2.a)};
}

// (G_wave(t1) * G_wave(t2))(d) = |[-t1,t1] intersect [d-t2,d+t2]| / 4.
Trapezoid wave_pair(double t1, double t2) {
  const double s = t1 + t2;
  const double g = std::abs(t1 - t2);
  return {{-s, -g, g, s}, 0.5 * std::min(t1, t2)};
}

double std_normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }
double std_normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

// P(u0 < Z < u1) without cancellation in either tail.
double normal_mass(double u0, double u1) {
  if (u0 >= 0.0) return 0.5 * (std::erfc(u0 / std::numbers::sqrt2) - std::erfc(u1 / std::numbers::sqrt2));
  if (u1 <= 0.0) return 0.5 * (std::erfc(-u1 / std::numbers::sqrt2) - std::erfc(-u0 / std::numbers::sqrt2));
  return std_normal_cdf(u1) - std_normal_cdf(u0);
}

// int K(d) p_s(d - e) dd with p_s the N(0, s) density.
double heat_kappa(const Trapezoid& K, double s, double e) {
  if (s <= 0.0) return K(e);
  const double sd = std::sqrt(s);
  const std::array<double, 4> v{0.0, K.height, K.height, 0.0};
  double total = 0.0;
  for (int p = 0; p < 3; ++p) {
    const double d0 = K.k[p], d1 = K.k[p + 1];
    if (d1 <= d0) continue;
    const double slope = (v[p + 1] - v[p]) / (d1 - d0);
    const double at_e = v[p] + slope * (e - d0);
    const double u0 = (d0 - e) / sd, u1 = (d1 - e) / sd;
    total += at_e * normal_mass(u0, u1) + slope * sd * (std_normal_pdf(u0) - std_normal_pdf(u1));
  }
  return total;
}

// int K(d) W(d - e) dd; the integrand is piecewise quadratic, so Simpson's
// rule between consecutive knots is exact.
double wave_kappa(const Trapezoid& K, const Trapezoid& W, double e) {
  if (W.height <= 0.0) return 0.0;
  std::array<double, 8> knots{};
  for (int i = 0; i < 4; ++i) {
    knots[i] = K.k[i];
    knots[4 + i] = W.k[i] + e;
  }
  std::sort(knots.begin(), knots.end());
  const double lo = std::max(K.k[0], W.k[0] + e);
  const double hi = std::min(K.k[3], W.k[3] + e);
  if (hi <= lo) return 0.0;
  auto f = [&](double d) { return K(d) * W(d - e); };
  double total = 0.0;
  for (int i = 0; i + 1 < 8; ++i) {
    const double a = std::max(knots[i], lo);
    const double b = std::min(knots[i + 1], hi);
    if (b <= a) continue;
    total += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
  }
  return total;
}

// Inner spatial double integral at lags tau1 = t1 - r, tau2 = t2 - r.
double spatial_term(OperatorKind kind, const CovarianceKernel& gamma, const Trapezoid& K,
                    double tau1, double tau2, double rel_tol) {
  std::function<double(double)> kappa;
  if (kind == OperatorKind::Heat) {
    const double s = tau1 + tau2;
    kappa = [&K, s](double e) { return heat_kappa(K, s, e); };
  } else {
    const Trapezoid W = wave_pair(tau1, tau2);
    kappa = [&K, W](double e) { return wave_kappa(K, W, e); };
  }
  if (gamma.is_white()) return kappa(0.0);
  const double reach = gamma.support_radius();
  return quad::integrate_real_line([&](double e) { return gamma(e) * kappa(e); }, -reach, reach,
                                   rel_tol, 0.0)
      .value;
}

void validate(const WindowTerm& w) {
  if (!(w.time >= 0.0) || !std::isfinite(w.time)) throw DomainError("window term time must be >= 0");
  if (!(w.b >= w.a) || !std::isfinite(w.a) || !std::isfinite(w.b)) {
    throw DomainError("window term needs finite a <= b");
  }
}

}  // namespace

double window_pair_covariance(OperatorKind kind, const CovarianceKernel& gamma,
                              const WindowTerm& first, const WindowTerm& second, double rel_tol) {
  validate(first);
  validate(second);
  const double upper = std::min(first.time, second.time);
  if (upper <= 0.0 || first.b == first.a || second.b == second.a) return 0.0;
  const Trapezoid K = overlap(first, second);
  // r = upper - u^2 removes the sqrt(upper - r) behaviour at the endpoint.
  auto integrand = [&](double u) {
    const double r = upper - u * u;
    return 2.0 * u * spatial_term(kind, gamma, K, first.time - r, second.time - r, rel_tol);
  };
  return quad::integrate(integrand, 0.0, std::sqrt(upper), rel_tol, 0.0, 22).value;
}

double window_covariance(OperatorKind kind, const CovarianceKernel& gamma,
                         std::span<const WindowTerm> terms, double rel_tol) {
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].weight == 0.0) continue;
    total += terms[i].weight * terms[i].weight *
             window_pair_covariance(kind, gamma, terms[i], terms[i], rel_tol);
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (terms[j].weight == 0.0) continue;
      total += 2.0 * terms[i].weight * terms[j].weight *
               window_pair_covariance(kind, gamma, terms[i], terms[j], rel_tol);
    }
  }
  return total;
}

double window_qv_bound(OperatorKind kind, const CovarianceKernel& gamma,
                       std::span<const WindowTerm> terms, double sigma_sup, double rel_tol) {
  if (!(sigma_sup >= 0.0)) throw DomainError("window_qv_bound: sigma_sup must be >= 0");
  const bool all_nonneg = std::all_of(terms.begin(), terms.end(), [](const WindowTerm& w) { return w.weight >= 0.0; });
  const bool all_nonpos = std::all_of(terms.begin(), terms.end(), [](const WindowTerm& w) { return w.weight <= 0.0; });
  const double s2 = sigma_sup * sigma_sup;
  if (gamma.is_white() || all_nonneg || all_nonpos) {
    return s2 * window_covariance(kind, gamma, terms, rel_tol);
  }
  return s2 * gamma.l1_norm() * window_covariance(kind, CovarianceKernel::white(), terms, rel_tol);
}

double greens_mass_square_integral(OperatorKind kind, double t) {
  if (!(t >= 0.0)) throw DomainError("greens_mass_square_integral: t must be >= 0");
  return kind == OperatorKind::Heat ? t : t * t * t / 3.0;
}

}  // namespace ldplab
