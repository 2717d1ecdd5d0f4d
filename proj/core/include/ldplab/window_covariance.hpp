#pragma once

#include <span>

#include "ldplab/kernels.hpp"

namespace ldplab {

/// weight * F^a_b(time): one term of a linear combination of centered window
/// integrals.
struct WindowTerm {
  double time = 0.0;
  double a = 0.0;
  double b = 0.0;
  double weight = 1.0;
};

/// Covariance of two window integrals of the linear (sigma = 1) field:
/// int_0^{t1 ^ t2} dr int int h1(y) h2(z) Gamma(y - z) dy dz with
/// h_i(y) = int_{a_i}^{b_i} G(t_i - r, x - y) dx. Deterministic quadrature.
double window_pair_covariance(OperatorKind kind, const CovarianceKernel& gamma,
                              const WindowTerm& first, const WindowTerm& second,
                              double rel_tol = 1e-10);

/// Variance of sum_i weight_i F^{a_i}_{b_i}(t_i) for sigma = 1.
double window_covariance(OperatorKind kind, const CovarianceKernel& gamma,
                         std::span<const WindowTerm> terms, double rel_tol = 1e-10);

/// Upper bound on the quadratic variation of sum_i weight_i F(t_i) when
/// |sigma| <= sigma_sup. Exact covariance bound for white noise or
/// same-signed weights; otherwise sigma_sup^2 |Gamma|_1 times the white-noise
/// value (Young's inequality).
double window_qv_bound(OperatorKind kind, const CovarianceKernel& gamma,
                       std::span<const WindowTerm> terms, double sigma_sup,
                       double rel_tol = 1e-10);

/// int_0^t (greens_mass(s))^2 ds: t for heat, t^3/3 for wave.
double greens_mass_square_integral(OperatorKind kind, double t);

}  // namespace ldplab
