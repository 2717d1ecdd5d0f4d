#pragma once

#include <functional>

namespace ldplab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (15-point) on a finite or half-infinite interval.
/// Throws KernelError when the estimate is not finite or the error estimate
/// exceeds max(abs_tol, rel_tol * |value|) by more than a factor of 10^3.
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-15, unsigned max_depth = 18);

/// Integral over [lo, infinity): unit panels on [lo, hi] and a tail to
/// infinity. Convergence is judged on the summed estimate.
Result integrate_half_line(const Integrand& f, double lo, double hi, double rel_tol = 1e-12,
                           double abs_tol = 1e-15);

/// Integral over the whole real line. The interval [lo, hi] is split into
/// unit-length panels (so narrow features inside it are not skipped), and
/// the two tails are integrated to infinity.
Result integrate_real_line(const Integrand& f, double lo, double hi, double rel_tol = 1e-12,
                           double abs_tol = 1e-15);

}  // namespace ldplab::quad
