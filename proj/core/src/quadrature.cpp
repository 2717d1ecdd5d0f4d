#include "ldplab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "ldplab/errors.hpp"

namespace ldplab::quad {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

void check(const Result& r, double rel_tol, double abs_tol) {
  if (!std::isfinite(r.value) || !std::isfinite(r.error)) {
    throw KernelError("quadrature did not converge (non-finite estimate)");
  }
  const double allowed = std::max(abs_tol, rel_tol * std::abs(r.value));
  // Error estimates in the subnormal range carry no information.
  if (r.error < std::numeric_limits<double>::min()) return;
  if (r.error > 1e3 * allowed && r.error > 1e-8 * std::abs(r.value)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "quadrature did not converge (estimate %.6g, error %.3g)", r.value, r.error);
    throw KernelError(buf);
  }
}

Result kronrod(const Integrand& f, double a, double b, double rel_tol, unsigned max_depth) {
  Result r;
  if (a == b) return r;
  double l1 = 0.0;
  try {
    r.value = Kronrod::integrate(f, a, b, max_depth, rel_tol, &r.error, &l1);
  } catch (const std::exception& e) {
    throw KernelError(std::string("quadrature failed: ") + e.what());
  }
  return r;
}

// Unit panels on [lo, hi] plus the tail to +infinity, unchecked.
Result half_line(const Integrand& f, double lo, double hi, double rel_tol) {
  Result total;
  const auto panels = static_cast<long>(std::ceil(hi - lo));
  for (long i = 0; i < panels; ++i) {
    const double a = lo + static_cast<double>(i);
    const Result p = kronrod(f, a, std::min(hi, a + 1.0), rel_tol, 18);
    total.value += p.value;
    total.error += p.error;
  }
  const Result tail = kronrod(f, std::max(lo, hi), std::numeric_limits<double>::infinity(), rel_tol, 18);
  total.value += tail.value;
  total.error += tail.error;
  return total;
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol,
                 unsigned max_depth) {
  const Result r = kronrod(f, a, b, rel_tol, max_depth);
  check(r, rel_tol, abs_tol);
  return r;
}

Result integrate_half_line(const Integrand& f, double lo, double hi, double rel_tol, double abs_tol) {
  const Result r = half_line(f, lo, hi, rel_tol);
  check(r, rel_tol, abs_tol);
  return r;
}

Result integrate_real_line(const Integrand& f, double lo, double hi, double rel_tol,
                           double abs_tol) {
  Result total = kronrod(f, -std::numeric_limits<double>::infinity(), lo, rel_tol, 18);
  const Result rest = half_line(f, lo, hi, rel_tol);
  total.value += rest.value;
  total.error += rest.error;
  check(total, rel_tol, abs_tol);
  return total;
}

}  // namespace ldplab::quad
