#include "ldplab/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ldplab/errors.hpp"
#include "ldplab/statistics.hpp"
#include "ldplab/window_covariance.hpp"

namespace ldplab {

Lattice Lattice::uniform(std::size_t k, double lo, double hi, std::size_t count) {
  if (k == 0 || count == 0 || !(hi >= lo)) throw ConfigError("lattice needs k >= 1, count >= 1, hi >= lo");
  std::vector<double> axis(count);
  for (std::size_t i = 0; i < count; ++i) {
    axis[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return {std::vector<std::vector<double>>(k, axis)};
}

std::size_t Lattice::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::vector<std::size_t> Lattice::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(k());
  for (std::size_t d = k(); d-- > 0;) {
    idx[d] = flat % axes[d].size();
    flat /= axes[d].size();
  }
  return idx;
}

std::size_t Lattice::flat_index(std::span<const std::size_t> idx) const {
  std::size_t f = 0;
  for (std::size_t d = 0; d < k(); ++d) f = f * axes[d].size() + idx[d];
  return f;
}

std::vector<double> Lattice::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::vector<double> p(k());
  for (std::size_t d = 0; d < k(); ++d) p[d] = axes[d][idx[d]];
  return p;
}

std::vector<std::vector<double>> Lattice::points() const {
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < size(); ++j) out.push_back(point(j));
  return out;
}

double Lattice::spacing(std::size_t axis) const {
  const auto& a = axes.at(axis);
  double h = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double d = a[i] - a[i - 1];
    h = h == 0.0 ? d : std::min(h, d);
  }
  return h;
}

double min_second_difference(const Lattice& lattice, std::span<const double> values,
                             const std::vector<bool>& mask) {
  if (values.size() != lattice.size()) throw ConfigError("values do not match the lattice");
  auto ok = [&](std::size_t j) { return mask.empty() || mask[j]; };
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < lattice.size(); ++j) {
    const auto idx = lattice.multi_index(j);
    for (std::size_t d = 0; d < lattice.k(); ++d) {
      const auto& ax = lattice.axes[d];
      if (idx[d] == 0 || idx[d] + 1 >= ax.size()) continue;
      auto lo = idx, hi = idx;
      --lo[d];
      ++hi[d];
      const std::size_t jl = lattice.flat_index(lo), jh = lattice.flat_index(hi);
      if (!ok(j) || !ok(jl) || !ok(jh)) continue;
      const double h1 = ax[idx[d]] - ax[idx[d] - 1];
      const double h2 = ax[idx[d] + 1] - ax[idx[d]];
      // Second divided difference scaled to a plain second difference for uniform spacing.
      const double dd = 2.0 * ((values[jh] - values[j]) / h2 - (values[j] - values[jl]) / h1) / (h1 + h2);
      worst = std::min(worst, dd * h1 * h2);
    }
  }
  return worst;
}

Extrapolation extrapolate_cgf(std::span<const LadderPoint> ladder) {
  if (ladder.empty()) throw StatisticsError("extrapolate_cgf needs at least one ladder point");
  std::vector<LadderPoint> pts(ladder.begin(), ladder.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.R < b.R; });
  Extrapolation e;
  bool up = true, down = true;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    up = up && pts[i].value >= pts[i - 1].value;
    down = down && pts[i].value <= pts[i - 1].value;
  }
  e.monotone = up || down;
  if (pts.size() < 3) {
    e.value = pts.back().value;
    e.used_fallback = true;
    e.flagged = true;
    e.note = "fewer than 3 ladder points; largest R used";
    return e;
  }
  std::vector<double> x, y, w;
  bool weighted = true;
  for (const auto& p : pts) {
    x.push_back(1.0 / p.R);
    y.push_back(p.value);
    weighted = weighted && p.ci > 0.0;
  }
  if (weighted) {
    for (const auto& p : pts) w.push_back(1.0 / (p.ci * p.ci));
  }
  const auto fit = stats::fit_line(x, y, w);
  e.value = fit.intercept;
  e.slope = fit.slope;
  e.max_residual = fit.max_abs_residual;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double scale = std::max(pts[i].ci, 1e-12 * (1.0 + std::abs(pts[i].value)));
    if (std::abs(fit.residuals[i]) > scale) {
      e.value = pts.back().value;
      e.used_fallback = true;
      e.note = "a/R model residual exceeds the CI at R = " + std::to_string(pts[i].R) + "; largest R used";
      break;
    }
  }
  return e;
}

CgfTable build_cgf_table(const SampleTensor& samples, std::span<const double> ladder,
                         const Lattice& lambda, std::span<const double> c_qv,
                         const CgfOptions& options) {
  if (ladder.size() != samples.windows()) throw ConfigError("ladder does not match the sample windows");
  if (!c_qv.empty() && c_qv.size() != ladder.size()) throw ConfigError("c_qv must have one entry per ladder R");
  if (lambda.k() != samples.k()) throw ConfigError("lambda lattice dimension does not match T_k");
  if (lambda.size() == 0) throw ConfigError("empty lambda lattice");
  CgfTable t;
  t.lambda = lambda;
  t.ladder.assign(ladder.begin(), ladder.end());
  const auto pts = lambda.points();
  for (std::size_t r = 0; r < ladder.size(); ++r) {
    CgfOptions o = options;
    o.c_qv = c_qv.empty() ? std::numeric_limits<double>::quiet_NaN() : c_qv[r];
    t.per_r.push_back(estimate_cgf(samples.window_matrix(r), samples.k(), pts, ladder[r], o));
  }
  for (std::size_t j = 0; j < pts.size(); ++j) {
    std::vector<LadderPoint> usable;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      const auto& est = t.per_r[r][j];
      if (est.trusted()) usable.push_back({ladder[r], est.value, est.ci_halfwidth});
    }
    if (usable.empty()) {
      Extrapolation e;
      e.value = t.per_r.back()[j].value;
      e.used_fallback = true;
      e.flagged = true;
      e.note = "no trusted ladder point";
      t.extrapolated.push_back(e.value);
      t.fits.push_back(e);
      t.trusted.push_back(false);
      continue;
    }
    auto e = extrapolate_cgf(usable);
    t.extrapolated.push_back(e.value);
    t.fits.push_back(e);
    t.trusted.push_back(true);
  }
  return t;
}

RateFunctionGrid legendre_transform(const Lattice& lambda, std::span<const double> values,
                                    const std::vector<bool>& trusted, const Lattice& x) {
  if (lambda.size() == 0 || x.size() == 0) throw ConfigError("legendre_transform: empty grid");
  if (lambda.k() != x.k()) throw ConfigError("legendre_transform: lattice dimensions differ");
  if (values.size() != lambda.size()) throw ConfigError("legendre_transform: values do not match lattice");
  if (!trusted.empty() && trusted.size() != lambda.size()) throw ConfigError("trust mask does not match lattice");
  auto ok = [&](std::size_t j) { return trusted.empty() || trusted[j]; };
  const auto lpts = lambda.points();
  bool any = false;
  for (std::size_t j = 0; j < lpts.size(); ++j) any = any || ok(j);
  if (!any) throw ConfigError("legendre_transform: no trusted lambda");

  // A maximizer is on the edge when a lattice neighbour is missing or untrusted.
  std::vector<bool> edge(lpts.size(), false);
  for (std::size_t j = 0; j < lpts.size(); ++j) {
    const auto idx = lambda.multi_index(j);
    for (std::size_t d = 0; d < lambda.k() && !edge[j]; ++d) {
      for (int s : {-1, 1}) {
        if ((s < 0 && idx[d] == 0) || (s > 0 && idx[d] + 1 >= lambda.axes[d].size())) {
          edge[j] = true;
          break;
        }
        auto n = idx;
        n[d] = s < 0 ? n[d] - 1 : n[d] + 1;
        if (!ok(lambda.flat_index(n))) {
          edge[j] = true;
          break;
        }
      }
    }
  }

  RateFunctionGrid rate;
  rate.x = x;
  const auto xpts = x.points();
  for (const auto& xp : xpts) {
    double best = -std::numeric_limits<double>::infinity();
    double best_norm = 0.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < lpts.size(); ++j) {
      if (!ok(j)) continue;
      double dot = 0.0, norm = 0.0;
      for (std::size_t d = 0; d < x.k(); ++d) {
        dot += lpts[j][d] * xp[d];
        norm += lpts[j][d] * lpts[j][d];
      }
      const double v = dot - values[j];
      // Ties go to the smaller |lambda|, so flat tables are not flagged at x = 0.
      if (v > best || (v == best && norm < best_norm)) {
        best = v;
        best_norm = norm;
        arg = j;
      }
    }
    rate.values.push_back(best);
    rate.argmax_lambda.push_back(arg);
    rate.boundary_flag.push_back(edge[arg]);
  }
  rate.argmin = static_cast<std::size_t>(
      std::min_element(rate.values.begin(), rate.values.end()) - rate.values.begin());
  return rate;
}

RateFunctionGrid legendre_transform(const CgfTable& table, const Lattice& x) {
  return legendre_transform(table.lambda, table.extrapolated, table.trusted, x);
}

std::vector<double> biconjugate(const RateFunctionGrid& rate, const Lattice& lambda) {
  if (lambda.k() != rate.x.k()) throw ConfigError("biconjugate: lattice dimensions differ");
  const auto xpts = rate.x.points();
  std::vector<double> out;
  for (const auto& l : lambda.points()) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xpts.size(); ++i) {
      double dot = 0.0;
      for (std::size_t d = 0; d < l.size(); ++d) dot += l[d] * xpts[i][d];
      best = std::max(best, dot - rate.values[i]);
    }
    out.push_back(best);
  }
  return out;
}

double GaussianReference::rate(double x) const {
  if (v == 0.0) return x == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return x * x / (2.0 * v);
}

GaussianReference gaussian_reference(const EquationSpec& eq, const CovarianceKernel& gamma, double t,
                                     double R) {
  if (!eq.sigma.is_constant()) throw PreconditionError("gaussian_reference needs a constant sigma");
  if (!(t >= 0.0) || !(R > 0.0)) throw DomainError("gaussian_reference needs t >= 0 and R > 0");
  const double c = eq.sigma(0.0);
  GaussianReference g;
  if (c == 0.0 || t == 0.0) return g;
  const WindowTerm w{t, 0.0, R, 1.0};
  g.v_R = c * c * window_covariance(eq.kind, gamma, std::span<const WindowTerm>(&w, 1)) / R;
  g.v = c * c * gamma.l1_norm() * greens_mass_square_integral(eq.kind, t);
  return g;
}

double gaussian_conjugate_tolerance(double x, double v, double dlambda) {
  if (std::abs(x) >= 0.5 * v) return 0.5 * (dlambda * x) * (dlambda * x) / v;
  return v * dlambda * dlambda / 8.0;
}

}  // namespace ldplab
