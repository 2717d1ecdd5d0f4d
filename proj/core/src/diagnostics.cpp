#include "ldplab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ldplab/errors.hpp"
#include "ldplab/functionals.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab/noise.hpp"
#include "ldplab/statistics.hpp"
#include "ldplab/window_covariance.hpp"

namespace ldplab {

namespace {

constexpr std::size_t kMinTailSamples = 10000;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SampleTensor simulate(const EquationSpec& eq, const CovarianceKernel& gamma, const GridConfig& grid,
                      std::vector<double> times, std::span<const Window> windows, const RunSpec& run,
                      std::uint64_t seed) {
  grid.validate();
  check_domain(grid, eq.kind, gamma);
  const NoiseSource noise(gamma, grid);
  return run_windows(eq, grid, noise, TimePoints{std::move(times)}, windows, run.n_paths, seed,
                     run.threads);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

QvBound qv_bound(const EquationSpec& eq, const CovarianceKernel& gamma, double t, double R) {
  require_positive(R, "qv_bound: R");
  const WindowTerm w{t, 0.0, R, 1.0};
  QvBound q;
  q.t = t;
  q.R = R;
  q.qv = window_qv_bound(eq.kind, gamma, std::span<const WindowTerm>(&w, 1), eq.sigma.sup_norm());
  q.c_hat = q.qv / R;
  return q;
}

double window_difference_qv(const EquationSpec& eq, const CovarianceKernel& gamma, double t,
                            double L, double R, double theta) {
  require_positive(theta, "window_difference_qv: theta");
  const WindowTerm terms[2] = {{t, L, L + theta, 1.0}, {t, L + R, L + R + theta, -1.0}};
  return window_qv_bound(eq.kind, gamma, terms, eq.sigma.sup_norm());
}

double increment_constant(const EquationSpec& eq, const CovarianceKernel& gamma, double R,
                          std::span<const std::pair<double, double>> time_pairs) {
  require_positive(R, "increment_constant: R");
  double c = 0.0;
  for (const auto& [s, t] : time_pairs) {
    if (s == t) continue;
    const WindowTerm terms[2] = {{t, 0.0, R, 1.0}, {s, 0.0, R, -1.0}};
    const double qv = window_qv_bound(eq.kind, gamma, terms, eq.sigma.sup_norm());
    c = std::max(c, qv / (R * std::abs(t - s)));
  }
  return c;
}

TailReport tail_bound_check_thresholds(std::span<const double> samples,
                                       std::span<const double> thresholds, double variance_bound) {
  if (samples.size() < kMinTailSamples) {
    throw StatisticsError("tail_bound_check: needs at least 10^4 samples");
  }
  if (std::any_of(samples.begin(), samples.end(), [](double x) { return !std::isfinite(x); })) {
    throw StatisticsError("tail_bound_check: non-finite sample");
  }
  if (!(variance_bound >= 0.0)) throw DomainError("tail_bound_check: variance bound must be >= 0");
  TailReport rep;
  rep.n = samples.size();
  rep.variance_bound = variance_bound;
  for (double s : thresholds) {
    if (!(s > 0.0)) throw DomainError("tail_bound_check: thresholds must be positive");
    TailRow row;
    row.r = s;
    row.threshold = s;
    row.exceed = static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [s](double x) { return std::abs(x) >= s; }));
    row.empirical = static_cast<double>(row.exceed) / static_cast<double>(rep.n);
    row.bound = variance_bound > 0.0 ? 2.0 * std::exp(-s * s / (2.0 * variance_bound)) : 0.0;
    row.slack = stats::binomial_upper_bound(rep.n, row.exceed, 0.99) - row.empirical;
    row.pass = row.empirical <= row.bound + row.slack;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

TailReport tail_bound_check(std::span<const double> samples, std::span<const double> r_grid,
                            double c_hat, double R) {
  require_positive(R, "tail_bound_check: R");
  std::vector<double> thresholds;
  for (double r : r_grid) thresholds.push_back(r * R);
  TailReport rep = tail_bound_check_thresholds(samples, thresholds, c_hat * R);
  for (std::size_t i = 0; i < r_grid.size(); ++i) rep.rows[i].r = r_grid[i];
  return rep;
}

std::vector<double> standardized_grid(double variance_bound, double z_lo, double z_hi,
                                      std::size_t count) {
  if (count < 2 || !(z_hi > z_lo) || !(z_lo > 0.0)) {
    throw DomainError("standardized_grid: need count >= 2 and 0 < z_lo < z_hi");
  }
  const double sd = std::sqrt(variance_bound);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = sd * (z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

LipschitzMap LipschitzMap::clamped_identity(double level) {
  require_positive(level, "clamped_identity: level");
  return {"clamp(" + std::to_string(level) + ")",
          [level](double x) { return std::clamp(x, -level, level); }, 1.0};
}

CovDecayReport covariance_decay_probe(const EquationSpec& eq, const CovarianceKernel& gamma,
                                      const GridConfig& grid, double t, double L, double R,
                                      std::span<const double> thetas, const LipschitzMap& phi,
                                      const LipschitzMap& psi, const RunSpec& run) {
  require_positive(L, "covariance_decay_probe: L");
  require_positive(R, "covariance_decay_probe: R");
  if (thetas.size() < 2 || !std::is_sorted(thetas.begin(), thetas.end()) || !(thetas.front() > 0.0)) {
    throw ConfigError("covariance_decay_probe: need >= 2 increasing positive thetas");
  }
  std::vector<Window> windows{{0.0, L}};
  for (double th : thetas) windows.push_back({L + th, L + th + R});
  const SampleTensor s = simulate(eq, gamma, grid, {t}, windows, run, run.seed);

  CovDecayReport rep;
  rep.n_paths = run.n_paths;
  rep.thetas.assign(thetas.begin(), thetas.end());
  rep.decay_exponent = std::min(2.0, gamma.decay_exponent());
  std::vector<double> x = s.column(0, 0);
  for (double& v : x) v = phi.f(v);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    std::vector<double> y = s.column(i + 1, 0);
    for (double& v : y) v = psi.f(v);
    const auto jk = stats::jackknife_covariance(x, y, 20);
    rep.covariance.push_back(jk.estimate);
    rep.standard_error.push_back(jk.standard_error);
    if (eq.sigma.is_constant()) {
      const double c = eq.sigma.sup_norm();
      rep.oracle.push_back(c * c * window_pair_covariance(eq.kind, gamma, {t, 0.0, L, 1.0},
                                                          {t, windows[i + 1].a, windows[i + 1].b, 1.0}));
    } else {
      rep.oracle.push_back(kNaN);
    }
  }

  rep.smallest_detected_theta = kNaN;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (std::abs(rep.covariance[i]) > 2.0 * rep.standard_error[i]) {
      rep.smallest_detected_theta = thetas[i];
      break;
    }
  }
  rep.inconclusive = !(std::abs(rep.covariance[0]) > 2.0 * rep.standard_error[0]);

  rep.monotone = true;
  for (std::size_t i = 0; i + 1 < thetas.size(); ++i) {
    const double rise = std::abs(rep.covariance[i + 1]) - std::abs(rep.covariance[i]);
    const double se = std::hypot(rep.standard_error[i], rep.standard_error[i + 1]);
    if (rise > 2.0 * se) rep.monotone = false;
  }

  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (rep.covariance[i] == 0.0) continue;
    fx.push_back(std::pow(thetas[i], rep.decay_exponent));
    fy.push_back(std::log(std::abs(rep.covariance[i])));
  }
  rep.fitted_slope = fx.size() >= 2 ? stats::fit_line(fx, fy).slope : kNaN;
  rep.pass = !rep.inconclusive && rep.monotone && rep.fitted_slope < 0.0;
  return rep;
}

ShiftReport shift_invariance_test(const EquationSpec& eq, const CovarianceKernel& gamma,
                                  const GridConfig& grid, double t, double b,
                                  std::span<const double> shifts, const RunSpec& run, double level) {
  require_positive(b, "shift_invariance_test: b");
  if (shifts.empty()) throw ConfigError("shift_invariance_test: no shifts");
  const Window base{0.0, b};
  const SampleTensor ref = simulate(eq, gamma, grid, {t}, std::span<const Window>(&base, 1), run, run.seed);
  std::vector<Window> windows;
  for (double a : shifts) windows.push_back({a, a + b});
  const SampleTensor other = simulate(eq, gamma, grid, {t}, windows, run, run.seed + 1);

  ShiftReport rep;
  rep.threshold = level / static_cast<double>(shifts.size());
  const std::vector<double> x = ref.column(0, 0);
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const auto ks = stats::ks_two_sample(x, other.column(i, 0));
    ShiftRow row{shifts[i], ks.statistic, ks.p_value, ks.p_value > rep.threshold};
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

SubadditivityReport subadditivity_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                                        const GridConfig& grid, const ConcaveTestFunction& g,
                                        std::span<const double> times,
                                        std::span<const std::pair<double, double>> pairs,
                                        double alpha, double beta, std::span<const double> ladder,
                                        const RunSpec& run) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0) || !(alpha + beta < 1.0)) {
    throw DomainError("subadditivity_check: need 0 < alpha < 1, beta > 0, alpha + beta < 1");
  }
  if (!(alpha > 1.0 / std::min(2.0, gamma.decay_exponent()))) {
    throw DomainError("subadditivity_check: alpha must exceed 1 / (2 ^ eta)");
  }
  if (times.size() != g.k) throw ConfigError("subadditivity_check: dim(g) must equal the number of times");
  if (pairs.empty()) throw ConfigError("subadditivity_check: no (L, R) pairs");

  // Windows [0, L], [L, L + R], [0, L + R] per pair, then [0, R] per ladder entry.
  std::vector<Window> windows;
  for (const auto& [L, R] : pairs) {
    require_positive(L, "subadditivity_check: L");
    require_positive(R, "subadditivity_check: R");
    windows.push_back({0.0, L});
    windows.push_back({L, L + R});
    windows.push_back({0.0, L + R});
  }
  for (double r : ladder) windows.push_back({0.0, r});
  const SampleTensor s = simulate(eq, gamma, grid, std::vector<double>(times.begin(), times.end()),
                                  windows, run, run.seed);

  const ConcaveTestFunction h = strictly_negative(g);
  const double k = static_cast<double>(g.k);
  const double lip = h.lipschitz;
  const double m_g = h.m_g;
  // -log H with its CI halfwidth on the same scale.
  auto minus_log_h = [&](std::size_t w, double len, bool& trusted) {
    const auto e = estimate_gfunctional(s.window_matrix(w), g.k, h, len);
    trusted = trusted && e.trusted;
    return std::pair{-len * e.value, len * e.ci_halfwidth};
  };

  SubadditivityReport rep;
  rep.pass = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [L, R] = pairs[p];
    SubadditivityRow row;
    row.L = L;
    row.R = R;
    const auto [hl, cl] = minus_log_h(3 * p, L, row.trusted);
    const auto [hr, cr] = minus_log_h(3 * p + 1, R, row.trusted);
    const auto [hs, cs] = minus_log_h(3 * p + 2, L + R, row.trusted);
    row.minus_log_h_l = hl;
    row.minus_log_h_r = hr;
    row.minus_log_h_sum = hs;
    row.ci = cl + cr + cs;

    const double S = L + R;
    const double theta = std::pow(S, alpha);
    double qv = 0.0;
    for (double t : times) qv = std::max(qv, window_difference_qv(eq, gamma, t, L, R, theta));
    const double c_diff = qv / theta;
    row.c_lip = k * lip * lip * c_diff / 2.0;
    const double tail = row.c_lip * std::pow(S, alpha + beta);
    row.slack = (m_g + 1.0) * std::pow(S, 1.0 - beta) + tail;
    const double inner = std::sqrt(8.0 * std::numbers::pi * c_diff) * std::pow(k, 1.5) * lip *
                         std::pow(S, alpha / 2.0 + beta);
    row.slack_explicit = std::log(16.0) + std::pow(S, -beta) * std::log(std::max(inner, 1e-300)) +
                         m_g * std::pow(S, 1.0 - beta) + tail;
    const double excess = row.minus_log_h_sum - row.minus_log_h_l - row.minus_log_h_r;
    row.margin = row.slack - excess - row.ci;
    row.pass = row.margin > 0.0;
    if (!row.trusted) rep.inconclusive = true;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }

  rep.cauchy_shrinking = true;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const auto e = estimate_gfunctional(s.window_matrix(3 * pairs.size() + i), g.k, h, ladder[i]);
    LadderRow lr{ladder[i], e.value, e.ci_halfwidth, 0.0};
    if (!e.trusted) rep.inconclusive = true;
    if (i > 0) {
      const LadderRow& prev = rep.ladder.back();
      lr.difference = std::abs(lr.value - prev.value);
      // A later difference may exceed the earlier one only by its own noise.
      if (i > 1 && lr.difference > prev.difference + lr.ci + prev.ci) rep.cauchy_shrinking = false;
    }
    rep.ladder.push_back(lr);
  }
  if (ladder.size() >= 3) rep.pass = rep.pass && rep.cauchy_shrinking;
  return rep;
}

IncrementReport increment_scaling_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                                        const GridConfig& grid, double R, double base,
                                        std::span<const double> gaps, const RunSpec& run) {
  require_positive(R, "increment_scaling_check: R");
  if (gaps.size() < 2) throw ConfigError("increment_scaling_check: need >= 2 gaps");
  IncrementReport rep;
  std::vector<double> times{base};
  std::vector<std::pair<double, double>> pairs;
  for (double gap : gaps) {
    require_positive(gap, "increment_scaling_check: gap");
    times.push_back(base + gap);
    pairs.emplace_back(base, base + gap);
  }
  rep.c_hat = increment_constant(eq, gamma, R, pairs);
  if (eq.sigma.is_zero()) {
    rep.skipped = true;
    rep.note = "sigma = 0: increments vanish identically";
    rep.pass = true;
    return rep;
  }
  const Window w{0.0, R};
  const SampleTensor s = simulate(eq, gamma, grid, times, std::span<const Window>(&w, 1), run, run.seed);

  std::vector<double> lx, ly;
  rep.moments_ok = true;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    std::vector<double> sq(s.paths()), quad(s.paths());
    for (std::size_t p = 0; p < s.paths(); ++p) {
      const double d = (s.at(p, 0, i + 1) - s.at(p, 0, 0)) / R;
      sq[p] = d * d;
      quad[p] = sq[p] * sq[p];
    }
    const auto m2 = stats::mean_var(sq);
    const auto m4 = stats::mean_var(quad);
    IncrementRow row;
    row.gap = gaps[i];
    row.mean_square = m2.mean;
    row.standard_error = m2.standard_error();
    row.bound = 4.0 * rep.c_hat * gaps[i] / R;
    row.fourth_moment = m4.mean;
    row.fourth_bound = 16.0 * rep.c_hat * rep.c_hat * gaps[i] * gaps[i] / (R * R);
    if (row.mean_square > row.bound + 3.0 * row.standard_error) rep.moments_ok = false;
    if (row.fourth_moment > row.fourth_bound + 3.0 * m4.standard_error()) rep.moments_ok = false;
    lx.push_back(std::log(gaps[i]));
    ly.push_back(std::log(row.mean_square));
    rep.rows.push_back(row);
  }
  const auto fit = stats::fit_line(lx, ly);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.slope_ok = rep.slope >= 0.85 && rep.slope <= 1.15;
  rep.intercept_ok = true;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (rep.intercept + rep.slope * lx[i] > std::log(rep.rows[i].bound)) rep.intercept_ok = false;
  }
  rep.pass = rep.slope_ok && rep.intercept_ok && rep.moments_ok;
  return rep;
}

double compute_schied_constant(int n, double q, double q_prime, double T) {
  if (n < 1) throw DomainError("schied constant: n must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("schied constant: q must lie in (0, 1]");
  if (!(q_prime > 0.0) || !(q_prime < q)) throw DomainError("schied constant: need 0 < q' < q");
  require_positive(T, "schied constant: T");
  const double gap = q - q_prime;
  const double Q = std::floor(static_cast<double>(n) / gap) + 1.0;
  const double denom = 1.0 - std::pow(2.0, -gap + static_cast<double>(n) / Q);
  if (!(denom > 0.0)) throw DomainError("schied constant: denominator is not positive");
  return std::pow(T, gap) * (1.0 + std::tgamma(Q + 1.0)) *
         std::pow(2.0, q_prime + 1.0 + static_cast<double>(n) / Q) / denom;
}

HolderReport holder_tail_check(const EquationSpec& eq, const CovarianceKernel& gamma,
                               const GridConfig& grid, double R, double delta,
                               std::span<const double> m_grid, const RunSpec& run,
                               std::size_t time_points) {
  require_positive(R, "holder_tail_check: R");
  if (time_points < 64) throw ConfigError("holder_tail_check: needs >= 64 time points");
  HolderReport rep;
  rep.c_t_delta = compute_schied_constant(1, 0.5, delta, grid.T);

  std::vector<double> times(time_points + 1);
  for (std::size_t i = 0; i <= time_points; ++i) {
    times[i] = grid.T * static_cast<double>(i) / static_cast<double>(time_points);
  }
  // The constant is a sup over all pairs; gaps from the grid anchored at both ends.
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t g = 1; g <= time_points; g *= 2) {
    pairs.emplace_back(0.0, times[g]);
    pairs.emplace_back(times[time_points - g], grid.T);
  }
  pairs.emplace_back(0.0, grid.T);
  rep.c_hat = increment_constant(eq, gamma, R, pairs);

  const Window w{0.0, R};
  const SampleTensor s = simulate(eq, gamma, grid, times, std::span<const Window>(&w, 1), run, run.seed);
  std::vector<double> sup(s.paths(), 0.0);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    double m = 0.0;
    for (std::size_t i = 0; i <= time_points; ++i) {
      for (std::size_t j = i + 1; j <= time_points; ++j) {
        const double d = std::abs(s.at(p, 0, j) - s.at(p, 0, i)) / R;
        m = std::max(m, d / std::pow(times[j] - times[i], delta));
      }
    }
    sup[p] = m;
    rep.max_observed = std::max(rep.max_observed, m);
  }

  const double prefactor = 1.0 + std::sqrt(8.0 * std::numbers::pi * rep.c_hat * R) *
                                     std::exp(rep.c_hat * R / 2.0);
  const double n = static_cast<double>(s.paths());
  std::vector<double> ms(m_grid.begin(), m_grid.end());
  if (ms.empty()) {
    // M* where the bound crosses 1, then one level below and two above it.
    const double m_star = rep.c_t_delta * std::log(prefactor) / R;
    ms = {0.5 * m_star, m_star, 1.5 * m_star, 2.0 * m_star};
  }
  for (double M : ms) {
    HolderRow row;
    row.M = M;
    const auto exceed = static_cast<std::size_t>(
        std::count_if(sup.begin(), sup.end(), [M](double v) { return v > M; }));
    row.empirical = static_cast<double>(exceed) / n;
    row.bound = prefactor * std::exp(-M * R / rep.c_t_delta);
    const double slack = stats::binomial_upper_bound(s.paths(), exceed, 0.99) - row.empirical;
    row.pass = row.empirical <= row.bound + slack;
    if (row.bound < 1.0) rep.informative = true;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

bool DiagnosticsReport::all_pass() const {
  return std::all_of(records.begin(), records.end(),
                     [](const CheckRecord& r) { return r.control || r.inconclusive || r.pass; });
}

bool DiagnosticsReport::controls_failed() const {
  return std::all_of(records.begin(), records.end(),
                     [](const CheckRecord& r) { return !r.control || !r.pass; });
}

}  // namespace ldplab
