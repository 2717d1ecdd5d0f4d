#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "ldplab/diagnostics.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/noise.hpp"
#include "ldplab_cli/commands.hpp"

namespace ldplab::cli {

namespace {

std::string tag(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%g", key, v);
  return buf;
}

// Runs one check; a library error becomes a failed record instead of
// aborting the suite.
void guarded(DiagnosticsReport& rep, const std::string& name, const RunSpec& run,
             const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    CheckRecord r;
    r.name = name;
    r.pass = false;
    r.n_paths = run.n_paths;
    r.seed = run.seed;
    r.note = std::string("error: ") + e.what();
    rep.records.push_back(r);
  }
}

CheckRecord tail_record(const std::string& name, const TailReport& t, const RunSpec& run, bool control) {
  CheckRecord r;
  r.name = name;
  r.control = control;
  r.pass = t.pass;
  r.n_paths = t.n;
  r.seed = run.seed;
  r.margin = std::numeric_limits<double>::infinity();
  r.measured["variance_bound"] = t.variance_bound;
  for (const auto& row : t.rows) {
    const std::string at = tag("s", row.threshold);
    r.measured["empirical@" + at] = row.empirical;
    r.bounds["bound@" + at] = row.bound;
    r.bounds["slack@" + at] = row.slack;
    r.margin = std::min(r.margin, row.bound + row.slack - row.empirical);
  }
  return r;
}

}  // namespace

DiagnosticsReport run_diagnostics(const RunConfig& cfg) {
  DiagnosticsReport rep;
  const auto& d = cfg.diagnostics;
  if (!d.any_enabled()) return rep;
  const EquationSpec eq = cfg.equation();
  const CovarianceKernel gamma = cfg.noise_kernel();
  const GridConfig& grid = cfg.grid;
  const RunSpec run{cfg.ensemble.n_paths, cfg.ensemble.seed, cfg.ensemble.threads};
  const double t = d.t;

  if (d.tail.enabled || d.window_difference.enabled) {
    guarded(rep, "tail", run, [&] {
      // One ensemble carries every window of both tail checks.
      std::vector<Window> windows;
      std::vector<double> tail_R = d.tail.enabled ? d.tail.R : std::vector<double>{};
      std::vector<double> diff_R = d.window_difference.enabled ? d.window_difference.R : std::vector<double>{};
      for (double R : tail_R) windows.push_back({0.0, R});
      for (double R : diff_R) {
        const double theta = std::pow(2.0 * R, d.window_difference.alpha);
        windows.push_back({R, R + theta});
        windows.push_back({2.0 * R, 2.0 * R + theta});
      }
      const NoiseSource noise(gamma, grid);
      const SampleTensor s = run_windows(eq, grid, noise, TimePoints{{t}}, windows, run.n_paths, run.seed,
                                         run.threads);
      std::size_t w = 0;
      for (double R : tail_R) {
        const auto col = s.column(w++, 0);
        const double c = qv_bound(eq, gamma, t, R).c_hat;
        std::vector<double> r_grid;
        for (double z : standardized_grid(c * R, d.tail.z_lo, d.tail.z_hi, d.tail.points)) r_grid.push_back(z / R);
        auto rec = tail_record("tail_F_R[" + tag("R", R) + "]", tail_bound_check(col, r_grid, c, R), run, false);
        rec.measured["c_hat"] = c;
        rep.records.push_back(rec);
        if (d.tail.control) {
          auto ctl = tail_record("tail_F_R_control[" + tag("R", R) + "]",
                                 tail_bound_check(col, r_grid, 0.5 * c, R), run, true);
          ctl.note = "QV bound halved; designed to fail";
          rep.records.push_back(ctl);
        }
      }
      for (double R : diff_R) {
        const double theta = std::pow(2.0 * R, d.window_difference.alpha);
        const auto a = s.column(w++, 0);
        const auto b = s.column(w++, 0);
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        const double V = window_difference_qv(eq, gamma, t, R, R, theta);
        auto rec = tail_record("tail_window_difference[" + tag("R", R) + "]",
                               tail_bound_check_thresholds(diff, standardized_grid(V, d.tail.z_lo, d.tail.z_hi,
                                                                                   std::max<std::size_t>(d.tail.points, 5)),
                                                           V),
                               run, false);
        rec.measured["theta"] = theta;
        rep.records.push_back(rec);
      }
    });
  }

  if (d.covariance_decay.enabled) {
    guarded(rep, "covariance_decay", run, [&] {
      const auto& c = d.covariance_decay;
      const double level = c.clamp > 0.0 ? c.clamp : 10.0 * std::sqrt(qv_bound(eq, gamma, t, c.L).qv);
      const auto phi = LipschitzMap::clamped_identity(level);
      const auto res = covariance_decay_probe(eq, gamma, grid, t, c.L, c.R, c.thetas, phi, phi, run);
      CheckRecord r;
      r.name = "covariance_decay";
      r.pass = res.pass;
      r.inconclusive = res.inconclusive;
      r.n_paths = res.n_paths;
      r.seed = run.seed;
      r.margin = -res.fitted_slope;
      r.measured["fitted_slope"] = res.fitted_slope;
      r.measured["decay_exponent"] = res.decay_exponent;
      r.measured["monotone"] = res.monotone ? 1.0 : 0.0;
      for (std::size_t i = 0; i < res.thetas.size(); ++i) {
        const std::string at = tag("theta", res.thetas[i]);
        r.measured["cov@" + at] = res.covariance[i];
        r.measured["se@" + at] = res.standard_error[i];
        r.bounds["oracle@" + at] = res.oracle[i];
      }
      if (res.inconclusive) r.note = "smallest-theta covariance not distinguishable from 0";
      rep.records.push_back(r);
    });
  }

  if (d.shift.enabled) {
    guarded(rep, "shift_invariance", run, [&] {
      const auto& s = d.shift;
      const auto res = shift_invariance_test(eq, gamma, grid, t, s.b, s.shifts, run, s.level);
      CheckRecord r;
      r.name = "shift_invariance";
      r.pass = res.pass;
      r.n_paths = run.n_paths;
      r.seed = run.seed;
      r.margin = std::numeric_limits<double>::infinity();
      r.bounds["threshold"] = res.threshold;
      for (const auto& row : res.rows) {
        r.measured["ks@" + tag("a", row.shift)] = row.statistic;
        r.measured["p@" + tag("a", row.shift)] = row.p_value;
        r.margin = std::min(r.margin, row.p_value - res.threshold);
      }
      rep.records.push_back(r);
      if (s.control) {
        const double a = grid.x_hi() - s.control_width;
        const auto ctl = shift_invariance_test(eq, gamma, grid, t, s.control_width, std::vector<double>{a}, run,
                                               s.level);
        CheckRecord c;
        c.name = "shift_invariance_control";
        c.control = true;
        c.pass = ctl.pass;
        c.n_paths = run.n_paths;
        c.seed = run.seed;
        c.margin = ctl.rows[0].p_value - ctl.threshold;
        c.measured["ks"] = ctl.rows[0].statistic;
        c.measured["p"] = ctl.rows[0].p_value;
        c.bounds["threshold"] = ctl.threshold;
        c.note = "window flush with the clamped boundary; designed to fail";
        rep.records.push_back(c);
      }
    });
  }

  if (d.subadditivity.enabled) {
    guarded(rep, "subadditivity", run, [&] {
      const auto& s = d.subadditivity;
      const auto g = cfg.test_function(s.g, 1);
      std::vector<std::pair<double, double>> pairs;
      for (const auto& p : s.pairs) pairs.emplace_back(p[0], p[1]);
      const std::vector<double> times{t};
      const auto res = subadditivity_check(eq, gamma, grid, g, times, pairs, s.alpha, s.beta, s.ladder, run);
      CheckRecord r;
      r.name = "subadditivity";
      r.pass = res.pass;
      r.inconclusive = res.inconclusive;
      r.n_paths = run.n_paths;
      r.seed = run.seed;
      r.margin = std::numeric_limits<double>::infinity();
      for (const auto& row : res.rows) {
        const std::string at = "[" + tag("L", row.L) + "," + tag("R", row.R) + "]";
        r.measured["excess@" + at] = row.minus_log_h_sum - row.minus_log_h_l - row.minus_log_h_r;
        r.measured["ci@" + at] = row.ci;
        r.bounds["slack@" + at] = row.slack;
        r.bounds["slack_explicit@" + at] = row.slack_explicit;
        r.margin = std::min(r.margin, row.margin);
      }
      for (const auto& lr : res.ladder) {
        r.measured["ladder@" + tag("R", lr.R)] = lr.value;
        r.measured["ladder_diff@" + tag("R", lr.R)] = lr.difference;
      }
      r.measured["cauchy_shrinking"] = res.cauchy_shrinking ? 1.0 : 0.0;
      rep.records.push_back(r);
    });
  }

  if (d.increments.enabled) {
    guarded(rep, "increment_scaling", run, [&] {
      const auto& s = d.increments;
      const auto res = increment_scaling_check(eq, gamma, grid, s.R, s.base, s.gaps, run);
      CheckRecord r;
      r.name = "increment_scaling";
      r.pass = res.pass;
      r.n_paths = run.n_paths;
      r.seed = run.seed;
      r.note = res.note;
      r.measured["slope"] = res.slope;
      r.measured["intercept"] = res.intercept;
      r.measured["c_hat"] = res.c_hat;
      r.bounds["slope_lo"] = 0.85;
      r.bounds["slope_hi"] = 1.15;
      r.margin = res.skipped ? 0.0 : std::min(res.slope - 0.85, 1.15 - res.slope);
      for (const auto& row : res.rows) {
        const std::string at = tag("gap", row.gap);
        r.measured["mean_square@" + at] = row.mean_square;
        r.measured["fourth@" + at] = row.fourth_moment;
        r.bounds["bound@" + at] = row.bound;
        r.bounds["fourth_bound@" + at] = row.fourth_bound;
      }
      rep.records.push_back(r);
    });
  }

  if (d.holder.enabled) {
    guarded(rep, "holder_tail", run, [&] {
      const auto& h = d.holder;
      const auto res = holder_tail_check(eq, gamma, grid, h.R, h.delta, h.M, run, h.time_points);
      CheckRecord r;
      r.name = "holder_tail";
      r.pass = res.pass;
      r.n_paths = run.n_paths;
      r.seed = run.seed;
      r.measured["c_hat"] = res.c_hat;
      r.measured["c_t_delta"] = res.c_t_delta;
      r.measured["max_observed"] = res.max_observed;
      r.margin = std::numeric_limits<double>::infinity();
      for (const auto& row : res.rows) {
        r.measured["empirical@" + tag("M", row.M)] = row.empirical;
        r.bounds["bound@" + tag("M", row.M)] = row.bound;
        r.margin = std::min(r.margin, std::min(1.0, row.bound) - row.empirical);
      }
      if (!res.informative) r.note = "uninformative: every bound on the M grid is >= 1";
      rep.records.push_back(r);
    });
  }
  return rep;
}

json report_json(const DiagnosticsReport& report) {
  json recs = json::array();
  for (const auto& r : report.records) {
    auto finite = [](const std::map<std::string, double>& m) {
      json o = json::object();
      for (const auto& [k, v] : m) {
        if (std::isfinite(v)) {
          o[k] = v;
        } else {
          o[k] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
        }
      }
      return o;
    };
    recs.push_back({{"name", r.name},
                    {"pass", r.pass},
                    {"control", r.control},
                    {"inconclusive", r.inconclusive},
                    {"margin", std::isfinite(r.margin) ? json(r.margin) : json(r.margin > 0 ? "inf" : "nan")},
                    {"n_paths", r.n_paths},
                    {"seed", r.seed},
                    {"note", r.note},
                    {"measured", finite(r.measured)},
                    {"bounds", finite(r.bounds)}});
  }
  return {{"records", recs}, {"all_pass", report.all_pass()}, {"controls_failed", report.controls_failed()}};
}

}  // namespace ldplab::cli
