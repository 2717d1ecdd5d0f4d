// Acceptance runner: one PASS/FAIL line per criterion.
//   ldplab_acceptance [--criterion N]
// Exit status is 0 iff every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ldplab/diagnostics.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/ldp.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab/window_covariance.hpp"

using namespace ldplab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

GridConfig grid_of(double dx, double dt, double r_max, double pad, double T = 1.0) {
  GridConfig g;
  g.dx = dx;
  g.dt = dt;
  g.T = T;
  g.r_max = r_max;
  g.pad = pad;
  return g;
}

EquationSpec linear(OperatorKind kind) {
  EquationSpec eq;
  eq.kind = kind;
  eq.sigma = SigmaFunction::constant(1.0);
  return eq;
}

EquationSpec nonlinear(OperatorKind kind) {
  EquationSpec eq;
  eq.kind = kind;
  eq.sigma = SigmaFunction::tanh(1.0, 1.0);
  eq.c_h = 1.0;
  eq.c_w1 = 1.0;
  return eq;
}

// Criteria 1 and 2: Gaussian closed form.
Outcome gaussian_closed_form(OperatorKind kind, double v_limit) {
  const auto white = CovarianceKernel::white();
  const EquationSpec eq = linear(kind);
  const GridConfig g = grid_of(0.05, 0.002, 64, minimum_pad(kind, 1.0, white));
  EnsembleConfig ens;
  ens.n_paths = 10000;
  ens.seed = 101;
  ens.r_ladder = {8, 16, 32, 64};
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseSource noise(white, g);
  const SampleTensor s = run_ensemble(eq, g, noise, TimePoints{{1.0}}, ens);

  // Oracle cross-check: the quadrature limit against the closed form.
  const double v = gaussian_reference(eq, white, 1.0, 64).v;
  std::vector<double> c_qv;
  for (double R : ens.r_ladder) c_qv.push_back(qv_bound(eq, white, 1.0, R).c_hat);
  // Wide enough that x = +-2 has its maximizer x / v on the lattice.
  const double lmax = 2.0 / v_limit;
  const Lattice lam = Lattice::uniform(1, -lmax, lmax, 2 * static_cast<std::size_t>(std::lround(lmax / 0.1)) + 1);
  const CgfTable table = build_cgf_table(s, ens.r_ladder, lam, c_qv);

  std::size_t trusted = 0, bad = 0;
  double worst_z = 0.0, trusted_reach = 0.0;
  for (std::size_t j = 0; j < lam.size(); ++j) {
    if (!table.trusted[j]) continue;
    ++trusted;
    const double l = lam.point(j)[0];
    trusted_reach = std::max(trusted_reach, std::abs(l));
    double ci = 0.0;
    for (std::size_t r = 0; r < ens.r_ladder.size(); ++r) {
      if (table.per_r[r][j].trusted()) ci = std::max(ci, table.per_r[r][j].ci_halfwidth);
    }
    const double dev = std::abs(table.extrapolated[j] - 0.5 * l * l * v);
    if (dev == 0.0) continue;
    const double z = ci > 0.0 ? dev / ci : INFINITY;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++bad;
  }

  const Lattice x = Lattice::uniform(1, -2, 2, 41);
  const RateFunctionGrid rate = legendre_transform(table, x);
  std::size_t rate_bad = 0, inner_bad = 0, inner = 0;
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x.point(i)[0];
    const double exact = xi * xi / (2.0 * v_limit);
    const double tol = 0.1 * exact + gaussian_conjugate_tolerance(xi, v_limit, lam.spacing(0));
    const bool off = std::abs(rate.values[i] - exact) > tol;
    if (off) ++rate_bad;
    // x whose conjugate slope x / v lies inside the trusted lambda range.
    if (std::abs(xi) / v_limit <= trusted_reach) {
      ++inner;
      if (off) ++inner_bad;
    }
    if (exact > 0.0) worst_rel = std::max(worst_rel, std::abs(rate.values[i] - exact) / exact);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool oracle_ok = std::abs(v - v_limit) < 1e-9;
  Outcome o;
  o.pass = oracle_ok && trusted > 0 && bad == 0 && rate_bad == 0;
  o.detail = "v=" + fmt("%.10g", v) + " trusted_lambda=" + std::to_string(trusted) +
             " cgf_violations=" + std::to_string(bad) + " worst_z=" + fmt("%.3g", worst_z) +
             " rate_points_outside_10%=" + std::to_string(rate_bad) + "/" + std::to_string(x.size()) +
             " worst_rel=" + fmt("%.3g", worst_rel) + " trusted_lambda_reach=" + fmt("%.3g", trusted_reach) +
             " rate_outside_within_trusted_slopes=" + std::to_string(inner_bad) + "/" + std::to_string(inner) +
             " runtime_s=" + fmt("%.0f", secs);
  return o;
}

Outcome criterion_1() { return gaussian_closed_form(OperatorKind::Heat, 1.0); }

Outcome criterion_2() {
  // Finite-R quadrature cross-check: 1/3 - 1/(6R) approaches 1/3 at rate 1/R.
  const auto white = CovarianceKernel::white();
  const auto eq = linear(OperatorKind::Wave);
  const double v64 = gaussian_reference(eq, white, 1.0, 64).v_R;
  Outcome o = gaussian_closed_form(OperatorKind::Wave, 1.0 / 3.0);
  const bool cross = std::abs(v64 + 1.0 / (6.0 * 64) - 1.0 / 3.0) < 1e-8;
  o.pass = o.pass && cross;
  o.detail += " v_64=" + fmt("%.10g", v64);
  return o;
}

Outcome criterion_3() {
  const auto gamma = make_kernel_preset("gauss");
  const auto eq = linear(OperatorKind::Heat);
  const GridConfig g = grid_of(0.1, 0.008, 64, 10);
  const double R = 64;
  const NoiseSource noise(gamma, g);
  const std::vector<Window> w{{0, R}};
  const SampleTensor s = run_windows(eq, g, noise, TimePoints{{1.0}}, w, 10000, 303, 1);
  const double emp = stats::mean_var(s.column(0, 0)).variance / R;
  const double v_R = gaussian_reference(eq, gamma, 1.0, R).v_R;
  const double rel = std::abs(emp - v_R) / v_R;
  return {rel < 0.05, "empirical=" + fmt("%.6g", emp) + " v_R=" + fmt("%.6g", v_R) + " rel_err=" + fmt("%.4g", rel)};
}

Outcome criterion_4() {
  // Θ = 2 has Cov ~ 1.5e-2 against a per-path product spread ~ 7, so
  // resolving it at 4 SE needs ~4e6 paths; a coarse grid keeps that cheap.
  const auto white = CovarianceKernel::white();
  const auto eq = linear(OperatorKind::Heat);
  const GridConfig g = grid_of(0.25, 0.05, 24, 8);
  const std::vector<double> thetas{2, 4, 8};
  RunSpec run;
  run.n_paths = 4000000;
  run.seed = 404;
  const auto id = LipschitzMap::clamped_identity(1e300);
  const CovDecayReport rep = covariance_decay_probe(eq, white, g, 1.0, 8, 8, thetas, id, id, run);

  const SmoothedDecay sd = smoothed_kernel_decay(make_kernel_preset("gauss"), 1.0);
  const bool colored_ok = std::abs(sd.exponent - 2.0) <= 0.3 * 2.0;

  std::string d;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    d += "cov(" + fmt("%g", thetas[i]) + ")=" + fmt("%.3g", rep.covariance[i]) + "+-" +
         fmt("%.2g", rep.standard_error[i]) + "[oracle " + fmt("%.3g", rep.oracle[i]) + "] ";
  }
  d += "slope=" + fmt("%.4g", rep.fitted_slope) + " monotone=" + std::to_string(rep.monotone) +
       " inconclusive=" + std::to_string(rep.inconclusive) + " colored_exponent=" + fmt("%.4g", sd.exponent);
  return {rep.pass && colored_ok, d};
}

// Tail rows for one sample set; returns (ordinary pass, control failed).
std::pair<bool, bool> tail_pair(const std::vector<double>& x, double V, const std::vector<double>& z,
                                std::string& d, const std::string& tag) {
  std::vector<double> s;
  for (double zi : z) s.push_back(zi * std::sqrt(V));
  const auto ok = tail_bound_check_thresholds(x, s, V);
  const auto ctl = tail_bound_check_thresholds(x, s, 0.5 * V);
  double worst = INFINITY;
  for (const auto& r : ok.rows) worst = std::min(worst, r.bound + r.slack - r.empirical);
  d += tag + ":min_margin=" + fmt("%.3g", worst) + ",control=" + (ctl.pass ? "held " : "broke ");
  return {ok.pass, !ctl.pass};
}

Outcome criterion_5() {
  const auto white = CovarianceKernel::white();
  const auto eq = linear(OperatorKind::Heat);
  const std::vector<double> z{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  bool pass = true;
  std::string d;
  for (double R : {16.0, 32.0}) {
    const double theta = std::pow(2.0 * R, 0.75);
    const GridConfig g = grid_of(0.1, 0.008, std::ceil(2 * R + theta), 8);
    const NoiseSource noise(white, g);
    const std::vector<Window> w{{0, R}, {R, R + theta}, {2 * R, 2 * R + theta}};
    const SampleTensor s = run_windows(eq, g, noise, TimePoints{{1.0}}, w, 10000, 505, 1);
    const double c_hat = qv_bound(eq, white, 1.0, R).c_hat;
    const auto [f_ok, f_ctl] = tail_pair(s.column(0, 0), c_hat * R, z, d, "F_" + fmt("%g", R));
    std::vector<double> diff(s.paths());
    for (std::size_t p = 0; p < s.paths(); ++p) diff[p] = s.at(p, 1, 0) - s.at(p, 2, 0);
    const double V = window_difference_qv(eq, white, 1.0, R, R, theta);
    const auto [w_ok, w_ctl] = tail_pair(diff, V, z, d, "diff_" + fmt("%g", R));
    pass = pass && f_ok && f_ctl && w_ok && w_ctl;
  }
  return {pass, d};
}

Outcome criterion_6() {
  const auto white = CovarianceKernel::white();
  const auto eq = nonlinear(OperatorKind::Heat);
  const GridConfig g = grid_of(0.25, 0.05, 64, 8);
  const auto f = make_test_function("negsqrt", {}, 1);
  const std::vector<double> times{1.0};
  const std::vector<std::pair<double, double>> pairs{{8, 8}, {16, 16}, {8, 24}};
  const std::vector<double> ladder{8, 16, 32, 64};
  RunSpec run;
  run.seed = 606;
  const auto rep = subadditivity_check(eq, white, g, f, times, pairs, 0.75, 0.2, ladder, run);
  std::string d;
  for (const auto& r : rep.rows) d += "(" + fmt("%g", r.L) + "," + fmt("%g", r.R) + ")margin=" + fmt("%.4g", r.margin) + " ";
  d += "ladder=";
  for (const auto& l : rep.ladder) d += fmt("%.5g", l.value) + (l.R == ladder.back() ? "" : ",");
  d += " cauchy_shrinking=" + std::to_string(rep.cauchy_shrinking) + " inconclusive=" + std::to_string(rep.inconclusive);
  return {rep.pass && !rep.inconclusive, d};
}

Outcome criterion_7() {
  const auto white = CovarianceKernel::white();
  const std::vector<double> shifts{8, 16};
  RunSpec run;
  run.n_paths = 5000;
  run.seed = 707;
  bool pass = true;
  std::string d;
  for (auto kind : {OperatorKind::Heat, OperatorKind::Wave}) {
    const GridConfig g = grid_of(0.05, 0.002, 24, minimum_pad(kind, 1.0, white));
    const auto rep = shift_invariance_test(nonlinear(kind), white, g, 1.0, 8, shifts, run);
    d += std::string(to_string(kind)) + ":";
    for (const auto& r : rep.rows) d += " p(" + fmt("%g", r.shift) + ")=" + fmt("%.3g", r.p_value);
    d += " threshold=" + fmt("%g", rep.threshold) + "; ";
    pass = pass && rep.pass;
  }
  return {pass, d};
}

Outcome criterion_8() {
  const auto white = CovarianceKernel::white();
  const GridConfig g = grid_of(0.05, 0.002, 32, minimum_pad(OperatorKind::Heat, 1.0, white));
  const std::vector<double> gaps{0.05, 0.1, 0.2, 0.4};
  RunSpec run;
  run.seed = 808;
  const auto rep = increment_scaling_check(nonlinear(OperatorKind::Heat), white, g, 32, 0.5, gaps, run);
  const bool ok = rep.slope >= 0.85 && rep.slope <= 1.15;
  return {ok, "slope=" + fmt("%.4g", rep.slope) + " intercept=" + fmt("%.4g", rep.intercept) +
                  " below_bound=" + std::to_string(rep.intercept_ok) + " moments_ok=" + std::to_string(rep.moments_ok)};
}

Outcome criterion_9() {
  const auto white = CovarianceKernel::white();
  const auto eq = nonlinear(OperatorKind::Heat);
  const GridConfig g = grid_of(0.25, 0.05, 16, 8);
  const NoiseSource noise(white, g);
  const std::vector<double> ladder{4, 8, 16};
  std::vector<Window> w;
  for (double R : ladder) w.push_back({0, R});
  const TimePoints tp{{0.5, 1.0}};
  const SampleTensor s1 = run_windows(eq, g, noise, tp, w, 2000, 909, 1);
  const SampleTensor s4 = run_windows(eq, g, noise, tp, w, 2000, 909, 4);
  const bool bitwise = s1.data() == s4.data();

  const Lattice lam = Lattice::uniform(2, -0.5, 0.5, 11);
  const CgfTable table = build_cgf_table(s1, ladder, lam, {});
  double convex = INFINITY;
  bool zero = true;
  std::size_t zero_j = lam.size() / 2;
  for (const auto& per : table.per_r) {
    std::vector<double> v;
    for (const auto& e : per) v.push_back(e.value);
    convex = std::min(convex, min_second_difference(lam, v));
    zero = zero && per[zero_j].value == 0.0;
  }

  // Duality and biconjugation on the largest-R table.
  std::vector<double> L;
  for (const auto& e : table.per_r.back()) L.push_back(e.value);
  const Lattice x = Lattice::uniform(2, -3, 3, 61);
  const RateFunctionGrid rate = legendre_transform(lam, L, {}, x);
  const auto lp = lam.points(), xp = x.points();
  std::size_t young = 0;
  // Fenchel-Young in the form the transform evaluates it, so the check is exact.
  for (std::size_t j = 0; j < lp.size(); ++j)
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double dot = lp[j][0] * xp[i][0] + lp[j][1] * xp[i][1];
      if (dot - L[j] > rate.values[i]) ++young;
    }
  // Lambda** may sit below Lambda by at most the variation of Lambda over 2 lattice cells.
  const auto back = biconjugate(rate, lam);
  std::size_t bic = 0;
  for (std::size_t j = 0; j < lp.size(); ++j) {
    const auto idx = lam.multi_index(j);
    double local = 0.0;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      const auto kk = lam.multi_index(k);
      if (std::max(std::abs(double(kk[0]) - double(idx[0])), std::abs(double(kk[1]) - double(idx[1]))) <= 2.0)
        local = std::max(local, std::abs(L[k] - L[j]));
    }
    if (back[j] > L[j] + 1e-12 || L[j] - back[j] > local) ++bic;
  }

  // Merge order: the same exponents through differently ordered accumulators.
  std::vector<double> ex;
  for (std::size_t p = 0; p < s1.paths(); ++p) ex.push_back(0.4 * s1.at(p, 2, 1));
  ExpMomentAccumulator fwd, rev, split_a, split_b;
  for (double e : ex) fwd.add(e);
  for (auto it = ex.rbegin(); it != ex.rend(); ++it) rev.add(*it);
  std::mt19937_64 rng(9);
  for (double e : ex) (rng() & 1 ? split_a : split_b).add(e);
  split_b.merge(split_a);
  const double ref = fwd.log_mean();
  const double merge_dev = std::max(std::abs(rev.log_mean() - ref), std::abs(split_b.log_mean() - ref));

  const bool pass = convex >= -1e-9 && zero && young == 0 && bic == 0 && merge_dev <= 1e-12 && bitwise;
  return {pass, "min_second_diff=" + fmt("%.3g", convex) + " lambda0_exact=" + std::to_string(zero) +
                    " young_violations=" + std::to_string(young) + " biconj_violations=" + std::to_string(bic) +
                    " merge_dev=" + fmt("%.2g", merge_dev) + " bitwise_threads=" + std::to_string(bitwise)};
}

// Re-derivation in log space: log C = (q-q') log T + log(1 + Q!) + (q'+1+n/Q) log 2 - log(1 - 2^e).
double schied_oracle(int n, double q, double qp, double T) {
  const double d = q - qp;
  const int Q = static_cast<int>(std::floor(n / d)) + 1;
  const double e = -d + static_cast<double>(n) / Q;
  const double log_fact = std::lgamma(Q + 1.0);
  const double log_one_plus = log_fact + std::log1p(std::exp(-log_fact));
  return std::exp(d * std::log(T) + log_one_plus + (qp + 1.0 + static_cast<double>(n) / Q) * std::log(2.0) -
                  std::log(-std::expm1(e * std::log(2.0))));
}

Outcome criterion_10() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  std::string d;
  for (int i = 0; i < 5; ++i) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const double q = 0.2 + 0.8 * u(rng);
    const double qp = q * (0.1 + 0.8 * u(rng));
    const double T = 0.1 + 9.9 * u(rng);
    const double a = compute_schied_constant(n, q, qp, T);
    const double b = schied_oracle(n, q, qp, T);
    const double rel = std::abs(a - b) / std::abs(b);
    worst = std::max(worst, rel);
    d += "(" + std::to_string(n) + "," + fmt("%.3f", q) + "," + fmt("%.3f", qp) + "," + fmt("%.2f", T) + ")=" +
         fmt("%.6g", a) + " ";
  }
  d += "max_rel_err=" + fmt("%.2g", worst);
  return {worst <= 1e-12, d};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"gaussian closed form, heat", criterion_1},
    {"gaussian closed form, wave", criterion_2},
    {"colored-noise variance", criterion_3},
    {"covariance decay", criterion_4},
    {"exponential tail bounds", criterion_5},
    {"approximate subadditivity", criterion_6},
    {"shift invariance", criterion_7},
    {"increment scaling", criterion_8},
    {"structural invariants", criterion_9},
    {"schied constant", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (which.empty())
    for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) which.push_back(n);

  bool all = true;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 2;
    }
    Outcome o;
    try {
      o = kCriteria[n - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion_%d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, kCriteria[n - 1].first, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
