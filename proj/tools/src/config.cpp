#include "ldplab_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ldplab/diagnostics.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/functionals.hpp"

namespace ldplab::cli {

namespace {

// Reads members of one JSON object, remembering which keys were consumed so
// that leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  Reader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where(k) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_preset(Reader r, PresetSpec& p) {
  r.get("preset", p.preset);
  r.get("params", p.params);
  r.finish();
}

json preset_json(const PresetSpec& p) { return {{"preset", p.preset}, {"params", p.params}}; }

void read_range(Reader r, RangeSpec& s) {
  r.get("lo", s.lo);
  r.get("hi", s.hi);
  r.get("count", s.count);
  r.finish();
}

json range_json(const RangeSpec& s) { return {{"lo", s.lo}, {"hi", s.hi}, {"count", s.count}}; }

void fail(const std::string& field, const std::string& msg) { throw ConfigError(field + ": " + msg); }

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) fail(field, msg);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_range(const RangeSpec& s, const std::string& field) {
  require(s.count >= 1, field + ".count", "must be >= 1");
  require(std::isfinite(s.lo) && std::isfinite(s.hi), field, "bounds must be finite");
  require(s.count == 1 ? s.hi >= s.lo : s.hi > s.lo, field, "need lo < hi");
}

// Rethrows a library exception as a ConfigError tagged with the field path.
template <class F>
void guarded(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(field + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(field + ": " + e.what());
  } catch (const KernelError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

bool DiagnosticsSpec::any_enabled() const {
  return tail.enabled || window_difference.enabled || covariance_decay.enabled || shift.enabled ||
         subadditivity.enabled || increments.enabled || holder.enabled;
}

EquationSpec RunConfig::equation() const {
  EquationSpec eq;
  eq.kind = parse_operator_kind(kind);
  eq.sigma = SigmaFunction::preset(sigma.preset, sigma.params);
  eq.c_h = c_h;
  eq.c_w1 = c_w1;
  eq.c_w2 = c_w2;
  return eq;
}

CovarianceKernel RunConfig::noise_kernel() const { return make_kernel_preset(kernel, amplitude, length); }

ConcaveTestFunction RunConfig::test_function(const PresetSpec& spec, std::size_t k) const {
  return make_test_function(spec.preset, spec.params, k);
}

void RunConfig::validate() const {
  EquationSpec eq;
  guarded("equation", [&] {
    eq = equation();
    eq.validate();
  });
  CovarianceKernel gamma = CovarianceKernel::white();
  guarded("noise", [&] {
    gamma = noise_kernel();
    (void)gamma.l1_norm();
  });
  guarded("grid", [&] {
    grid.validate();
    enforce_stability(grid, eq.kind);
    check_domain(grid, eq.kind, gamma);
  });
  guarded("ensemble", [&] { ensemble.validate(grid); });
  require(!times.empty(), "experiment.times", "needs at least one time");
  guarded("experiment.times", [&] { TimePoints{times}.validate(grid.T); });
  guarded("experiment.times", [&] { (void)snap_times(times, grid); });
  for (double R : ensemble.r_ladder) {
    guarded("ensemble.r_ladder", [&] { (void)snap_window(grid, 0.0, R); });
  }
  check_range(lambda, "experiment.lambda_grid");
  check_range(x, "experiment.x_grid");
  require(finite_positive(exponent_cap), "experiment.exponent_cap", "must be positive");
  require(ess_min_fraction >= 0.0 && ess_min_fraction <= 1.0, "experiment.ess_min_fraction",
          "must lie in [0, 1]");
  for (std::size_t s = 0; s < time_subsets.size(); ++s) {
    const std::string f = "experiment.time_subsets[" + std::to_string(s) + "]";
    require(!time_subsets[s].empty(), f, "empty subset");
    std::set<std::size_t> uniq(time_subsets[s].begin(), time_subsets[s].end());
    require(uniq.size() == time_subsets[s].size(), f, "repeated index");
    for (std::size_t i : time_subsets[s]) require(i < times.size(), f, "index out of range");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    guarded("experiment.g[" + std::to_string(i) + "]", [&] { (void)test_function(g[i], times.size()); });
  }
  require(!formats.empty(), "output.formats", "needs at least one format");
  for (const auto& f : formats) require(f == "csv" || f == "json", "output.formats", "unknown format " + f);
  require(!out_dir.empty(), "output.directory", "must not be empty");

  const auto& d = diagnostics;
  if (!d.any_enabled()) return;
  const std::string dp = "experiment.diagnostics";
  require(d.t > 0.0 && d.t <= grid.T, dp + ".t", "must lie in (0, T]");
  auto window_ok = [&](double a, double b, const std::string& field) {
    guarded(field, [&] { (void)snap_window(grid, a, b); });
    require(a >= 0.0 && b <= grid.r_max + 1e-9, field, "window must lie in [0, r_max]");
  };
  if (d.tail.enabled || d.window_difference.enabled) {
    require(ensemble.n_paths >= 10000, "ensemble.n_paths", "tail checks need >= 10^4 paths");
  }
  if (d.tail.enabled) {
    require(d.tail.points >= 5, dp + ".tail.points", "needs >= 5 points");
    require(d.tail.z_lo > 0.0 && d.tail.z_hi > d.tail.z_lo, dp + ".tail", "need 0 < z_lo < z_hi");
    for (double R : d.tail.R) window_ok(0.0, R, dp + ".tail.R");
  }
  if (d.window_difference.enabled) {
    require(d.window_difference.alpha > 0.0 && d.window_difference.alpha < 1.0,
            dp + ".window_difference.alpha", "must lie in (0, 1)");
    for (double R : d.window_difference.R) {
      const double theta = std::pow(2.0 * R, d.window_difference.alpha);
      window_ok(2.0 * R, 2.0 * R + theta, dp + ".window_difference.R");
    }
  }
  if (d.covariance_decay.enabled) {
    const auto& c = d.covariance_decay;
    require(c.thetas.size() >= 2 && std::is_sorted(c.thetas.begin(), c.thetas.end()) && c.thetas[0] > 0.0,
            dp + ".covariance_decay.thetas", "need >= 2 increasing positive values");
    require(c.clamp >= 0.0, dp + ".covariance_decay.clamp", "must be >= 0");
    window_ok(c.L + c.thetas.back(), c.L + c.thetas.back() + c.R, dp + ".covariance_decay");
  }
  if (d.shift.enabled) {
    const auto& s = d.shift;
    require(!s.shifts.empty(), dp + ".shift.shifts", "needs at least one shift");
    require(s.level > 0.0 && s.level < 1.0, dp + ".shift.level", "must lie in (0, 1)");
    for (double a : s.shifts) window_ok(a, a + s.b, dp + ".shift.shifts");
    window_ok(0.0, s.b, dp + ".shift.b");
    if (s.control) {
      require(s.control_width > 0.0 && s.control_width <= grid.x_hi() - grid.x_lo(),
              dp + ".shift.control_width", "must be positive and fit the domain");
    }
  }
  if (d.subadditivity.enabled) {
    const auto& s = d.subadditivity;
    guarded(dp + ".subadditivity.g", [&] { (void)test_function(s.g, times.size()); });
    require(s.alpha > 0.0 && s.alpha < 1.0 && s.beta > 0.0 && s.alpha + s.beta < 1.0,
            dp + ".subadditivity", "need 0 < alpha < 1, beta > 0, alpha + beta < 1");
    require(s.alpha > 1.0 / std::min(2.0, gamma.decay_exponent()), dp + ".subadditivity.alpha",
            "must exceed 1 / (2 ^ eta)");
    require(!s.pairs.empty(), dp + ".subadditivity.pairs", "needs at least one pair");
    for (const auto& p : s.pairs) {
      require(p.size() == 2 && p[0] > 0.0 && p[1] > 0.0, dp + ".subadditivity.pairs",
              "each pair is [L, R] with L, R > 0");
      window_ok(0.0, p[0] + p[1], dp + ".subadditivity.pairs");
    }
    for (double R : s.ladder) window_ok(0.0, R, dp + ".subadditivity.ladder");
  }
  if (d.increments.enabled) {
    const auto& s = d.increments;
    require(s.gaps.size() >= 2, dp + ".increments.gaps", "needs >= 2 gaps");
    for (double gap : s.gaps) {
      require(gap > 0.0 && s.base >= 0.0 && s.base + gap <= grid.T, dp + ".increments.gaps",
              "base + gap must lie in (0, T]");
    }
    window_ok(0.0, s.R, dp + ".increments.R");
  }
  if (d.holder.enabled) {
    const auto& h = d.holder;
    require(h.delta > 0.0 && h.delta < 0.5, dp + ".holder.delta", "must lie in (0, 1/2)");
    require(h.time_points >= 64, dp + ".holder.time_points", "must be >= 64");
    window_ok(0.0, h.R, dp + ".holder.R");
    guarded(dp + ".holder", [&] { (void)compute_schied_constant(1, 0.5, h.delta, grid.T); });
  }
}

json RunConfig::to_json() const {
  json j;
  j["equation"] = {{"kind", kind}, {"sigma", preset_json(sigma)}, {"c_h", c_h}, {"c_w1", c_w1}, {"c_w2", c_w2}};
  j["noise"] = {{"kernel", kernel}, {"amplitude", amplitude}, {"length", length}};
  j["grid"] = {{"dx", grid.dx}, {"dt", grid.dt}, {"T", grid.T}, {"r_max", grid.r_max}};
  if (pad_auto) {
    j["grid"]["pad"] = "auto";
  } else {
    j["grid"]["pad"] = grid.pad;
  }
  j["ensemble"] = {{"n_paths", ensemble.n_paths},
                   {"seed", ensemble.seed},
                   {"r_ladder", ensemble.r_ladder},
                   {"batch_count", ensemble.batch_count},
                   {"threads", ensemble.threads}};
  json gs = json::array();
  for (const auto& p : g) gs.push_back(preset_json(p));
  const auto& d = diagnostics;
  json diag = {
      {"t", d.t},
      {"tail",
       {{"enabled", d.tail.enabled}, {"R", d.tail.R}, {"z_lo", d.tail.z_lo}, {"z_hi", d.tail.z_hi},
        {"points", d.tail.points}, {"control", d.tail.control}}},
      {"window_difference",
       {{"enabled", d.window_difference.enabled}, {"R", d.window_difference.R},
        {"alpha", d.window_difference.alpha}}},
      {"covariance_decay",
       {{"enabled", d.covariance_decay.enabled}, {"L", d.covariance_decay.L}, {"R", d.covariance_decay.R},
        {"thetas", d.covariance_decay.thetas}, {"clamp", d.covariance_decay.clamp}}},
      {"shift",
       {{"enabled", d.shift.enabled}, {"b", d.shift.b}, {"shifts", d.shift.shifts}, {"level", d.shift.level},
        {"control", d.shift.control}, {"control_width", d.shift.control_width}}},
      {"subadditivity",
       {{"enabled", d.subadditivity.enabled}, {"g", preset_json(d.subadditivity.g)},
        {"pairs", d.subadditivity.pairs}, {"alpha", d.subadditivity.alpha}, {"beta", d.subadditivity.beta},
        {"ladder", d.subadditivity.ladder}}},
      {"increments",
       {{"enabled", d.increments.enabled}, {"R", d.increments.R}, {"base", d.increments.base},
        {"gaps", d.increments.gaps}}},
      {"holder",
       {{"enabled", d.holder.enabled}, {"R", d.holder.R}, {"delta", d.holder.delta}, {"M", d.holder.M},
        {"time_points", d.holder.time_points}}}};
  j["experiment"] = {{"times", times},
                     {"lambda_grid", range_json(lambda)},
                     {"x_grid", range_json(x)},
                     {"exponent_cap", exponent_cap},
                     {"ess_min_fraction", ess_min_fraction},
                     {"time_subsets", time_subsets},
                     {"g", gs},
                     {"diagnostics", diag}};
  j["output"] = {{"directory", out_dir}, {"formats", formats}};
  return j;
}

RunConfig RunConfig::from_json(const json& input) {
  const json& j = (input.is_object() && input.contains("config") && input.contains("config_hash"))
                      ? input.at("config")
                      : input;
  RunConfig c;
  Reader root(j, "");

  Reader eq = root.child("equation");
  eq.get("kind", c.kind);
  if (eq.has("sigma")) read_preset(eq.child("sigma"), c.sigma);
  eq.get("c_h", c.c_h);
  eq.get("c_w1", c.c_w1);
  eq.get("c_w2", c.c_w2);
  eq.finish();

  Reader noise = root.child("noise");
  noise.get("kernel", c.kernel);
  noise.get("amplitude", c.amplitude);
  noise.get("length", c.length);
  noise.finish();

  Reader grid = root.child("grid");
  grid.get("dx", c.grid.dx);
  grid.get("dt", c.grid.dt);
  grid.get("T", c.grid.T);
  grid.get("r_max", c.grid.r_max);
  if (grid.has("pad")) {
    const json& pad = grid.raw("pad");
    if (pad.is_string()) {
      if (pad.get<std::string>() != "auto") throw ConfigError("grid.pad: expected a number or \"auto\"");
      c.pad_auto = true;
    } else if (pad.is_number()) {
      c.grid.pad = pad.get<double>();
      c.pad_auto = false;
    } else {
      throw ConfigError("grid.pad: expected a number or \"auto\"");
    }
  }
  grid.finish();

  Reader ens = root.child("ensemble");
  ens.get("n_paths", c.ensemble.n_paths);
  ens.get("seed", c.ensemble.seed);
  ens.get("r_ladder", c.ensemble.r_ladder);
  ens.get("batch_count", c.ensemble.batch_count);
  ens.get("threads", c.ensemble.threads);
  ens.finish();

  Reader ex = root.child("experiment");
  ex.get("times", c.times);
  if (ex.has("lambda_grid")) read_range(ex.child("lambda_grid"), c.lambda);
  if (ex.has("x_grid")) read_range(ex.child("x_grid"), c.x);
  ex.get("exponent_cap", c.exponent_cap);
  ex.get("ess_min_fraction", c.ess_min_fraction);
  ex.get("time_subsets", c.time_subsets);
  if (ex.has("g")) {
    const json& arr = ex.raw("g");
    if (!arr.is_array()) throw ConfigError("experiment.g: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      PresetSpec p;
      read_preset(Reader(arr[i], "experiment.g[" + std::to_string(i) + "]"), p);
      c.g.push_back(p);
    }
  }
  {
    Reader d = ex.child("diagnostics");
    auto& s = c.diagnostics;
    d.get("t", s.t);
    {
      Reader r = d.child("tail");
      r.get("enabled", s.tail.enabled);
      r.get("R", s.tail.R);
      r.get("z_lo", s.tail.z_lo);
      r.get("z_hi", s.tail.z_hi);
      r.get("points", s.tail.points);
      r.get("control", s.tail.control);
      r.finish();
    }
    {
      Reader r = d.child("window_difference");
      r.get("enabled", s.window_difference.enabled);
      r.get("R", s.window_difference.R);
      r.get("alpha", s.window_difference.alpha);
      r.finish();
    }
    {
      Reader r = d.child("covariance_decay");
      r.get("enabled", s.covariance_decay.enabled);
      r.get("L", s.covariance_decay.L);
      r.get("R", s.covariance_decay.R);
      r.get("thetas", s.covariance_decay.thetas);
      r.get("clamp", s.covariance_decay.clamp);
      r.finish();
    }
    {
      Reader r = d.child("shift");
      r.get("enabled", s.shift.enabled);
      r.get("b", s.shift.b);
      r.get("shifts", s.shift.shifts);
      r.get("level", s.shift.level);
      r.get("control", s.shift.control);
      r.get("control_width", s.shift.control_width);
      r.finish();
    }
    {
      Reader r = d.child("subadditivity");
      r.get("enabled", s.subadditivity.enabled);
      if (r.has("g")) read_preset(r.child("g"), s.subadditivity.g);
      r.get("pairs", s.subadditivity.pairs);
      r.get("alpha", s.subadditivity.alpha);
      r.get("beta", s.subadditivity.beta);
      r.get("ladder", s.subadditivity.ladder);
      r.finish();
    }
    {
      Reader r = d.child("increments");
      r.get("enabled", s.increments.enabled);
      r.get("R", s.increments.R);
      r.get("base", s.increments.base);
      r.get("gaps", s.increments.gaps);
      r.finish();
    }
    {
      Reader r = d.child("holder");
      r.get("enabled", s.holder.enabled);
      r.get("R", s.holder.R);
      r.get("delta", s.holder.delta);
      r.get("M", s.holder.M);
      r.get("time_points", s.holder.time_points);
      r.finish();
    }
    d.finish();
  }
  ex.finish();

  Reader out = root.child("output");
  out.get("directory", c.out_dir);
  out.get("formats", c.formats);
  out.finish();
  root.finish();

  if (c.pad_auto) {
    guarded("grid.pad", [&] {
      c.grid.pad = minimum_pad(parse_operator_kind(c.kind), c.grid.T, c.noise_kernel());
    });
  }
  return c;
}

std::uint64_t RunConfig::hash() const {
  json j = to_json();
  // The thread count never changes results, so it is not part of the identity.
  j["ensemble"].erase("threads");
  j["output"].erase("directory");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ldplab::cli
