#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ldplab/errors.hpp"
#include "ldplab/functionals.hpp"
#include "ldplab/solver.hpp"
#include "ldplab_cli/commands.hpp"

#ifndef LDPLAB_VERSION
#define LDPLAB_VERSION "unknown"
#endif

namespace ldplab::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string format;
  std::string samples;
  std::string cgf;
};

class Manifest {
 public:
  Manifest(const RunConfig& cfg, const std::string& command) {
    body_ = {{"manifest_version", 1},
             {"tool", "ldplab"},
             {"version", LDPLAB_VERSION},
             {"command", command},
             {"config_hash", hex64(cfg.hash())},
             {"seed", cfg.ensemble.seed},
             {"threads", cfg.ensemble.threads},
             {"config", cfg.to_json()},
             {"timings_s", json::object()},
             {"outputs", json::array()}};
    const auto snapped = snap_times(cfg.times, cfg.grid);
    json windows = json::object();
    for (double R : cfg.ensemble.r_ladder) {
      windows[std::to_string(R)] = snap_window(cfg.grid, 0.0, R).snap_error;
    }
    body_["snap"] = {{"time_errors", snapped.snap_error},
                     {"max_time_error", snapped.max_snap_error},
                     {"window_errors", windows}};
  }

  template <class F>
  auto timed(const std::string& phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(phase, t0);
    } else {
      auto r = f();
      record(phase, t0);
      return r;
    }
  }

  json& body() { return body_; }
  void output(const std::string& name) { body_["outputs"].push_back(name); }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.json");
    out << body_.dump(2) << '\n';
  }

 private:
  void record(const std::string& phase, std::chrono::steady_clock::time_point t0) {
    body_["timings_s"][phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  json body_;
};

std::vector<std::string> formats_of(const RunConfig& cfg, const Options& o) {
  if (!o.format.empty()) return {o.format};
  return cfg.formats;
}

bool wants(const std::vector<std::string>& f, const char* name) {
  return std::find(f.begin(), f.end(), name) != f.end();
}

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig::from_json(json::object()) : load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.ensemble.seed = *o.seed;
  if (o.threads) cfg.ensemble.threads = *o.threads;
  if (!o.format.empty()) cfg.formats = {o.format};
  cfg.validate();
  return cfg;
}

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open samples file " + path);
  if (fs::path(path).extension() == ".json") {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    return samples_from_json(j);
  }
  return read_samples_csv(in);
}

SampleSet obtain_samples(const RunConfig& cfg, const Options& o, Manifest& m) {
  if (!o.samples.empty()) {
    m.body()["samples_source"] = o.samples;
    return m.timed("load_samples", [&] { return load_samples(o.samples); });
  }
  return m.timed("simulate", [&] { return simulate_samples(cfg); });
}

json trust_summary(const CgfTable& t) {
  json per_r = json::object();
  for (std::size_t r = 0; r < t.ladder.size(); ++r) {
    std::size_t untrusted = 0;
    for (const auto& e : t.per_r[r]) untrusted += e.trusted() ? 0 : 1;
    per_r[std::to_string(t.ladder[r])] = untrusted;
  }
  std::size_t lim = 0;
  for (bool b : t.trusted) lim += b ? 0 : 1;
  return {{"lambda_points", t.lambda.size()}, {"untrusted_per_R", per_r}, {"untrusted_extrapolated", lim}};
}

int cmd_simulate(const Options& o) {
  const RunConfig cfg = resolve(o);
  const fs::path dir = prepare_dir(cfg);
  Manifest m(cfg, "simulate");
  const SampleSet s = m.timed("simulate", [&] { return simulate_samples(cfg); });
  const auto f = formats_of(cfg, o);
  m.timed("write", [&] {
    if (wants(f, "csv")) {
      std::ostringstream os;
      write_samples_csv(os, s);
      write_text(dir / "samples.csv", os.str());
      m.output("samples.csv");
    }
    if (wants(f, "json")) {
      write_text(dir / "samples.json", samples_json(s).dump() + "\n");
      m.output("samples.json");
    }
  });
  m.write(dir);
  return kExitOk;
}

int cmd_cgf(const Options& o) {
  const RunConfig cfg = resolve(o);
  const fs::path dir = prepare_dir(cfg);
  Manifest m(cfg, "cgf");
  const SampleSet s = obtain_samples(cfg, o, m);
  const CgfTable table = m.timed("cgf", [&] { return compute_cgf(cfg, s); });
  m.body()["trust"] = trust_summary(table);
  const auto f = formats_of(cfg, o);
  if (wants(f, "csv")) {
    std::ostringstream os;
    write_cgf_csv(os, table);
    write_text(dir / "cgf.csv", os.str());
    m.output("cgf.csv");
  }
  if (wants(f, "json")) {
    write_text(dir / "cgf.json", cgf_json(table).dump(2) + "\n");
    m.output("cgf.json");
  }
  if (!cfg.g.empty()) {
    json gj = json::array();
    CgfOptions opts;
    opts.batch_count = cfg.ensemble.batch_count;
    opts.ess_min_fraction = cfg.ess_min_fraction;
    for (const auto& spec : cfg.g) {
      const auto g = cfg.test_function(spec, s.k);
      for (std::size_t r = 0; r < s.ladder.size(); ++r) {
        const auto e = estimate_gfunctional(s.tensor.window_matrix(r), s.k, g, s.ladder[r], opts);
        gj.push_back({{"g", e.g_id}, {"R", s.ladder[r]}, {"value", e.value}, {"ci", e.ci_halfwidth},
                      {"ess", e.ess}, {"shift", e.shift}, {"lower_bound", e.lower_bound},
                      {"lower_bound_ok", e.lower_bound_ok}, {"trusted", e.trusted}});
      }
    }
    write_text(dir / "gfunctional.json", gj.dump(2) + "\n");
    m.output("gfunctional.json");
  }
  m.write(dir);
  return kExitOk;
}

int cmd_rate(const Options& o) {
  const RunConfig cfg = resolve(o);
  const fs::path dir = prepare_dir(cfg);
  Manifest m(cfg, "rate");
  CgfLimit lim;
  std::optional<SampleSet> samples;
  if (!o.cgf.empty()) {
    std::ifstream in(o.cgf);
    if (!in) throw ConfigError("cannot open CGF file " + o.cgf);
    lim = read_cgf_csv(in);
    m.body()["cgf_source"] = o.cgf;
  } else {
    samples = obtain_samples(cfg, o, m);
    const CgfTable table = m.timed("cgf", [&] { return compute_cgf(cfg, *samples); });
    m.body()["trust"] = trust_summary(table);
    lim = cgf_limit(table);
  }
  const Lattice x = Lattice::uniform(lim.lambda.k(), cfg.x.lo, cfg.x.hi, cfg.x.count);
  const RateFunctionGrid rate = m.timed("legendre", [&] { return legendre_transform(lim.lambda, lim.values, lim.trusted, x); });
  std::size_t flagged = 0;
  for (bool b : rate.boundary_flag) flagged += b ? 1 : 0;
  if (flagged > 0) {
    std::cerr << "warning: " << flagged << " of " << x.size()
              << " x points take their slope from the edge of the trusted lambda set\n";
  }
  m.body()["boundary_flagged"] = flagged;
  const auto f = formats_of(cfg, o);
  if (wants(f, "csv")) {
    std::ostringstream os;
    write_rate_csv(os, rate);
    write_text(dir / "rate.csv", os.str());
    m.output("rate.csv");
  }
  if (wants(f, "json")) {
    write_text(dir / "rate.json", rate_json(rate).dump(2) + "\n");
    m.output("rate.json");
  }
  if (!cfg.time_subsets.empty()) {
    if (!samples) throw ConfigError("experiment.time_subsets needs samples, not a CGF file");
    const auto env = m.timed("envelope", [&] { return rate_envelope(cfg, *samples, cfg.time_subsets); });
    std::ostringstream os;
    write_rate_csv(os, env, "finite lower envelope: max over the listed time subsets");
    write_text(dir / "rate_envelope.csv", os.str());
    m.output("rate_envelope.csv");
  }
  m.write(dir);
  return kExitOk;
}

int cmd_diagnose(const Options& o) {
  const RunConfig cfg = resolve(o);
  const fs::path dir = prepare_dir(cfg);
  Manifest m(cfg, "diagnose");
  const DiagnosticsReport rep = m.timed("diagnostics", [&] { return run_diagnostics(cfg); });
  const json j = report_json(rep);
  write_text(dir / "diagnostics.json", j.dump(2) + "\n");
  m.output("diagnostics.json");
  if (wants(formats_of(cfg, o), "csv")) {
    std::ostringstream os;
    os << "name,pass,control,inconclusive,margin,n_paths,seed\n";
    for (const auto& r : rep.records) {
      os << r.name << ',' << r.pass << ',' << r.control << ',' << r.inconclusive << ',' << r.margin << ','
         << r.n_paths << ',' << r.seed << '\n';
    }
    write_text(dir / "diagnostics.csv", os.str());
    m.output("diagnostics.csv");
  }
  m.body()["all_pass"] = rep.all_pass();
  m.write(dir);
  for (const auto& r : rep.records) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << (r.control ? " (control)" : "")
              << (r.inconclusive ? " (inconclusive)" : "") << (r.note.empty() ? "" : "  " + r.note) << '\n';
  }
  return rep.all_pass() ? kExitOk : kExitDiagnostics;
}

int cmd_report(const Options& o) {
  fs::path dir = o.out;
  if (dir.empty() && !o.config.empty()) dir = load_config(o.config).out_dir;
  if (dir.empty()) throw ConfigError("report needs --out or --config");
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest.json: ") + e.what());
  }
  json summary = {{"command", manifest.value("command", "")},
                  {"config_hash", manifest.value("config_hash", "")},
                  {"seed", manifest.value("seed", 0)},
                  {"version", manifest.value("version", "")},
                  {"outputs", manifest.value("outputs", json::array())},
                  {"timings_s", manifest.value("timings_s", json::object())}};
  if (manifest.contains("trust")) summary["trust"] = manifest["trust"];
  if (manifest.contains("snap")) summary["max_time_snap_error"] = manifest["snap"].value("max_time_error", 0.0);
  std::ifstream diag(dir / "diagnostics.json");
  if (diag) {
    const json d = json::parse(diag);
    json names = json::array();
    for (const auto& r : d["records"]) {
      names.push_back({{"name", r["name"]}, {"pass", r["pass"]}, {"control", r["control"]}});
    }
    summary["diagnostics"] = {{"all_pass", d["all_pass"]}, {"records", names}};
  }
  if (o.format == "json") {
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "command      " << summary["command"].get<std::string>() << '\n'
            << "config hash  " << summary["config_hash"].get<std::string>() << '\n'
            << "seed         " << summary["seed"] << '\n'
            << "version      " << summary["version"].get<std::string>() << '\n';
  for (const auto& [phase, secs] : summary["timings_s"].items()) {
    std::cout << "time " << phase << ": " << secs << " s\n";
  }
  for (const auto& f : summary["outputs"]) std::cout << "output       " << f.get<std::string>() << '\n';
  if (summary.contains("trust")) std::cout << "trust        " << summary["trust"].dump() << '\n';
  if (summary.contains("diagnostics")) {
    for (const auto& r : summary["diagnostics"]["records"]) {
      std::cout << (r["pass"].get<bool>() ? "PASS " : "FAIL ") << r["name"].get<std::string>()
                << (r["control"].get<bool>() ? " (control)" : "") << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Monte Carlo estimation of large-deviation quantities for spatial averages of SPDEs"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration (or a manifest)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "override ensemble.seed");
    sub->add_option("--threads", o.threads, "worker threads (results do not depend on it)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* sim = app.add_subcommand("simulate", "simulate the ensemble and write F_R(T_k) samples");
  auto* cgf = app.add_subcommand("cgf", "scaled cumulant generating function tables");
  auto* rate = app.add_subcommand("rate", "rate function by Legendre transform");
  auto* diag = app.add_subcommand("diagnose", "run the enabled diagnostic checks");
  auto* rep = app.add_subcommand("report", "summarize an output directory");
  for (auto* s : {sim, cgf, rate, diag, rep}) add_common(s);
  cgf->add_option("--samples", o.samples, "read samples instead of simulating");
  rate->add_option("--samples", o.samples, "read samples instead of simulating");
  rate->add_option("--cgf", o.cgf, "read a CGF CSV instead of computing it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*cgf) return cmd_cgf(o);
    if (*rate) return cmd_rate(o);
    if (*diag) return cmd_diagnose(o);
    return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const PreconditionError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (step " << e.step() << ", path " << e.path() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ldplab::cli
