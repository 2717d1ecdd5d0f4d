#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ldplab/diagnostics.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/noise.hpp"
#include "ldplab_cli/commands.hpp"

namespace ldplab::cli {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("malformed number '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads data lines, skipping comments; returns the header cells.
std::vector<std::string> read_header(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    return split(line);
  }
  throw ConfigError("CSV file has no header");
}

// Axis values of a tensor lattice recovered from its points.
Lattice lattice_from_points(const std::vector<std::vector<double>>& pts, std::size_t k) {
  Lattice lat;
  lat.axes.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    std::set<double> vals;
    for (const auto& p : pts) vals.insert(p[a]);
    lat.axes[a].assign(vals.begin(), vals.end());
  }
  if (lat.size() != pts.size()) throw ConfigError("CGF rows do not form a tensor lattice");
  return lat;
}

}  // namespace

SampleSet simulate_samples(const RunConfig& cfg) {
  const EquationSpec eq = cfg.equation();
  const CovarianceKernel gamma = cfg.noise_kernel();
  const NoiseSource noise(gamma, cfg.grid);
  SampleSet s;
  s.ladder = cfg.ensemble.r_ladder;
  s.k = cfg.times.size();
  s.tensor = run_ensemble(eq, cfg.grid, noise, TimePoints{cfg.times}, cfg.ensemble);
  return s;
}

void write_samples_csv(std::ostream& out, const SampleSet& s) {
  out << "path_id,R,t_index,F_value\n";
  const auto& t = s.tensor;
  for (std::size_t p = 0; p < t.paths(); ++p) {
    for (std::size_t w = 0; w < t.windows(); ++w) {
      for (std::size_t i = 0; i < t.k(); ++i) {
        out << p << ',' << num(s.ladder[w]) << ',' << i << ',' << num(t.at(p, w, i)) << '\n';
      }
    }
  }
}

SampleSet read_samples_csv(std::istream& in) {
  const auto header = read_header(in);
  if (header != std::vector<std::string>{"path_id", "R", "t_index", "F_value"}) {
    throw ConfigError("samples CSV: expected header path_id,R,t_index,F_value");
  }
  struct Row {
    std::size_t p, i;
    double R, F;
  };
  std::vector<Row> rows;
  std::vector<double> ladder;
  std::size_t n = 0, k = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto c = split(line);
    if (c.size() != 4) throw ConfigError("samples CSV: expected 4 columns in '" + line + "'");
    Row r{static_cast<std::size_t>(parse_num(c[0])), static_cast<std::size_t>(parse_num(c[2])),
          parse_num(c[1]), parse_num(c[3])};
    if (std::find(ladder.begin(), ladder.end(), r.R) == ladder.end()) ladder.push_back(r.R);
    n = std::max(n, r.p + 1);
    k = std::max(k, r.i + 1);
    rows.push_back(r);
  }
  if (rows.size() != n * k * ladder.size()) throw ConfigError("samples CSV: incomplete path/R/time table");
  SampleSet s;
  s.ladder = ladder;
  s.k = k;
  s.tensor = SampleTensor(n, ladder.size(), k);
  for (const auto& r : rows) {
    const auto w = static_cast<std::size_t>(std::find(ladder.begin(), ladder.end(), r.R) - ladder.begin());
    s.tensor.at(r.p, w, r.i) = r.F;
  }
  return s;
}

json samples_json(const SampleSet& s) {
  json rows = json::array();
  const auto& t = s.tensor;
  for (std::size_t p = 0; p < t.paths(); ++p) {
    for (std::size_t w = 0; w < t.windows(); ++w) {
      for (std::size_t i = 0; i < t.k(); ++i) rows.push_back({p, s.ladder[w], i, t.at(p, w, i)});
    }
  }
  return {{"columns", {"path_id", "R", "t_index", "F_value"}}, {"ladder", s.ladder}, {"k", s.k}, {"rows", rows}};
}

SampleSet samples_from_json(const json& j) {
  SampleSet s;
  try {
    s.ladder = j.at("ladder").get<std::vector<double>>();
    s.k = j.at("k").get<std::size_t>();
    const auto& rows = j.at("rows");
    if (s.ladder.empty() || s.k == 0 || rows.size() % (s.ladder.size() * s.k) != 0) {
      throw ConfigError("samples JSON: incomplete table");
    }
    s.tensor = SampleTensor(rows.size() / (s.ladder.size() * s.k), s.ladder.size(), s.k);
    for (const auto& r : rows) {
      const auto p = r.at(0).get<std::size_t>();
      const auto R = r.at(1).get<double>();
      const auto i = r.at(2).get<std::size_t>();
      const auto it = std::find(s.ladder.begin(), s.ladder.end(), R);
      if (it == s.ladder.end() || p >= s.tensor.paths() || i >= s.k) {
        throw ConfigError("samples JSON: row out of range");
      }
      s.tensor.at(p, static_cast<std::size_t>(it - s.ladder.begin()), i) = r.at(3).get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("samples JSON: ") + e.what());
  }
  return s;
}

std::vector<double> ladder_qv(const RunConfig& cfg, std::span<const double> ladder) {
  const EquationSpec eq = cfg.equation();
  const CovarianceKernel gamma = cfg.noise_kernel();
  std::vector<double> out;
  for (double R : ladder) {
    double c = 0.0;
    for (double t : cfg.times) c = std::max(c, qv_bound(eq, gamma, t, R).c_hat);
    out.push_back(c);
  }
  return out;
}

CgfTable compute_cgf(const RunConfig& cfg, const SampleSet& samples) {
  if (samples.k != cfg.times.size()) {
    throw ConfigError("samples have " + std::to_string(samples.k) + " times but the config lists " +
                      std::to_string(cfg.times.size()));
  }
  CgfOptions opts;
  opts.batch_count = cfg.ensemble.batch_count;
  opts.exponent_cap = cfg.exponent_cap;
  opts.ess_min_fraction = cfg.ess_min_fraction;
  const Lattice lambda = Lattice::uniform(samples.k, cfg.lambda.lo, cfg.lambda.hi, cfg.lambda.count);
  const auto c_qv = ladder_qv(cfg, samples.ladder);
  return build_cgf_table(samples.tensor, samples.ladder, lambda, c_qv, opts);
}

void write_cgf_csv(std::ostream& out, const CgfTable& table) {
  out << "R";
  for (std::size_t a = 0; a < table.k(); ++a) out << ",lambda_" << a + 1;
  out << ",value,ci,ess,trusted\n";
  const auto pts = table.lambda.points();
  for (std::size_t r = 0; r < table.ladder.size(); ++r) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& e = table.per_r[r][j];
      out << num(table.ladder[r]);
      for (double l : pts[j]) out << ',' << num(l);
      out << ',' << num(e.value) << ',' << num(e.ci_halfwidth) << ',' << num(e.ess) << ','
          << (e.trusted() ? 1 : 0) << '\n';
    }
  }
  // Extrapolated rows: ci is the widest trusted ladder CI, ess the smallest.
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double ci = 0.0, ess = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < table.ladder.size(); ++r) {
      const auto& e = table.per_r[r][j];
      if (!e.trusted()) continue;
      ci = std::max(ci, e.ci_halfwidth);
      ess = std::min(ess, e.ess);
    }
    if (!table.trusted[j]) {
      ci = std::numeric_limits<double>::quiet_NaN();
      ess = 0.0;
    }
    out << "inf";
    for (double l : pts[j]) out << ',' << num(l);
    out << ',' << num(table.extrapolated[j]) << ',' << num(ci) << ',' << num(ess) << ','
        << (table.trusted[j] ? 1 : 0) << '\n';
  }
}

json cgf_json(const CgfTable& table) {
  json per_r = json::array();
  const auto pts = table.lambda.points();
  for (std::size_t r = 0; r < table.ladder.size(); ++r) {
    json rows = json::array();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& e = table.per_r[r][j];
      rows.push_back({{"lambda", pts[j]},
                      {"value", e.value},
                      {"ci", e.ci_halfwidth},
                      {"ess", e.ess},
                      {"spread_ok", e.spread_ok},
                      {"ess_ok", e.ess_ok},
                      {"trusted", e.trusted()}});
    }
    per_r.push_back({{"R", table.ladder[r]}, {"rows", rows}});
  }
  json limit = json::array();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const auto& f = table.fits[j];
    limit.push_back({{"lambda", pts[j]},
                     {"value", table.extrapolated[j]},
                     {"trusted", static_cast<bool>(table.trusted[j])},
                     {"slope", f.slope},
                     {"max_residual", f.max_residual},
                     {"used_fallback", f.used_fallback},
                     {"flagged", f.flagged},
                     {"monotone", f.monotone},
                     {"note", f.note}});
  }
  return {{"ladder", table.ladder}, {"per_r", per_r}, {"extrapolated", limit}};
}

CgfLimit read_cgf_csv(std::istream& in) {
  const auto header = read_header(in);
  if (header.size() < 6 || header.front() != "R" || header[header.size() - 4] != "value") {
    throw ConfigError("CGF CSV: expected header R,lambda_1..,value,ci,ess,trusted");
  }
  const std::size_t k = header.size() - 5;
  std::vector<std::vector<double>> pts;
  std::map<std::vector<double>, std::pair<double, bool>> by_point;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto c = split(line);
    if (c.size() != header.size()) throw ConfigError("CGF CSV: wrong column count in '" + line + "'");
    if (c[0] != "inf") continue;
    std::vector<double> p(k);
    for (std::size_t a = 0; a < k; ++a) p[a] = parse_num(c[1 + a]);
    pts.push_back(p);
    by_point[p] = {parse_num(c[k + 1]), c[k + 4] == "1"};
  }
  if (pts.empty()) throw ConfigError("CGF CSV: no extrapolated (R = inf) rows");
  CgfLimit lim;
  lim.lambda = lattice_from_points(pts, k);
  for (const auto& p : lim.lambda.points()) {
    const auto it = by_point.find(p);
    if (it == by_point.end()) throw ConfigError("CGF CSV: lattice point missing");
    lim.values.push_back(it->second.first);
    lim.trusted.push_back(it->second.second);
  }
  return lim;
}

CgfLimit cgf_limit(const CgfTable& table) { return {table.lambda, table.extrapolated, table.trusted}; }

void write_rate_csv(std::ostream& out, const RateFunctionGrid& rate, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  for (std::size_t a = 0; a < rate.x.k(); ++a) out << "x_" << a + 1 << ',';
  out << "I,boundary_flag\n";
  const auto pts = rate.x.points();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (double v : pts[j]) out << num(v) << ',';
    out << num(rate.values[j]) << ',' << (rate.boundary_flag[j] ? 1 : 0) << '\n';
  }
}

json rate_json(const RateFunctionGrid& rate) {
  json rows = json::array();
  const auto pts = rate.x.points();
  std::size_t flagged = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    rows.push_back({{"x", pts[j]}, {"I", rate.values[j]}, {"boundary_flag", static_cast<bool>(rate.boundary_flag[j])}});
    if (rate.boundary_flag[j]) ++flagged;
  }
  return {{"rows", rows}, {"argmin", rate.x.point(rate.argmin)}, {"boundary_flagged", flagged}};
}

RateFunctionGrid rate_envelope(const RunConfig& cfg, const SampleSet& samples,
                               const std::vector<std::vector<std::size_t>>& subsets) {
  if (subsets.empty()) throw ConfigError("rate_envelope: no time subsets");
  const Lattice full = Lattice::uniform(samples.k, cfg.x.lo, cfg.x.hi, cfg.x.count);
  RateFunctionGrid env;
  env.x = full;
  env.values.assign(full.size(), -std::numeric_limits<double>::infinity());
  env.boundary_flag.assign(full.size(), false);
  env.argmax_lambda.assign(full.size(), 0);
  for (const auto& sub : subsets) {
    SampleSet part;
    part.ladder = samples.ladder;
    part.k = sub.size();
    part.tensor = SampleTensor(samples.tensor.paths(), samples.tensor.windows(), sub.size());
    for (std::size_t p = 0; p < part.tensor.paths(); ++p) {
      for (std::size_t w = 0; w < part.tensor.windows(); ++w) {
        for (std::size_t i = 0; i < sub.size(); ++i) part.tensor.at(p, w, i) = samples.tensor.at(p, w, sub[i]);
      }
    }
    RunConfig sub_cfg = cfg;
    sub_cfg.times.clear();
    for (std::size_t i : sub) sub_cfg.times.push_back(cfg.times.at(i));
    const CgfTable table = compute_cgf(sub_cfg, part);
    const Lattice x = Lattice::uniform(sub.size(), cfg.x.lo, cfg.x.hi, cfg.x.count);
    const RateFunctionGrid rate = legendre_transform(table, x);
    std::vector<std::size_t> idx(sub.size());
    for (std::size_t j = 0; j < full.size(); ++j) {
      const auto m = full.multi_index(j);
      for (std::size_t i = 0; i < sub.size(); ++i) idx[i] = m[sub[i]];
      const std::size_t f = x.flat_index(idx);
      if (rate.values[f] > env.values[j]) {
        env.values[j] = rate.values[f];
        env.boundary_flag[j] = rate.boundary_flag[f];
      }
    }
  }
  env.argmin = static_cast<std::size_t>(std::min_element(env.values.begin(), env.values.end()) - env.values.begin());
  return env;
}

}  // namespace ldplab::cli
