#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldplab/grid.hpp"
#include "ldplab/kernels.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab/solver.hpp"
#include "ldplab/test_functions.hpp"

namespace ldplab::cli {

using nlohmann::json;

struct RangeSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 21;
};

struct PresetSpec {
  std::string preset;
  std::vector<double> params;
};

struct TailDiag {
  bool enabled = true;
  std::vector<double> R{16, 32};
  double z_lo = 0.5, z_hi = 3.0;
  std::size_t points = 6;
  bool control = true;
};

struct WindowDiffDiag {
  bool enabled = true;
  std::vector<double> R{16, 32};
  double alpha = 0.75;  ///< theta = (2R)^alpha, L = R
};

struct CovDecayDiag {
  bool enabled = false;
  double L = 8, R = 8;
  std::vector<double> thetas{2, 4, 8};
  double clamp = 0.0;  ///< 0 = 10 sqrt(qv bound of the first window)
};

struct ShiftDiag {
  bool enabled = true;
  double b = 8;
  std::vector<double> shifts{8, 16};
  double level = 0.01;
  bool control = true;
  double control_width = 2.0;  ///< window flush with the right boundary
};

struct SubaddDiag {
  bool enabled = true;
  PresetSpec g{"negsqrt", {}};
  std::vector<std::vector<double>> pairs{{8, 8}, {16, 16}, {8, 24}};
  double alpha = 0.75, beta = 0.2;
  std::vector<double> ladder{8, 16, 32, 64};
};

struct IncrementDiag {
  bool enabled = true;
  double R = 32, base = 0.5;
  std::vector<double> gaps{0.05, 0.1, 0.2, 0.4};
};

struct HolderDiag {
  bool enabled = true;
  double R = 16, delta = 0.25;
  std::vector<double> M;  ///< empty = automatic
  std::size_t time_points = 64;
};

struct DiagnosticsSpec {
  double t = 1.0;
  TailDiag tail;
  WindowDiffDiag window_difference;
  CovDecayDiag covariance_decay;
  ShiftDiag shift;
  SubaddDiag subadditivity;
  IncrementDiag increments;
  HolderDiag holder;

  bool any_enabled() const;
};

struct RunConfig {
  // equation
  std::string kind = "heat";
  PresetSpec sigma{"const", {1.0}};
  double c_h = 0.0, c_w1 = 0.0, c_w2 = 0.0;
  // noise
  std::string kernel = "white";
  double amplitude = 1.0, length = 1.0;
  // grid; pad_auto uses the minimum admissible pad
  GridConfig grid;
  bool pad_auto = true;
  // ensemble
  EnsembleConfig ensemble{10000};
  // experiment
  std::vector<double> times{1.0};
  RangeSpec lambda{-1.0, 1.0, 21};
  RangeSpec x{-2.0, 2.0, 41};
  double exponent_cap = 20.0;
  double ess_min_fraction = 0.01;
  std::vector<std::vector<std::size_t>> time_subsets;
  std::vector<PresetSpec> g;
  DiagnosticsSpec diagnostics;
  // output
  std::string out_dir = "ldplab_out";
  std::vector<std::string> formats{"csv"};

  EquationSpec equation() const;
  CovarianceKernel noise_kernel() const;
  ConcaveTestFunction test_function(const PresetSpec& spec, std::size_t k) const;

  /// Every module precondition, checked before any simulation. Throws
  /// ConfigError naming the offending field.
  void validate() const;

  json to_json() const;
  /// Rejects unknown keys (ConfigError with the field path). Also accepts a
  /// manifest, whose "config" member is used.
  static RunConfig from_json(const json& j);

  /// FNV-1a over the canonical (sorted-key) dump of to_json(), without the
  /// thread count and the output directory.
  std::uint64_t hash() const;
};

RunConfig load_config(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace ldplab::cli
