#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldplab/diagnostics.hpp"
#include "ldplab/ldp.hpp"
#include "ldplab/montecarlo.hpp"
#include "ldplab_cli/config.hpp"

namespace ldplab::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitDiagnostics = 3 };

/// Window integrals F_R(T_k) for every ladder R.
struct SampleSet {
  std::vector<double> ladder;
  std::size_t k = 0;
  SampleTensor tensor;
};

SampleSet simulate_samples(const RunConfig& cfg);

/// Columns: path_id,R,t_index,F_value
void write_samples_csv(std::ostream& out, const SampleSet& s);
SampleSet read_samples_csv(std::istream& in);
json samples_json(const SampleSet& s);
SampleSet samples_from_json(const json& j);

/// QV bound per unit length for every ladder R, maximized over the times.
std::vector<double> ladder_qv(const RunConfig& cfg, std::span<const double> ladder);

CgfTable compute_cgf(const RunConfig& cfg, const SampleSet& samples);

/// Columns: R,lambda_1..lambda_k,value,ci,ess,trusted. Extrapolated rows carry R = inf.
void write_cgf_csv(std::ostream& out, const CgfTable& table);
json cgf_json(const CgfTable& table);

/// The extrapolated rows of a CGF file.
struct CgfLimit {
  Lattice lambda;
  std::vector<double> values;
  std::vector<bool> trusted;
};

CgfLimit read_cgf_csv(std::istream& in);
CgfLimit cgf_limit(const CgfTable& table);

/// Columns: x_1..x_k,I,boundary_flag
void write_rate_csv(std::ostream& out, const RateFunctionGrid& rate, const std::string& comment = "");
json rate_json(const RateFunctionGrid& rate);

/// max over the subsets of the rate of the projected point; `subsets` index the times.
RateFunctionGrid rate_envelope(const RunConfig& cfg, const SampleSet& samples,
                               const std::vector<std::vector<std::size_t>>& subsets);

DiagnosticsReport run_diagnostics(const RunConfig& cfg);
json report_json(const DiagnosticsReport& report);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ldplab::cli
