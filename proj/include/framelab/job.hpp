#pragma once

// Batch front end: JSON job files in, reports out. One job = one analysis
// (or a parameter sweep of one); reports are a machine JSON document, a
// human-readable text file and, for sweeps, a CSV plus an SVG line plot.

#include "framelab/equivalence.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace framelab {

struct SweepSpec {
  std::string parameter;  // mu | lambda1 | lambda2 | scale
  double from = 0.0;
  double to = 0.0;
  int steps = 2;
  std::string analysis;  // theorem to run per step (may inherit the job's)
};

struct JobSpec {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::string analysis;
  SpaceSpec X;
  SpaceSpec Xd;
  std::map<std::string, Mat> matrices;  // G, Phi, F, Psi, S, S_tilde, P
  PerturbationConstants constants;
  bool constants_given = false;
  std::optional<std::string> atomic_mode;
  std::optional<std::string> equivalence_from;
  std::optional<std::string> equivalence_to;
  std::optional<SweepSpec> sweep;
  std::optional<double> hilbert_A;
  std::optional<double> hilbert_B;
  VerifyOptions options;

  const Mat& matrix(const std::string& name) const;
  bool has_matrix(const std::string& name) const { return matrices.count(name) > 0; }
  FrameSystem system(const std::string& name) const;
};

JobSpec parse_job_text(const std::string& text);
JobSpec parse_job_file(const std::filesystem::path& path);

// Executes the job's analysis and returns the `result` object of the report.
nlohmann::ordered_json execute_analysis(const JobSpec& job);

nlohmann::ordered_json report_to_json(const TheoremReport& r);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> max_delta;
  std::optional<double> tol_residual;
  std::optional<std::string> oracle;  // auto|on|off
  bool force_sweep = false;           // `framelab sweep` entry point
};

struct RunResult {
  std::filesystem::path report_json;
  std::filesystem::path report_text;
  std::optional<std::filesystem::path> sweep_csv;
  std::optional<std::filesystem::path> sweep_svg;
  std::string verdict;  // empty when the analysis has no single verdict
};

// Parses, validates, executes and writes the report files into out_dir.
RunResult run_job(const std::filesystem::path& job_path,
                  const std::filesystem::path& out_dir,
                  const RunOverrides& overrides = {});

// Parse + validation only; throws input_error with a field-naming message.
void validate_job(const std::filesystem::path& job_path);

}  // namespace framelab
