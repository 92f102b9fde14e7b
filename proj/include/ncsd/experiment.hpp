#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncsd/audit.hpp"
#include "ncsd/problem.hpp"

namespace ncsd {

inline constexpr const char* kSummaryHeader = "problem,method,iters,final_gap,wall_ns,envelope_ok";

struct MethodResult {
  /// ncsd | subgradient | frank_wolfe
  std::string method;
  std::int64_t iters = 0;
  double final_fx = 0.0;
  /// final_fx - f_star, NaN without a known optimum.
  double final_gap = 0.0;
  std::int64_t wall_ns = 0;
  /// Empty when the method ran to completion.
  std::string error;
};

struct ExperimentResult {
  std::string problem;
  std::vector<MethodResult> methods;
  /// Envelope check of the NCSD run; empty when no envelope applies.
  std::optional<RunReport> envelope;
  /// Invariant audit of the NCSD run (empty report when it failed).
  AuditReport audit;
};

struct ExperimentOptions {
  /// Directory for per-run trace files and summary.csv; nothing is written
  /// when empty.
  std::string out_dir;
  int jobs = 1;
  /// Write measured wall times instead of zeros.
  bool timing = false;
};

/// Runs NCSD and both baselines on every spec. Baselines take as many steps
/// as NCSD did. Results come back in input order whatever the parallelism,
/// and a failing run never affects the others.
std::vector<ExperimentResult> run_experiment(const std::vector<ProblemSpec>& specs, const ExperimentOptions& options);

/// All *.json files of `dir`, sorted by file name.
std::vector<ProblemSpec> load_suite(const std::string& dir);

}  // namespace ncsd
