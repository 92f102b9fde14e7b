#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ncsd/constraints.hpp"
#include "ncsd/model.hpp"
#include "ncsd/ncsd.hpp"
#include "ncsd/schedules.hpp"

namespace ncsd {

struct KnownOptimum {
  Vector x_star;
  double f_star = 0.0;
};

/// Optional "run" block of a problem file. Unset values fall back to the
/// defaults chosen by make_schedule / make_config.
struct RunSettings {
  /// fixed | pwl | sc | scsmooth | auto
  std::string schedule = "auto";
  std::int64_t max_iter = 1000;
  double rho = 0.5;
  double tau = 0.5;
  std::optional<double> tol_inner;
  std::optional<double> eta;         // fixed
  std::optional<double> eps;         // fixed
  std::optional<double> D;           // pwl, sc, scsmooth
  std::optional<double> target_eps;  // pwl
  /// Practical variant constants (outside the theory): c for pwl, a for sc
  /// and scsmooth, gamma for scsmooth.
  bool practical = false;
  std::optional<double> practical_c;
  std::optional<double> practical_a;
  std::optional<double> practical_gamma;
  /// Baseline step scale c0 in t_k = c0 / sqrt(k + 1); defaults to R / L.
  std::optional<double> subgradient_step;
};

struct ProblemSpec {
  std::string name;
  FunctionOracle f;
  ConstraintSet C;
  Vector x0;
  std::optional<KnownOptimum> known_opt;
  RunSettings run;
};

/// Parses and validates a problem document (see README for the schema).
/// Throws ParseError for malformed or ill-typed input and ValidationError
/// when the data violates an invariant; both carry a JSON pointer.
ProblemSpec parse_problem(std::string_view text);

/// Reads `path` and parses it. File errors are reported as ValidationError.
ProblemSpec load_problem(const std::string& path);

/// Schedule for `spec` honouring its run settings.
ScheduleHandle make_schedule(const ProblemSpec& spec);

NcsdConfig make_config(const ProblemSpec& spec);

}  // namespace ncsd
