#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ncsd/constraints.hpp"
#include "ncsd/errors.hpp"
#include "ncsd/inner.hpp"
#include "ncsd/model.hpp"
#include "ncsd/schedules.hpp"

namespace ncsd {

struct NcsdConfig {
  double rho = 0.5;
  double tau = 0.5;
  /// Inner duality-gap tolerance; defaults to default_tol_inner(L, eta_k).
  std::optional<double> tol_inner;
  std::int64_t max_outer = 1000;
  int max_line_search = 60;
  ScheduleHandle schedule;
};

struct IterateState {
  std::int64_t k = 0;
  Vector x;
  double fx = 0.0;
  bool stalled = false;
};

/// State x_k on entry to iteration k plus what the step did. The last record
/// of a trace carries the final state only (has_step == false, step fields
/// NaN).
struct TraceRecord {
  std::int64_t k = 0;
  double fx = 0.0;
  double eta = 0.0;
  double eps = 0.0;
  double gtd = 0.0;
  double lambda = 0.0;
  int ls_iters = 0;
  double inner_gap = 0.0;
  bool stalled = false;
  std::int64_t wall_ns = 0;

  // Not serialized.
  bool has_step = false;
  Vector x;
  Vector d;
  /// GeneratorSet::epsilon of the oracle call.
  double cert_eps = 0.0;
  /// 2 * cert_eps * L on stalled iterations, NaN otherwise.
  double certificate = 0.0;
  double tol_inner = 0.0;
  /// False when the inner gap stayed above tol_inner.
  bool inner_exact = true;
};

struct IterateTrace {
  std::vector<TraceRecord> records;
  double lipschitz = 0.0;
  double rho = 0.5;
  double tau = 0.5;
  ScheduleHandle schedule;
};

class LineSearchFailure : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// A step failed mid-run; `trace()` holds every record completed so far.
class RunFailure : public NumericFailure {
 public:
  RunFailure(const std::string& what, double residual, IterateTrace partial)
      : NumericFailure(what, residual), trace_(std::move(partial)) {}
  const IterateTrace& trace() const noexcept { return trace_; }

 private:
  IterateTrace trace_;
};

struct StepResult {
  IterateState next;
  TraceRecord record;
};

/// One iteration: direction from the relaxed subdifferential, stall test,
/// backtracking. Throws LineSearchFailure after cfg.max_line_search
/// reductions.
StepResult step(const FunctionOracle& f, const ConstraintSet& C, const IterateState& state, double eta,
                double eps, const NcsdConfig& cfg);

/// Iterates `step` from x0 until cfg.max_outer iterations, the schedule's
/// stop index, or a stall under a fixed schedule (which would repeat
/// forever).
IterateTrace run(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0, const NcsdConfig& cfg);

/// Optimality-gap bound 2 * eps * L carried by a stalled iteration.
double stall_certificate(double eps, double L);

/// Decrease of f below which comparisons of f values are dominated by
/// rounding. A line search that runs out of reductions with its required
/// decrease under this floor ends as a stall rather than a failure.
inline double rounding_floor(double fx) { return 1e-13 * std::max(1.0, std::abs(fx)); }

}  // namespace ncsd
