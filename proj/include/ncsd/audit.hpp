#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ncsd/ncsd.hpp"
#include "ncsd/problem.hpp"

namespace ncsd {

struct EnvelopeViolation {
  std::int64_t k;
  double bound;
  double observed;
};

struct RunReport {
  std::vector<EnvelopeViolation> violations;
  /// Number of iterations where an envelope applied.
  std::int64_t checked = 0;
  /// Least-squares slope of log(gap) against log(k) (against k for the
  /// geometric schedule); NaN with fewer than two usable points.
  double fitted_rate = 0.0;
  bool ok() const { return violations.empty(); }
};

/// Compares f(x_k) - f_star with the schedule's guaranteed envelope at every
/// record, with absolute tolerance `tol`.
RunReport verify_envelope(const IterateTrace& trace, double f_star, double tol = 1e-7);

/// Throws ContractViolation when `spec` has no known optimum.
RunReport verify_envelope(const IterateTrace& trace, const ProblemSpec& spec, double tol = 1e-7);

/// One inequality that failed. `lhs <= rhs` was expected.
struct AuditFinding {
  std::string check;
  std::int64_t k;
  double lhs;
  double rhs;
};

/// Per-iteration invariants of a trace. Checks that need the optimum are
/// skipped when `known` is empty.
///
///   feasible        x_k in C and ||x_{k+1} - x_k|| <= eta_k
///   monotone        f(x_{k+1}) <= f(x_k)
///   armijo          f(x_{k+1}) <= f(x_k) + rho lambda g'd
///   stall_gap       stalled => f(x_k) - f* <= 2 cert_eps L
///   ls_cap          line-search reductions within the sufficient-step bound + 2
///   descent_far     eta <= ||z||: g'd <= -(eta / ||z||)(gap - 2 cert_eps L)
///   step_far        eta <= ||z||: lambda eta >= min(tau eta_bar, eta)
///   descent_near    smooth f, eta >= ||z||: g'd <= -gap
///   step_near       smooth f, eta >= ||z||: lambda >= min(2 tau (1-rho) gap / (beta eta^2), 1)
///
/// with z = x* - x_k and gap = f(x_k) - f*.
struct AuditReport {
  std::vector<AuditFinding> findings;
  /// Iterations each check applied to, by check name.
  std::vector<std::pair<std::string, std::int64_t>> applied;
  bool ok() const { return findings.empty(); }
  std::int64_t applied_count(const std::string& check) const;
};

AuditReport audit_trace(const IterateTrace& trace, const FunctionOracle& f, const ConstraintSet& C,
                        const std::optional<KnownOptimum>& known);

/// Reductions the backtracking may need before the step is short enough to
/// satisfy the sufficient-decrease test (plus a slack of 2). Infinite when
/// no bound exists (nonsmooth f with eps = 0).
double line_search_cap(double eps, double eta, double gtd, double beta, double tau, double rho, bool smooth);

using SubdiffOracle = std::function<GeneratorSet(const FunctionOracle&, const Vector&, double)>;

struct BoundWitness {
  /// "lower" (Lipschitz lower bound) or "upper" (weak-smoothness upper bound).
  std::string bound;
  Vector x;
  Vector y;
  double excess;
};

struct BoundsReport {
  std::int64_t lower_pairs = 0;
  std::int64_t upper_pairs = 0;
  /// Largest amount by which either inequality was exceeded (<= 0 when all hold).
  double max_lower_excess = 0.0;
  double max_upper_excess = 0.0;
  std::vector<BoundWitness> violations;
  bool ok() const { return violations.empty(); }
};

/// For `samples` seeded draws x, y in C checks
///   f(y) >= f(x) + max_g g'(y - x) - 2 cert_eps L
/// and for y within eps of x
///   f(y) <= f(x) + max_g g'(y - x) + beta / 2 ||y - x||^2
/// each with absolute slack `tol`.
BoundsReport verify_subgradient_bounds(const FunctionOracle& f, const ConstraintSet& C, double eps,
                                       std::int64_t samples, std::uint64_t seed, double tol = 1e-9,
                                       const SubdiffOracle& oracle = relaxed_subdiff);

}  // namespace ncsd
