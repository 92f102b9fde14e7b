#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ncsd {

enum class ScheduleKind { fixed, pwl_halving, strongly_convex, sc_smooth };

const char* to_string(ScheduleKind kind);

struct StepSizes {
  double eta;
  double eps;
};

/// One constant-parameter phase of the halving schedule.
struct PwlPhase {
  /// Gap target of the phase: (1 - 2/e) D / 2^i.
  double eps_bar;
  std::int64_t start;
  std::int64_t length;
  double eta;
  double eps;
};

/// Rule k -> (eta_k, eps_k) with its constants. Only the fields relevant to
/// `kind` are meaningful; the rest stay at zero.
///
/// `practical` marks scaled-down variants built from user constants rather
/// than the analytic formulas. They keep the decay shape but carry no
/// convergence envelope.
struct ScheduleHandle {
  ScheduleKind kind = ScheduleKind::fixed;
  bool practical = false;

  double eta = 0.0;  // fixed
  double eps = 0.0;  // fixed

  double D = 0.0;
  double c = 0.0;
  double L = 0.0;
  double target_eps = 0.0;  // pwl_halving
  double a = 0.0;           // strongly_convex, sc_smooth
  double gamma = 0.0;       // sc_smooth

  std::vector<PwlPhase> phases;
  std::int64_t t_dagger = 0;

  StepSizes at(std::int64_t k) const;

  /// Iteration count after which the plan is exhausted (pwl_halving only).
  std::optional<std::int64_t> stop_index() const;

  /// Upper bound on f(x_k) - f* guaranteed at iteration k, if any. For
  /// pwl_halving the bound applies at phase boundaries (D / 2^i) and at the
  /// stop index (target_eps); other k return nullopt.
  std::optional<double> envelope(std::int64_t k) const;

  /// "kind=... a=... c=... gamma=... ..." (no leading "# schedule: ").
  std::string describe() const;
};

/// max{4L, beta_eff R / (1 - rho)} * R / (rho tau)
double compute_c(double L, double beta, double R, double rho, double tau);

ScheduleHandle make_fixed(double eta, double eps);

/// Throws ContractViolation when D > c, D <= 0 or target_eps <= 0.
ScheduleHandle make_pwl_halving(double D, double c, double L, double target_eps);

ScheduleHandle make_strongly_convex(double alpha, double beta, double L, double rho, double tau, double D);

/// Throws ContractViolation unless 0 < alpha <= beta.
ScheduleHandle make_sc_smooth(double alpha, double beta, double rho, double tau, double D);

/// Same shapes with caller-chosen constants; no envelope.
ScheduleHandle make_practical_pwl(double D, double c, double L, double target_eps);
ScheduleHandle make_practical_strongly_convex(double a);
ScheduleHandle make_practical_sc_smooth(double a, double gamma);

/// Smallest k with D gamma^(2k) <= eps for an sc_smooth handle.
std::int64_t iterations_to_reach(const ScheduleHandle& schedule, double eps);

/// Rebuilds a handle from the key/value pairs printed by describe().
ScheduleHandle schedule_from_description(const std::map<std::string, std::string>& fields);

}  // namespace ncsd
