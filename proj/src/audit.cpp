#include "ncsd/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ncsd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

double distance_to(const ConstraintSet& C, const Vector& x) {
  try {
    return (project(C, x) - x).norm();
  } catch (const ProjectionFailure& e) {
    return (e.best() - x).norm();
  }
}

class Auditor {
 public:
  explicit Auditor(AuditReport& report) : report_(report) {}

  void expect_le(const std::string& check, std::int64_t k, double lhs, double rhs) {
    count(check);
    if (!(lhs <= rhs)) report_.findings.push_back({check, k, lhs, rhs});
  }

 private:
  void count(const std::string& check) {
    for (auto& [name, n] : report_.applied) {
      if (name == check) {
        ++n;
        return;
      }
    }
    report_.applied.emplace_back(check, 1);
  }

  AuditReport& report_;
};

}  // namespace

RunReport verify_envelope(const IterateTrace& trace, double f_star, double tol) {
  RunReport report;
  std::vector<double> xs, ys;
  const bool geometric = trace.schedule.kind == ScheduleKind::sc_smooth;
  for (const TraceRecord& r : trace.records) {
    const double gap = r.fx - f_star;
    if (r.k >= 1 && gap > 0.0) {
      xs.push_back(geometric ? static_cast<double>(r.k) : std::log(static_cast<double>(r.k)));
      ys.push_back(std::log(gap));
    }
    const auto bound = trace.schedule.envelope(r.k);
    if (!bound) continue;
    ++report.checked;
    if (gap > *bound + tol) report.violations.push_back({r.k, *bound, gap});
  }
  report.fitted_rate = slope(xs, ys);
  return report;
}

RunReport verify_envelope(const IterateTrace& trace, const ProblemSpec& spec, double tol) {
  if (!spec.known_opt) throw ContractViolation("verify_envelope: problem '" + spec.name + "' has no known optimum");
  return verify_envelope(trace, spec.known_opt->f_star, tol);
}

std::int64_t AuditReport::applied_count(const std::string& check) const {
  for (const auto& [name, n] : applied) {
    if (name == check) return n;
  }
  return 0;
}

double line_search_cap(double eps, double eta, double gtd, double beta, double tau, double rho, bool smooth) {
  if (!(gtd < 0.0)) return kInf;
  const double by_curvature = 2.0 * (1.0 - rho) * (-gtd) / (effective_beta(beta) * eta * eta);
  const double sufficient = smooth ? by_curvature : std::min(eps / eta, by_curvature);
  if (!(sufficient > 0.0)) return kInf;
  if (sufficient >= 1.0) return 2.0;
  return std::ceil(std::log(1.0 / sufficient) / std::log(1.0 / tau)) + 2.0;
}

AuditReport audit_trace(const IterateTrace& trace, const FunctionOracle& f, const ConstraintSet& C,
                        const std::optional<KnownOptimum>& known) {
  AuditReport report;
  Auditor audit(report);
  const FunctionConstants k = constants(f, C);
  const double L = trace.lipschitz > 0.0 ? trace.lipschitz : k.lipschitz;
  const double beta = effective_beta(k.weak_smooth);
  const double R = diameter(C);
  const bool smooth = is_smooth(f);
  const double rho = trace.rho;
  const double tau = trace.tau;

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    audit.expect_le("feasible", r.k, distance_to(C, r.x), 1e-9);
    if (!r.has_step || i + 1 == trace.records.size()) continue;
    const TraceRecord& next = trace.records[i + 1];

    audit.expect_le("feasible", r.k, (next.x - r.x).norm(), r.eta + 1e-9);
    audit.expect_le("monotone", r.k, next.fx, r.fx);
    if (!r.stalled) {
      audit.expect_le("armijo", r.k, next.fx, r.fx + rho * r.lambda * r.gtd + 1e-12);
      const double cap = line_search_cap(r.eps, r.eta, r.gtd, k.weak_smooth, tau, rho, smooth);
      // The cap assumes exact arithmetic; skip steps whose guaranteed decrease
      // is already below the resolution of f.
      const double lambda_min = std::pow(tau, cap - 2.0);
      if (std::isfinite(cap) && rho * lambda_min * -r.gtd > rounding_floor(r.fx)) {
        audit.expect_le("ls_cap", r.k, r.ls_iters, cap);
      }
    }
    if (!known) continue;

    const double gap = r.fx - known->f_star;
    const Vector z = known->x_star - r.x;
    const double nz = z.norm();
    const double tol = (r.inner_exact ? r.tol_inner : std::max(r.tol_inner, r.inner_gap)) + 1e-9;
    if (r.stalled) audit.expect_le("stall_gap", r.k, gap, r.certificate + 1e-9);

    if (nz > 0.0 && r.eta <= nz) {
      const double gap_bar = gap - 2.0 * r.cert_eps * L;
      if (gap_bar > 0.0) {
        audit.expect_le("descent_far", r.k, r.gtd, -(r.eta / nz) * gap_bar + tol);
        if (!r.stalled) {
          const double eta_bar = std::min(r.eps, 2.0 * (1.0 - rho) * gap_bar / (beta * R));
          audit.expect_le("step_far", r.k, std::min(tau * eta_bar, r.eta) - 1e-9, r.lambda * r.eta);
        }
      }
    }
    if (smooth && r.eta >= nz && gap > 0.0) {
      audit.expect_le("descent_near", r.k, r.gtd, -gap + tol);
      if (!r.stalled) {
        const double reduced = std::max(0.0, gap - tol);
        const double bound = std::min(2.0 * tau * (1.0 - rho) * reduced / (beta * r.eta * r.eta), 1.0);
        audit.expect_le("step_near", r.k, bound - 1e-9, r.lambda);
      }
    }
  }
  return report;
}

BoundsReport verify_subgradient_bounds(const FunctionOracle& f, const ConstraintSet& C, double eps,
                                       std::int64_t samples, std::uint64_t seed, double tol,
                                       const SubdiffOracle& oracle) {
  if (!(eps >= 0.0)) throw ContractViolation("verify_subgradient_bounds: eps must be >= 0");
  if (samples < 0) throw ContractViolation("verify_subgradient_bounds: samples must be >= 0");
  const FunctionConstants k = constants(f, C);
  const double beta = f.kind() == FunctionKind::max_affine ? 0.0 : k.weak_smooth;
  std::mt19937_64 rng(seed);

  BoundsReport report;
  report.max_lower_excess = -kInf;
  report.max_upper_excess = -kInf;
  auto model_gain = [](const GeneratorSet& G, const Vector& step) {
    double best = -kInf;
    for (const Vector& g : G.generators) best = std::max(best, g.dot(step));
    return best;
  };

  for (std::int64_t s = 0; s < samples; ++s) {
    const Vector x = sample(C, rng);
    const Vector y = sample(C, rng);
    const GeneratorSet G = oracle(f, x, eps);
    const double fx = eval(f, x);

    const double lower_excess = fx + model_gain(G, y - x) - 2.0 * G.epsilon * k.lipschitz - eval(f, y);
    ++report.lower_pairs;
    report.max_lower_excess = std::max(report.max_lower_excess, lower_excess);
    if (lower_excess > tol) report.violations.push_back({"lower", x, y, lower_excess});

    if (eps > 0.0) {
      const Vector near = sample(ConstraintSet::ball(x, eps), rng);
      const Vector step = near - x;
      const double upper_excess = eval(f, near) - fx - model_gain(G, step) - 0.5 * beta * step.squaredNorm();
      ++report.upper_pairs;
      report.max_upper_excess = std::max(report.max_upper_excess, upper_excess);
      if (upper_excess > tol) report.violations.push_back({"upper", x, near, upper_excess});
    }
  }
  return report;
}

}  // namespace ncsd
