#include "ncsd/ncsd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace ncsd {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_config(const NcsdConfig& cfg) {
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ContractViolation("ncsd: rho must lie in (0, 1)");
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw ContractViolation("ncsd: tau must lie in (0, 1)");
  if (cfg.tol_inner && !(*cfg.tol_inner > 0.0)) throw ContractViolation("ncsd: tol_inner must be > 0");
  if (cfg.max_outer < 0) throw ContractViolation("ncsd: max_outer must be >= 0");
  if (cfg.max_line_search < 1) throw ContractViolation("ncsd: max_line_search must be >= 1");
}

TraceRecord final_record(const IterateState& state) {
  TraceRecord r;
  r.k = state.k;
  r.fx = state.fx;
  r.eta = kNaN;
  r.eps = kNaN;
  r.gtd = kNaN;
  r.lambda = kNaN;
  r.inner_gap = kNaN;
  r.certificate = kNaN;
  r.cert_eps = kNaN;
  r.tol_inner = kNaN;
  r.x = state.x;
  return r;
}

}  // namespace

double stall_certificate(double eps, double L) { return 2.0 * eps * L; }

StepResult step(const FunctionOracle& f, const ConstraintSet& C, const IterateState& state, double eta,
                double eps, const NcsdConfig& cfg) {
  check_config(cfg);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractViolation("step: eta must be finite and > 0");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ContractViolation("step: eps must be finite and >= 0");

  const double L = constants(f, C).lipschitz;
  const GeneratorSet G = relaxed_subdiff(f, state.x, eps);
  const StepSet S{C, state.x, eta};
  const double tol_inner = cfg.tol_inner.value_or(default_tol_inner(L, eta));

  InnerSolution sol;
  bool exact = true;
  try {
    sol = solve_inner(G, S, tol_inner);
  } catch (const InnerSolveFailure& e) {
    sol = e.best();
    exact = false;
  }

  TraceRecord r;
  r.k = state.k;
  r.fx = state.fx;
  r.eta = eta;
  r.eps = eps;
  r.gtd = sol.primal_value;
  r.inner_gap = sol.gap;
  r.has_step = true;
  r.x = state.x;
  r.d = sol.d;
  r.cert_eps = G.epsilon;
  r.certificate = kNaN;
  r.tol_inner = tol_inner;
  r.inner_exact = exact;

  const double tol_sign = 1e-10 * std::max(1.0, L * eta);
  const bool descent = sol.primal_value < -tol_sign && (exact || sol.primal_value < -2.0 * sol.gap);

  IterateState next = state;
  next.k = state.k + 1;
  if (!descent) {
    r.stalled = true;
    r.lambda = 0.0;
    r.certificate = stall_certificate(G.epsilon, L);
    next.stalled = true;
    return {std::move(next), std::move(r)};
  }

  double lambda = 1.0;
  int trials = 0;
  Vector trial = state.x + sol.d;
  double f_trial = eval(f, trial);
  while (f_trial > state.fx + cfg.rho * lambda * sol.primal_value) {
    if (trials == cfg.max_line_search) {
      if (cfg.rho * lambda * -sol.primal_value <= rounding_floor(state.fx)) {
        r.stalled = true;
        r.lambda = 0.0;
        r.ls_iters = trials;
        r.certificate = stall_certificate(G.epsilon, L);
        next.stalled = true;
        return {std::move(next), std::move(r)};
      }
      throw LineSearchFailure("line search: no sufficient decrease after " + std::to_string(trials) +
                                  " reductions (are the declared constants right?)",
                              f_trial - state.fx);
    }
    lambda *= cfg.tau;
    ++trials;
    trial = state.x + lambda * sol.d;
    f_trial = eval(f, trial);
  }
  // Clamping removes rounding drift without changing f noticeably.
  if (C.kind() == ConstraintKind::box && !contains(C, trial, 0.0)) {
    const Vector clamped = project(C, trial);
    const double f_clamped = eval(f, clamped);
    if (f_clamped <= f_trial) {
      trial = clamped;
      f_trial = f_clamped;
    }
  }

  r.lambda = lambda;
  r.ls_iters = trials;
  next.x = std::move(trial);
  next.fx = f_trial;
  next.stalled = false;
  return {std::move(next), std::move(r)};
}

IterateTrace run(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0, const NcsdConfig& cfg) {
  check_config(cfg);
  if (x0.size() != C.dimension() || x0.size() != f.dimension()) throw ContractViolation("run: dimension mismatch");
  if (!x0.allFinite() || !contains(C, x0, 1e-9)) throw ContractViolation("run: x0 must lie in C");

  IterateTrace trace;
  trace.lipschitz = constants(f, C).lipschitz;
  trace.rho = cfg.rho;
  trace.tau = cfg.tau;
  trace.schedule = cfg.schedule;

  IterateState state{0, x0, eval(f, x0), false};
  const auto stop = cfg.schedule.stop_index();
  while (true) {
    if (state.k >= cfg.max_outer || (stop && state.k >= *stop)) break;
    const StepSizes sizes = cfg.schedule.at(state.k);
    const auto started = std::chrono::steady_clock::now();
    StepResult result;
    try {
      result = step(f, C, state, sizes.eta, sizes.eps, cfg);
    } catch (const NumericFailure& e) {
      trace.records.push_back(final_record(state));
      throw RunFailure(std::string("iteration ") + std::to_string(state.k) + ": " + e.what(), e.residual(),
                       std::move(trace));
    }
    result.record.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started).count();
    trace.records.push_back(std::move(result.record));
    state = std::move(result.next);
    if (state.stalled && cfg.schedule.kind == ScheduleKind::fixed) break;
  }
  trace.records.push_back(final_record(state));
  return trace;
}

}  // namespace ncsd
