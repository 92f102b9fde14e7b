#include "ncsd/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ncsd/errors.hpp"

namespace ncsd {
namespace {

void check_start(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0, std::int64_t steps) {
  if (x0.size() != C.dimension() || x0.size() != f.dimension()) throw ContractViolation("baseline: dimension mismatch");
  if (!contains(C, x0, 1e-9)) throw ContractViolation("baseline: x0 must lie in C");
  if (steps < 0) throw ContractViolation("baseline: steps must be >= 0");
}

void push(BaselineTrace& trace, std::int64_t k, Vector x, double fx) {
  const double best = trace.records.empty() ? fx : std::min(trace.records.back().best_fx, fx);
  trace.records.push_back({k, std::move(x), fx, best});
}

}  // namespace

StepRule diminishing_steps(double c0) {
  if (!(c0 > 0.0)) throw ContractViolation("diminishing_steps: c0 must be > 0");
  return [c0](std::int64_t k) { return c0 / std::sqrt(static_cast<double>(k + 1)); };
}

StepRule open_loop_weights() {
  return [](std::int64_t k) { return 2.0 / static_cast<double>(k + 2); };
}

BaselineTrace projected_subgradient(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0,
                                    std::int64_t steps, const StepRule& step_rule) {
  check_start(f, C, x0, steps);
  BaselineTrace trace;
  Vector x = x0;
  push(trace, 0, x, eval(f, x));
  for (std::int64_t k = 0; k < steps; ++k) {
    const Vector g = relaxed_subdiff(f, x, 0.0).generators.front();
    x = project(C, x - step_rule(k) * g);
    push(trace, k + 1, x, eval(f, x));
  }
  return trace;
}

BaselineTrace frank_wolfe(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0, std::int64_t steps,
                          const StepRule& gamma_rule) {
  check_start(f, C, x0, steps);
  BaselineTrace trace;
  Vector x = x0;
  push(trace, 0, x, eval(f, x));
  for (std::int64_t k = 0; k < steps; ++k) {
    const Vector g = relaxed_subdiff(f, x, 0.0).generators.front();
    const Vector y = linmin(C, g);
    x += gamma_rule(k) * (y - x);
    push(trace, k + 1, x, eval(f, x));
  }
  return trace;
}

}  // namespace ncsd
