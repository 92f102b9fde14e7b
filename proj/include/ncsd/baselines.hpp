#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ncsd/constraints.hpp"
#include "ncsd/model.hpp"

namespace ncsd {

struct BaselineRecord {
  std::int64_t k = 0;
  Vector x;
  double fx = 0.0;
  /// min_{j <= k} f(x_j)
  double best_fx = 0.0;
};

/// Records for x_0 .. x_steps.
struct BaselineTrace {
  std::vector<BaselineRecord> records;
};

/// k -> step length (projected subgradient) or mixing weight (Frank-Wolfe).
using StepRule = std::function<double(std::int64_t)>;

/// t_k = c0 / sqrt(k + 1)
StepRule diminishing_steps(double c0);
/// gamma_k = 2 / (k + 2)
StepRule open_loop_weights();

/// x_{k+1} = project(C, x_k - t_k g_k) with g_k the first generator of the
/// exact subdifferential.
BaselineTrace projected_subgradient(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0,
                                    std::int64_t steps, const StepRule& step_rule);

/// x_{k+1} = x_k + gamma_k (linmin(C, g_k) - x_k). On nonsmooth f the
/// generator is an arbitrary subgradient, so the method may stall away from
/// the optimum.
BaselineTrace frank_wolfe(const FunctionOracle& f, const ConstraintSet& C, const Vector& x0, std::int64_t steps,
                          const StepRule& gamma_rule = open_loop_weights());

}  // namespace ncsd
