#pragma once

#include <vector>

#include "ncsd/types.hpp"

namespace ncsd::detail {

/// Convex program with a linear objective:
///
///   minimize    cost' z
///   subject to  A z <= b
///               E z == e
///               || z.head(n) - center_j || <= radius_j   for every ball j
///
/// where n is the dimension of each ball center (a prefix of z).
struct BarrierProblem {
  struct BallConstraint {
    Vector center;
    double radius;
  };

  Vector cost;
  Matrix A;
  Vector b;
  Matrix E;
  Vector e;
  std::vector<BallConstraint> balls;
};

struct BarrierResult {
  Vector z;
  /// Central-path multipliers for the rows of A, in row order.
  Vector linear_duals;
  /// Upper bound on cost' z - optimum (m / t at the last centering).
  double gap_bound = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

/// Log-barrier path following from a strictly feasible `z0`. Stops once the
/// central-path gap bound drops below `target_gap`. `t0` is the initial weight
/// on the objective; a good choice is 1 / (typical objective range).
BarrierResult solve_barrier(const BarrierProblem& problem, const Vector& z0,
                            double target_gap, double t0);

}  // namespace ncsd::detail
