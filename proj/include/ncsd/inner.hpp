#pragma once

#include <vector>

#include "ncsd/constraints.hpp"
#include "ncsd/errors.hpp"
#include "ncsd/model.hpp"

namespace ncsd {

/// Solution of min_{d in C_k} max_{g in G} g'd together with its dual
/// certificate. `g` is the generator attaining the max at `d` (lowest index on
/// ties), so g'd == primal_value exactly.
struct InnerSolution {
  Vector d;
  Vector g;
  Index g_index = 0;
  /// Dual weights over the generators (nonnegative, summing to one).
  Vector weights;
  double primal_value = 0.0;
  /// min_{d in C_k} (sum_i weights_i g_i)'d
  double dual_value = 0.0;
  double gap = 0.0;
};

struct MinNormPoint {
  Vector point;
  /// Convex weights over the input generators.
  Vector weights;
  /// max_i <point, point - g_i>; optimal when <= tol.
  double residual = 0.0;
  int iterations = 0;
};

class MinNormFailure : public NumericFailure {
 public:
  MinNormFailure(const std::string& what, MinNormPoint best)
      : NumericFailure(what, best.residual), best_(std::move(best)) {}
  const MinNormPoint& best() const noexcept { return best_; }

 private:
  MinNormPoint best_;
};

class InnerSolveFailure : public NumericFailure {
 public:
  InnerSolveFailure(const std::string& what, InnerSolution best)
      : NumericFailure(what, best.gap), best_(std::move(best)) {}
  const InnerSolution& best() const noexcept { return best_; }

 private:
  InnerSolution best_;
};

/// Point of conv(G) closest to the origin (Wolfe's active-set method).
MinNormPoint min_norm_point(const std::vector<Vector>& generators, double tol);
inline MinNormPoint min_norm_point(const GeneratorSet& G, double tol) { return min_norm_point(G.generators, tol); }

/// 1e-8 * max(1, L * eta)
double default_tol_inner(double lipschitz, double eta);

/// Solves the direction-finding minimax problem over C_k. When the eta-ball
/// fits inside the base set the answer is -eta * g_hat / ||g_hat|| with g_hat
/// the min-norm hull point; otherwise a log-barrier method is used and the
/// result certified by evaluating the dual bound with step_linmin.
/// Throws InnerSolveFailure (carrying the best solution) if the gap stays
/// above `tol_inner`.
InnerSolution solve_inner(const GeneratorSet& G, const StepSet& step_set, double tol_inner);

/// Grid search over C_k at `resolution` (dimension <= 3). Test oracle only:
/// weights are empty and dual_value == primal_value.
InnerSolution brute_force_inner(const GeneratorSet& G, const StepSet& step_set, double resolution);

}  // namespace ncsd
