#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ncsd/constraints.hpp"
#include "ncsd/types.hpp"

namespace ncsd {

enum class FunctionKind { max_affine, quadratic, quadratic_l1 };

const char* to_string(FunctionKind kind);

struct FunctionConstants {
  double lipschitz = 0.0;
  double weak_smooth = 0.0;
  double strong_convex = 0.0;
};

/// f(x) = max_i (a_i' x + b_i); row i of `slopes` is a_i.
struct MaxAffineParams {
  Matrix slopes;
  Vector offsets;
};

/// f(x) = 0.5 x'Qx + q'x + r with Q symmetric positive semidefinite.
struct QuadraticParams {
  Matrix Q;
  Vector q;
  double r = 0.0;
  /// Spectral bounds of Q: curvature_lower <= lambda_min, lambda_max <= curvature_upper.
  double curvature_lower = 0.0;
  double curvature_upper = 0.0;
};

/// f(x) = quadratic(x) + weight * ||x||_1.
struct QuadraticL1Params {
  QuadraticParams smooth;
  double weight = 0.0;
};

/// A convex objective together with an exact relaxed-subdifferential oracle.
/// Immutable and cheap to copy.
class FunctionOracle {
 public:
  static FunctionOracle max_affine(Matrix slopes, Vector offsets);
  /// `alpha` overrides the computed smallest-eigenvalue lower bound.
  static FunctionOracle quadratic(Matrix Q, Vector q, double r, std::optional<double> alpha = std::nullopt);
  static FunctionOracle quadratic_l1(Matrix Q, Vector q, double r, double weight,
                                     std::optional<double> alpha = std::nullopt);

  /// Copy with declared constants that take precedence over computed ones.
  FunctionOracle with_constants(FunctionConstants declared) const;

  FunctionKind kind() const { return static_cast<FunctionKind>(data_->params.index()); }
  Index dimension() const { return data_->dimension; }
  const std::optional<FunctionConstants>& declared_constants() const { return data_->declared; }

  const MaxAffineParams& as_max_affine() const { return std::get<MaxAffineParams>(data_->params); }
  const QuadraticParams& as_quadratic() const { return std::get<QuadraticParams>(data_->params); }
  const QuadraticL1Params& as_quadratic_l1() const { return std::get<QuadraticL1Params>(data_->params); }

 private:
  struct Data {
    Index dimension;
    std::variant<MaxAffineParams, QuadraticParams, QuadraticL1Params> params;
    std::optional<FunctionConstants> declared;
  };
  explicit FunctionOracle(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// Finite generator list whose convex hull stands in for the relaxed
/// subdifferential. `epsilon` is the radius the list is certified for: the
/// lower bound f(y) >= f(x) + max_g g'(y-x) - 2 * epsilon * L holds with it.
struct GeneratorSet {
  std::vector<Vector> generators;
  double epsilon = 0.0;
};

double eval(const FunctionOracle& f, const Vector& x);

/// Generators for the eps-relaxed subdifferential at x. The first generator
/// is always a subgradient at x itself.
GeneratorSet relaxed_subdiff(const FunctionOracle& f, const Vector& x, double eps);

/// Upper bound on GeneratorSet::epsilon for a request of `eps`.
double certified_epsilon_bound(const FunctionOracle& f, double eps);

/// True when f has no points of nondifferentiability.
bool is_smooth(const FunctionOracle& f);

/// Declared constants if present, otherwise constants valid over `domain`.
FunctionConstants constants(const FunctionOracle& f, const ConstraintSet& domain);

/// Domain-free variant; only max_affine (or declared constants) qualify.
FunctionConstants constants(const FunctionOracle& f);

/// beta floor used wherever beta appears in a denominator.
inline double effective_beta(double beta) { return beta > 1e-9 ? beta : 1e-9; }

}  // namespace ncsd
