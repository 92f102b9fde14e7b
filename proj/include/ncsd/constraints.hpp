#pragma once

#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "ncsd/errors.hpp"
#include "ncsd/types.hpp"

namespace ncsd {

enum class ConstraintKind { box, ball, simplex, polytope };

const char* to_string(ConstraintKind kind);

struct BoxSet {
  Vector lo;
  Vector hi;
};

struct BallSet {
  Vector center;
  double radius;
};

/// { x >= 0, sum(x) = scale }
struct SimplexSet {
  Index dimension;
  double scale;
};

/// { x : H x <= h }, with a certified bounding box and, when the number of
/// candidate bases is small enough to enumerate, its vertex list.
struct PolytopeSet {
  Matrix H;
  Vector h;
  Vector bbox_lo;
  Vector bbox_hi;
  std::vector<Vector> vertices;
  /// Chebyshev center and inradius (strictly positive).
  Vector center;
  double inradius;
};

/// Center and radius of a ball containing the whole set.
struct EnclosingBall {
  Vector center;
  double radius;
};

/// A nonempty, closed, bounded convex set. Cheap to copy; the parameters are
/// shared and immutable.
class ConstraintSet {
 public:
  static ConstraintSet box(Vector lo, Vector hi);
  static ConstraintSet ball(Vector center, double radius);
  static ConstraintSet simplex(Index dimension, double scale);
  /// When `bbox` is omitted it is derived from the enumerated vertices.
  static ConstraintSet polytope(Matrix H, Vector h,
                                std::optional<std::pair<Vector, Vector>> bbox = std::nullopt);

  ConstraintKind kind() const;
  Index dimension() const;

  const BoxSet& as_box() const { return std::get<BoxSet>(*data_); }
  const BallSet& as_ball() const { return std::get<BallSet>(*data_); }
  const SimplexSet& as_simplex() const { return std::get<SimplexSet>(*data_); }
  const PolytopeSet& as_polytope() const { return std::get<PolytopeSet>(*data_); }

  /// A point in the relative interior.
  Vector interior_point() const;
  EnclosingBall enclosing_ball() const;
  std::pair<Vector, Vector> bounding_box() const;

 private:
  using Data = std::variant<BoxSet, BallSet, SimplexSet, PolytopeSet>;
  explicit ConstraintSet(Data data) : data_(std::make_shared<const Data>(std::move(data))) {}

  std::shared_ptr<const Data> data_;
};

/// Thrown when the projection onto a polytope hits its iteration limit.
class ProjectionFailure : public NumericFailure {
 public:
  ProjectionFailure(const std::string& what, double residual, Vector best)
      : NumericFailure(what, residual), best_(std::move(best)) {}
  const Vector& best() const noexcept { return best_; }

 private:
  Vector best_;
};

bool contains(const ConstraintSet& set, const Vector& x, double tol);

/// Euclidean projection.
Vector project(const ConstraintSet& set, const Vector& x);

/// A minimizer of g'y over the set. Ties go to the lowest coordinate index.
Vector linmin(const ConstraintSet& set, const Vector& g);

double diameter(const ConstraintSet& set);

/// Draws a point of the set. Polytopes use rejection from the bounding box.
Vector sample(const ConstraintSet& set, std::mt19937_64& rng);

/// C_k = { d : anchor + d in base, ||d|| <= eta }. Never materialized; use
/// the free functions below.
struct StepSet {
  ConstraintSet base;
  Vector anchor;
  double eta;
};

bool contains(const StepSet& step_set, const Vector& d, double tol);

/// True when the closed eta-ball around the anchor lies inside the base set,
/// i.e. C_k is exactly the ball.
bool ball_inside(const StepSet& step_set);

/// A minimizer of g'd over C_k (objective accurate to ~1e-12 relative).
Vector step_linmin(const StepSet& step_set, const Vector& g);

}  // namespace ncsd
