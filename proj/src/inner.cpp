#include "ncsd/inner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "ncsd/barrier.hpp"

namespace ncsd {
namespace {

constexpr int kMinNormMaxIterations = 10000;

void check_generators(const std::vector<Vector>& G, Index n, const char* op) {
  if (G.empty()) throw ContractViolation(std::string(op) + ": generator set is empty");
  for (const Vector& g : G) {
    if (g.size() != n) throw ContractViolation(std::string(op) + ": generator dimension mismatch");
    if (!g.allFinite()) throw ContractViolation(std::string(op) + ": generator has non-finite entries");
  }
}

// Weights minimizing ||sum_i w_i g_i|| subject to sum_i w_i = 1 over `active`.
Vector affine_minimizer(const std::vector<Vector>& G, const std::vector<Index>& active) {
  const std::size_t k = active.size();
  Vector w(static_cast<Index>(k));
  if (k == 1) {
    w[0] = 1.0;
    return w;
  }
  const Vector& ref = G[static_cast<std::size_t>(active[0])];
  Matrix diffs(ref.size(), static_cast<Index>(k - 1));
  for (std::size_t j = 1; j < k; ++j) diffs.col(static_cast<Index>(j - 1)) = G[static_cast<std::size_t>(active[j])] - ref;
  const Vector t = diffs.completeOrthogonalDecomposition().solve(-ref);
  w[0] = 1.0 - t.sum();
  w.tail(static_cast<Index>(k - 1)) = t;
  return w;
}

Vector combine(const std::vector<Vector>& G, const std::vector<Index>& active, const Vector& w) {
  Vector x = Vector::Zero(G.front().size());
  for (std::size_t j = 0; j < active.size(); ++j) x += w[static_cast<Index>(j)] * G[static_cast<std::size_t>(active[j])];
  return x;
}

Vector hull_point(const std::vector<Vector>& G, const Vector& weights) {
  Vector v = Vector::Zero(G.front().size());
  for (std::size_t i = 0; i < G.size(); ++i) v += weights[static_cast<Index>(i)] * G[i];
  return v;
}

// Fill g, g_index and primal_value for direction d.
void attach_worst_generator(const std::vector<Vector>& G, InnerSolution& sol) {
  sol.g_index = 0;
  sol.primal_value = G[0].dot(sol.d);
  for (std::size_t i = 1; i < G.size(); ++i) {
    const double value = G[i].dot(sol.d);
    if (value > sol.primal_value) {
      sol.primal_value = value;
      sol.g_index = static_cast<Index>(i);
    }
  }
  sol.g = G[static_cast<std::size_t>(sol.g_index)];
}

InnerSolution solve_ball_only(const std::vector<Vector>& G, const StepSet& S, double tol_inner) {
  double scale = 0.0;
  for (const Vector& g : G) scale = std::max(scale, g.squaredNorm());
  const MinNormPoint mnp = min_norm_point(G, 1e-15 * std::max(scale, 1e-300));

  InnerSolution sol;
  const double norm = mnp.point.norm();
  if (norm * S.eta <= tol_inner) {
    sol.d = Vector::Zero(S.anchor.size());
  } else {
    sol.d = (-S.eta / norm) * mnp.point;
  }
  sol.weights = mnp.weights;
  attach_worst_generator(G, sol);
  sol.dual_value = -S.eta * norm;
  sol.gap = sol.primal_value - sol.dual_value;
  return sol;
}

// Generator weights from the KKT system at d: the active generators' hull
// point must be cancelled by normals of the constraints active at anchor + d.
// Returns nothing when the system has no nonnegative solution.
std::optional<Vector> polish_weights(const std::vector<Vector>& G, const StepSet& S, const Vector& d,
                                     double primal_value) {
  const Index n = d.size();
  const Vector y = S.anchor + d;
  const ConstraintSet& C = S.base;
  double gnorm = 0.0;
  for (const Vector& g : G) gnorm = std::max(gnorm, g.norm());
  const double value_tol = 1e-9 * std::max(1.0, gnorm * S.eta);
  const double place_tol = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());

  std::vector<Index> active;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (primal_value - G[i].dot(d) <= value_tol) active.push_back(static_cast<Index>(i));
  }
  std::vector<Vector> normals;  // multipliers >= 0
  std::vector<Vector> free;     // multipliers of either sign
  auto unit = [n](Index i, double sign) {
    Vector r = Vector::Zero(n);
    r[i] = sign;
    return r;
  };
  switch (C.kind()) {
    case ConstraintKind::box: {
      const auto& b = C.as_box();
      for (Index i = 0; i < n; ++i) {
        if (b.hi[i] - b.lo[i] <= 0.0) {
          free.push_back(unit(i, 1.0));
        } else if (b.hi[i] - y[i] <= place_tol) {
          normals.push_back(unit(i, 1.0));
        } else if (y[i] - b.lo[i] <= place_tol) {
          normals.push_back(unit(i, -1.0));
        }
      }
      break;
    }
    case ConstraintKind::ball: {
      const auto& b = C.as_ball();
      if (b.radius - (y - b.center).norm() <= place_tol) normals.push_back(y - b.center);
      break;
    }
    case ConstraintKind::simplex: {
      for (Index i = 0; i < n; ++i) {
        if (y[i] <= place_tol) normals.push_back(unit(i, -1.0));
      }
      free.push_back(Vector::Ones(n));
      break;
    }
    case ConstraintKind::polytope: {
      const auto& poly = C.as_polytope();
      const Vector slack = poly.h - poly.H * y;
      for (Index j = 0; j < poly.H.rows(); ++j) {
        if (slack[j] <= place_tol * poly.H.row(j).norm()) normals.push_back(poly.H.row(j).transpose());
      }
      break;
    }
  }
  if (d.norm() >= S.eta * (1.0 - 1e-9)) normals.push_back(d);

  const Index k = static_cast<Index>(active.size());
  const Index cols = k + static_cast<Index>(normals.size() + free.size());
  Matrix A = Matrix::Zero(n + 1, cols);
  Vector rhs = Vector::Zero(n + 1);
  for (Index j = 0; j < k; ++j) {
    A.col(j).head(n) = G[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])];
    A(n, j) = 1.0;
  }
  Index col = k;
  for (const Vector& a : normals) A.col(col++).head(n) = a;
  for (const Vector& a : free) A.col(col++).head(n) = a;
  rhs[n] = 1.0;

  const Vector u = A.completeOrthogonalDecomposition().solve(rhs);
  if (!u.allFinite() || (A * u - rhs).norm() > 1e-9) return std::nullopt;
  const Index signed_end = k + static_cast<Index>(normals.size());
  if (u.head(signed_end).minCoeff() < -1e-9) return std::nullopt;

  Vector weights = Vector::Zero(static_cast<Index>(G.size()));
  for (Index j = 0; j < k; ++j) weights[active[static_cast<std::size_t>(j)]] = std::max(0.0, u[j]);
  const double total = weights.sum();
  if (!(total > 0.0)) return std::nullopt;
  return Vector(weights / total);
}

// Epigraph form over z = (d, t): minimize t subject to g_i'd <= t, the base
// set's constraints on anchor + d, and ||d|| <= eta (dropped when the ball
// already encloses C - anchor).
InnerSolution solve_barrier_path(const std::vector<Vector>& G, const StepSet& S, double target_gap) {
  const Index n = S.anchor.size();
  const Index m = static_cast<Index>(G.size());
  const Vector& x = S.anchor;
  const ConstraintSet& C = S.base;

  const Vector interior = C.interior_point();
  const double to_interior = (interior - x).norm();
  const double theta = to_interior > 0.0 ? std::min(0.5, 0.5 * S.eta / to_interior) : 0.0;
  const Vector d0 = theta * (interior - x);

  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<Vector> eq_rows;
  std::vector<double> eq_rhs;
  auto unit = [n](Index i, double sign) {
    Vector r = Vector::Zero(n);
    r[i] = sign;
    return r;
  };

  detail::BarrierProblem p;
  switch (C.kind()) {
    case ConstraintKind::box: {
      const auto& b = C.as_box();
      for (Index i = 0; i < n; ++i) {
        if (b.hi[i] - b.lo[i] <= 0.0) {
          eq_rows.push_back(unit(i, 1.0));
          eq_rhs.push_back(d0[i]);
          continue;
        }
        rows.push_back(unit(i, 1.0));
        rhs.push_back(b.hi[i] - x[i]);
        rows.push_back(unit(i, -1.0));
        rhs.push_back(x[i] - b.lo[i]);
      }
      break;
    }
    case ConstraintKind::ball: {
      const auto& b = C.as_ball();
      p.balls.push_back({b.center - x, b.radius});
      break;
    }
    case ConstraintKind::simplex: {
      for (Index i = 0; i < n; ++i) {
        rows.push_back(unit(i, -1.0));
        rhs.push_back(x[i]);
      }
      eq_rows.push_back(Vector::Ones(n));
      eq_rhs.push_back(d0.sum());
      break;
    }
    case ConstraintKind::polytope: {
      const auto& poly = C.as_polytope();
      const Vector slack = poly.h - poly.H * x;
      for (Index j = 0; j < poly.H.rows(); ++j) {
        rows.push_back(poly.H.row(j).transpose());
        rhs.push_back(slack[j]);
      }
      break;
    }
  }
  const EnclosingBall enclosing = C.enclosing_ball();
  const double reach = (x - enclosing.center).norm() + enclosing.radius;
  if (S.eta < reach) p.balls.push_back({Vector::Zero(n), S.eta});

  double gnorm = 0.0;
  for (const Vector& g : G) gnorm = std::max(gnorm, g.norm());
  const double scale = std::max(1e-300, gnorm * std::min(S.eta, reach));

  const Index rows_total = m + static_cast<Index>(rows.size());
  p.cost = Vector::Zero(n + 1);
  p.cost[n] = 1.0;
  p.A = Matrix::Zero(rows_total, n + 1);
  p.b = Vector::Zero(rows_total);
  for (Index i = 0; i < m; ++i) {
    p.A.row(i).head(n) = G[static_cast<std::size_t>(i)].transpose();
    p.A(i, n) = -1.0;
  }
  for (std::size_t j = 0; j < rows.size(); ++j) {
    p.A.row(m + static_cast<Index>(j)).head(n) = rows[j].transpose();
    p.b[m + static_cast<Index>(j)] = rhs[j];
  }
  p.E = Matrix::Zero(static_cast<Index>(eq_rows.size()), n + 1);
  p.e = Vector::Zero(static_cast<Index>(eq_rows.size()));
  for (std::size_t j = 0; j < eq_rows.size(); ++j) {
    p.E.row(static_cast<Index>(j)).head(n) = eq_rows[j].transpose();
    p.e[static_cast<Index>(j)] = eq_rhs[j];
  }

  Vector z0(n + 1);
  z0.head(n) = d0;
  double t0 = -std::numeric_limits<double>::infinity();
  for (const Vector& g : G) t0 = std::max(t0, g.dot(d0));
  z0[n] = t0 + std::max(scale, 1e-12);

  const auto result = detail::solve_barrier(p, z0, target_gap, 1.0 / std::max(scale, 1e-12));

  InnerSolution sol;
  sol.d = result.z.head(n);
  Vector weights = result.linear_duals.head(m).cwiseMax(0.0);
  const double total = weights.sum();
  sol.weights = total > 0.0 ? Vector(weights / total) : Vector::Constant(m, 1.0 / static_cast<double>(m));
  attach_worst_generator(G, sol);

  // The dual minimizer is also a feasible primal candidate.
  Vector v = hull_point(G, sol.weights);
  Vector d_dual = step_linmin(S, v);
  sol.dual_value = v.dot(d_dual);
  // Central-path multipliers are only as accurate as the last centering;
  // weights solved from the KKT system at d can certify a tighter bound.
  if (const auto polished = polish_weights(G, S, sol.d, sol.primal_value)) {
    const Vector pv = hull_point(G, *polished);
    const Vector pd = step_linmin(S, pv);
    if (pv.dot(pd) > sol.dual_value) {
      sol.weights = *polished;
      sol.dual_value = pv.dot(pd);
      v = pv;
      d_dual = pd;
    }
  }
  InnerSolution alt = sol;
  alt.d = d_dual;
  attach_worst_generator(G, alt);
  if (alt.primal_value < sol.primal_value || !contains(S, sol.d, 1e-9)) sol = std::move(alt);
  sol.gap = sol.primal_value - sol.dual_value;
  return sol;
}

}  // namespace

MinNormPoint min_norm_point(const std::vector<Vector>& G, double tol) {
  if (G.empty()) throw ContractViolation("min_norm_point: generator set is empty");
  check_generators(G, G.front().size(), "min_norm_point");
  const Index count = static_cast<Index>(G.size());

  auto residual_at = [&](const Vector& x, Index* worst) {
    double lowest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < count; ++i) {
      const double value = G[static_cast<std::size_t>(i)].dot(x);
      if (value < lowest) {
        lowest = value;
        *worst = i;
      }
    }
    return x.squaredNorm() - lowest;
  };

  Index start = 0;
  for (Index i = 1; i < count; ++i) {
    if (G[static_cast<std::size_t>(i)].squaredNorm() < G[static_cast<std::size_t>(start)].squaredNorm()) start = i;
  }
  std::vector<Index> active{start};
  Vector lambda = Vector::Ones(1);
  Vector x = G[static_cast<std::size_t>(start)];

  auto result = [&](double residual, int iterations) {
    MinNormPoint out;
    out.point = x;
    out.weights = Vector::Zero(count);
    for (std::size_t j = 0; j < active.size(); ++j) out.weights[active[j]] += lambda[static_cast<Index>(j)];
    out.residual = residual;
    out.iterations = iterations;
    return out;
  };

  int iterations = 0;
  while (iterations < kMinNormMaxIterations) {
    Index entering = 0;
    const double residual = residual_at(x, &entering);
    if (residual <= tol) return result(residual, iterations);
    if (std::find(active.begin(), active.end(), entering) != active.end()) {
      // Rounding stalled the method on a corral that already contains the
      // most violated generator; the point is as good as it gets.
      return result(residual, iterations);
    }
    active.push_back(entering);
    lambda.conservativeResize(lambda.size() + 1);
    lambda[lambda.size() - 1] = 0.0;

    while (iterations < kMinNormMaxIterations) {
      ++iterations;
      const Vector mu = affine_minimizer(G, active);
      if ((mu.array() > 1e-14).all()) {
        lambda = mu;
        break;
      }
      double theta = 1.0;
      for (Index j = 0; j < mu.size(); ++j) {
        if (mu[j] <= 1e-14) theta = std::min(theta, lambda[j] / (lambda[j] - mu[j]));
      }
      lambda += theta * (mu - lambda);
      std::vector<Index> kept;
      std::vector<double> kept_weights;
      Index drop = 0;
      lambda.minCoeff(&drop);
      for (Index j = 0; j < lambda.size(); ++j) {
        if (j != drop && lambda[j] > 1e-14) {
          kept.push_back(active[static_cast<std::size_t>(j)]);
          kept_weights.push_back(lambda[j]);
        }
      }
      active = std::move(kept);
      lambda = Eigen::Map<Vector>(kept_weights.data(), static_cast<Index>(kept_weights.size()));
      lambda /= lambda.sum();
    }
    x = combine(G, active, lambda);
  }
  Index worst = 0;
  const double residual = residual_at(x, &worst);
  throw MinNormFailure("min_norm_point: iteration cap exceeded", result(residual, iterations));
}

double default_tol_inner(double lipschitz, double eta) { return 1e-8 * std::max(1.0, lipschitz * eta); }

InnerSolution solve_inner(const GeneratorSet& G, const StepSet& S, double tol_inner) {
  const Index n = S.anchor.size();
  if (S.base.dimension() != n) throw ContractViolation("solve_inner: anchor dimension mismatch");
  check_generators(G.generators, n, "solve_inner");
  if (!(S.eta > 0.0) || !std::isfinite(S.eta)) throw ContractViolation("solve_inner: eta must be finite and > 0");
  if (!(tol_inner > 0.0)) throw ContractViolation("solve_inner: tol_inner must be > 0");

  if (ball_inside(S)) return solve_ball_only(G.generators, S, tol_inner);

  InnerSolution sol = solve_barrier_path(G.generators, S, 0.05 * tol_inner);
  if (sol.gap > tol_inner) {
    InnerSolution retry = solve_barrier_path(G.generators, S, 1e-4 * tol_inner);
    if (retry.gap < sol.gap) sol = std::move(retry);
  }
  if (sol.gap > tol_inner) {
    throw InnerSolveFailure("solve_inner: duality gap " + std::to_string(sol.gap) + " above tolerance",
                            std::move(sol));
  }
  return sol;
}

InnerSolution brute_force_inner(const GeneratorSet& G, const StepSet& S, double resolution) {
  const Index n = S.anchor.size();
  if (n > 3) throw ContractViolation("brute_force_inner: dimension must be <= 3");
  if (!(resolution > 0.0)) throw ContractViolation("brute_force_inner: resolution must be > 0");
  check_generators(G.generators, n, "brute_force_inner");

  const bool simplex = S.base.kind() == ConstraintKind::simplex;
  const Index free_dims = simplex ? n - 1 : n;
  const auto [box_lo, box_hi] = S.base.bounding_box();
  const double slack = 1e-12;
  const double simplex_total = simplex ? S.base.as_simplex().scale : 0.0;
  InnerSolution best;
  best.d = Vector::Zero(n);
  attach_worst_generator(G.generators, best);

  // Enumerates the grid of the given spacing over the free coordinates of d
  // within half_width of center, keeping the best feasible point.
  auto scan = [&](const Vector& center, double half_width, double spacing) {
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(free_dims));
    for (Index i = 0; i < free_dims; ++i) {
      const double lo = std::max({-S.eta, box_lo[i] - S.anchor[i], center[i] - half_width});
      const double hi = std::min({S.eta, box_hi[i] - S.anchor[i], center[i] + half_width});
      auto& axis = axes[static_cast<std::size_t>(i)];
      for (double v = lo; v < hi; v = lo + spacing * static_cast<double>(axis.size())) axis.push_back(v);
      axis.push_back(std::max(lo, hi));
    }
    Vector d(n);
    std::vector<std::size_t> counter(static_cast<std::size_t>(free_dims), 0);
    while (true) {
      double partial = 0.0;
      for (Index i = 0; i < free_dims; ++i) {
        d[i] = axes[static_cast<std::size_t>(i)][counter[static_cast<std::size_t>(i)]];
        partial += d[i];
      }
      if (simplex) d[n - 1] = simplex_total - S.anchor.sum() - partial;
      if (d.squaredNorm() <= S.eta * S.eta * (1.0 + slack) && contains(S.base, S.anchor + d, slack)) {
        double value = -std::numeric_limits<double>::infinity();
        for (const Vector& g : G.generators) value = std::max(value, g.dot(d));
        if (value < best.primal_value) {
          best.d = d;
          attach_worst_generator(G.generators, best);
        }
      }
      Index i = 0;
      while (i < free_dims) {
        auto& c = counter[static_cast<std::size_t>(i)];
        if (++c < axes[static_cast<std::size_t>(i)].size()) break;
        c = 0;
        ++i;
      }
      if (i == free_dims) break;
    }
  };

  scan(Vector::Zero(free_dims), S.eta, resolution);
  // Axis grids are coarser along diagonal faces and edges; a finer pass
  // around the coarse argmin keeps the error within the resolution there.
  scan(Vector(best.d.head(free_dims)), 2.0 * resolution, resolution / 8.0);
  best.dual_value = best.primal_value;
  best.gap = 0.0;
  return best;
}

}  // namespace ncsd
