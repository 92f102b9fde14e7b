#include "ncsd/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "ncsd/barrier.hpp"

namespace ncsd {
namespace {

constexpr double kVertexTol = 1e-9;
constexpr std::size_t kMaxVertexBases = 200000;

void require(bool ok, const std::string& message) {
  if (!ok) throw ContractViolation(message);
}

void require_dim(const ConstraintSet& set, const Vector& x, const char* op) {
  if (x.size() != set.dimension()) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (set " +
                            std::to_string(set.dimension()) + ", vector " +
                            std::to_string(x.size()) + ")");
  }
}

double binomial(Index n, Index k) {
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

std::vector<Vector> enumerate_vertices(const Matrix& H, const Vector& h) {
  const Index m = H.rows();
  const Index n = H.cols();
  std::vector<Vector> vertices;
  if (m < n || binomial(m, n) > static_cast<double>(kMaxVertexBases)) return vertices;

  std::vector<Index> pick(static_cast<std::size_t>(n));
  std::iota(pick.begin(), pick.end(), Index{0});
  Matrix basis(n, n);
  Vector rhs(n);
  while (true) {
    for (Index r = 0; r < n; ++r) {
      basis.row(r) = H.row(pick[static_cast<std::size_t>(r)]);
      rhs[r] = h[pick[static_cast<std::size_t>(r)]];
    }
    Eigen::FullPivLU<Matrix> lu(basis);
    if (lu.rank() == n) {
      const Vector v = lu.solve(rhs);
      const Vector slack = h - H * v;
      if (v.allFinite() && slack.minCoeff() >= -kVertexTol * (1.0 + h.cwiseAbs().maxCoeff())) {
        const bool seen = std::any_of(vertices.begin(), vertices.end(), [&](const Vector& u) {
          return (u - v).norm() <= kVertexTol * (1.0 + v.norm());
        });
        if (!seen) vertices.push_back(v);
      }
    }
    // next combination in lexicographic order
    Index i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return vertices;
}

// Whether {H x <= h} lies inside [lo, hi]: every vertex of its intersection
// with a strictly larger box must fall in [lo, hi]. Empty when the enlarged
// system has too many bases to enumerate.
std::optional<bool> within_box(const Matrix& H, const Vector& h, const Vector& lo, const Vector& hi) {
  const Index n = H.cols();
  const Vector margin = (hi - lo).array() + 1.0;
  Matrix A(H.rows() + 2 * n, n);
  Vector b(H.rows() + 2 * n);
  A << H, Matrix::Identity(n, n), -Matrix::Identity(n, n);
  b << h, hi + margin, -(lo - margin);
  if (binomial(A.rows(), n) > static_cast<double>(kMaxVertexBases)) return std::nullopt;
  for (const Vector& v : enumerate_vertices(A, b)) {
    const double slack = std::min((v - lo).minCoeff(), (hi - v).minCoeff());
    if (slack < -kVertexTol * (1.0 + v.cwiseAbs().maxCoeff())) return false;
  }
  return true;
}

// Largest inscribed ball of {H x <= h} inside the bounding box.
std::pair<Vector, double> chebyshev_center(const Matrix& H, const Vector& h, const Vector& lo,
                                           const Vector& hi) {
  const Index m = H.rows();
  const Index n = H.cols();
  detail::BarrierProblem p;
  p.cost = Vector::Zero(n + 1);
  p.cost[n] = -1.0;
  p.A = Matrix::Zero(m + 2 * n + 1, n + 1);
  p.b = Vector::Zero(m + 2 * n + 1);
  p.A.topLeftCorner(m, n) = H;
  p.A.block(0, n, m, 1) = H.rowwise().norm();
  p.b.head(m) = h;
  p.A.block(m, 0, n, n) = Matrix::Identity(n, n);
  p.b.segment(m, n) = hi;
  p.A.block(m + n, 0, n, n) = -Matrix::Identity(n, n);
  p.b.segment(m + n, n) = -lo;
  const double diag = (hi - lo).norm();
  p.A(m + 2 * n, n) = 1.0;
  p.b[m + 2 * n] = diag;

  Vector z0(n + 1);
  z0.head(n) = 0.5 * (lo + hi);
  const Vector slack = h - H * z0.head(n);
  z0[n] = (slack.array() / H.rowwise().norm().array()).minCoeff() - std::max(1.0, diag);

  const auto result = detail::solve_barrier(p, z0, 1e-8 * std::max(1.0, diag), 1.0 / std::max(1.0, diag));
  return {result.z.head(n), result.z[n]};
}

Vector project_simplex(const Vector& v, double scale) {
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - scale) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Primal active-set method for min 0.5 ||x - v||^2 s.t. H x <= h, started
// from the Chebyshev center (strictly feasible, empty working set).
Vector project_polytope(const PolytopeSet& poly, const Vector& v) {
  const Index m = poly.H.rows();
  const Index n = poly.H.cols();
  if ((poly.H * v - poly.h).maxCoeff() <= 0.0) return v;

  const double scale = 1.0 + v.cwiseAbs().maxCoeff() + poly.h.cwiseAbs().maxCoeff();
  const double tol = 1e-13 * scale;
  std::vector<Index> working;
  Vector x = poly.center;
  const int max_iterations = static_cast<int>(50 * (m + n));
  for (int it = 0; it < max_iterations; ++it) {
    Matrix Hw(n, static_cast<Index>(working.size()));
    for (std::size_t j = 0; j < working.size(); ++j) Hw.col(static_cast<Index>(j)) = poly.H.row(working[j]).transpose();
    Vector p = v - x;
    Eigen::ColPivHouseholderQR<Matrix> qr;
    if (!working.empty()) {
      qr.compute(Hw);
      const Matrix Q = qr.householderQ();
      const Matrix Q1 = Q.leftCols(qr.rank());
      p -= Q1 * (Q1.transpose() * p);
    }

    if (p.norm() <= tol) {
      if (working.empty()) return x;
      const Vector lambda = qr.solve(v - x);
      Index most_negative = 0;
      for (Index j = 1; j < lambda.size(); ++j) {
        if (lambda[j] < lambda[most_negative]) most_negative = j;
      }
      if (lambda[most_negative] >= -tol) return x;
      working.erase(working.begin() + most_negative);
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    for (Index j = 0; j < m; ++j) {
      if (std::find(working.begin(), working.end(), j) != working.end()) continue;
      const double rate = poly.H.row(j).dot(p);
      if (rate <= 0.0) continue;
      const double room = std::max(0.0, poly.h[j] - poly.H.row(j).dot(x));
      if (room < alpha * rate) {
        alpha = room / rate;
        blocking = j;
      }
    }
    x += alpha * p;
    if (blocking >= 0) working.push_back(blocking);
  }
  throw ProjectionFailure("project: active-set iteration limit on polytope", (poly.H * x - poly.h).maxCoeff(), x);
}

Vector linmin_polytope(const PolytopeSet& poly, const Vector& g) {
  if (!poly.vertices.empty()) {
    std::size_t best = 0;
    double best_value = g.dot(poly.vertices[0]);
    for (std::size_t i = 1; i < poly.vertices.size(); ++i) {
      const double value = g.dot(poly.vertices[i]);
      if (value < best_value) {
        best_value = value;
        best = i;
      }
    }
    return poly.vertices[best];
  }
  // Too many bases to enumerate: solve the LP with the barrier method.
  detail::BarrierProblem p;
  p.cost = g;
  p.A = poly.H;
  p.b = poly.h;
  const double scale = std::max(1e-300, g.norm() * (poly.bbox_hi - poly.bbox_lo).norm());
  const auto result = detail::solve_barrier(p, poly.center, 1e-9 * std::max(1.0, scale),
                                            1.0 / std::max(1e-12, scale));
  return result.z;
}

}  // namespace

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::box: return "box";
    case ConstraintKind::ball: return "ball";
    case ConstraintKind::simplex: return "simplex";
    case ConstraintKind::polytope: return "polytope";
  }
  return "unknown";
}

ConstraintSet ConstraintSet::box(Vector lo, Vector hi) {
  require(lo.size() > 0 && lo.size() == hi.size(), "box: lo and hi must be nonempty and the same size");
  require(lo.allFinite() && hi.allFinite(), "box: bounds must be finite");
  require((lo.array() <= hi.array()).all(), "box: lo must be <= hi componentwise");
  return ConstraintSet(BoxSet{std::move(lo), std::move(hi)});
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
  require(center.size() > 0 && center.allFinite(), "ball: center must be nonempty and finite");
  require(std::isfinite(radius) && radius > 0.0, "ball: radius must be > 0");
  return ConstraintSet(BallSet{std::move(center), radius});
}

ConstraintSet ConstraintSet::simplex(Index dimension, double scale) {
  require(dimension > 0, "simplex: dimension must be positive");
  require(std::isfinite(scale) && scale > 0.0, "simplex: scale must be > 0");
  return ConstraintSet(SimplexSet{dimension, scale});
}

ConstraintSet ConstraintSet::polytope(Matrix H, Vector h, std::optional<std::pair<Vector, Vector>> bbox) {
  require(H.rows() > 0 && H.cols() > 0 && H.rows() == h.size(), "polytope: H must be m x n with m == size(h)");
  require(H.allFinite() && h.allFinite(), "polytope: H and h must be finite");
  require((H.rowwise().norm().array() > 0.0).all(), "polytope: every row of H must be nonzero");

  PolytopeSet poly;
  poly.vertices = enumerate_vertices(H, h);
  if (bbox) {
    require(bbox->first.size() == H.cols() && bbox->second.size() == H.cols(),
            "polytope: bounding box dimension mismatch");
    require((bbox->first.array() <= bbox->second.array()).all(), "polytope: bounding box lo must be <= hi");
    for (const Vector& v : poly.vertices) {
      const double slack = std::min((v - bbox->first).minCoeff(), (bbox->second - v).minCoeff());
      require(slack >= -kVertexTol * (1.0 + v.cwiseAbs().maxCoeff()),
              "polytope: bounding box does not contain every vertex");
    }
    poly.bbox_lo = std::move(bbox->first);
    poly.bbox_hi = std::move(bbox->second);
  } else {
    require(!poly.vertices.empty(), "polytope: bounding box required when vertices cannot be enumerated");
    poly.bbox_lo = poly.vertices.front();
    poly.bbox_hi = poly.vertices.front();
    for (const Vector& v : poly.vertices) {
      poly.bbox_lo = poly.bbox_lo.cwiseMin(v);
      poly.bbox_hi = poly.bbox_hi.cwiseMax(v);
    }
  }
  require(((poly.bbox_hi - poly.bbox_lo).array() > 0.0).all(), "polytope: set must have nonempty interior");
  const std::optional<bool> bounded = within_box(H, h, poly.bbox_lo, poly.bbox_hi);
  require(bounded.value_or(true), bbox ? "polytope: set is not contained in its bounding box"
                                       : "polytope: set is unbounded");

  auto [center, radius] = chebyshev_center(H, h, poly.bbox_lo, poly.bbox_hi);
  require(radius > 1e-12, "polytope: set must have nonempty interior");
  poly.center = std::move(center);
  poly.inradius = radius;
  poly.H = std::move(H);
  poly.h = std::move(h);
  return ConstraintSet(std::move(poly));
}

ConstraintKind ConstraintSet::kind() const {
  return static_cast<ConstraintKind>(data_->index());
}

Index ConstraintSet::dimension() const {
  return std::visit(
      [](const auto& s) -> Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) return s.lo.size();
        if constexpr (std::is_same_v<T, BallSet>) return s.center.size();
        if constexpr (std::is_same_v<T, SimplexSet>) return s.dimension;
        if constexpr (std::is_same_v<T, PolytopeSet>) return s.H.cols();
      },
      *data_);
}

Vector ConstraintSet::interior_point() const {
  switch (kind()) {
    case ConstraintKind::box: return 0.5 * (as_box().lo + as_box().hi);
    case ConstraintKind::ball: return as_ball().center;
    case ConstraintKind::simplex: {
      const auto& s = as_simplex();
      return Vector::Constant(s.dimension, s.scale / static_cast<double>(s.dimension));
    }
    case ConstraintKind::polytope: return as_polytope().center;
  }
  return {};
}

EnclosingBall ConstraintSet::enclosing_ball() const {
  switch (kind()) {
    case ConstraintKind::box: {
      const auto& b = as_box();
      return {0.5 * (b.lo + b.hi), 0.5 * (b.hi - b.lo).norm()};
    }
    case ConstraintKind::ball: return {as_ball().center, as_ball().radius};
    case ConstraintKind::simplex: {
      const auto& s = as_simplex();
      const double n = static_cast<double>(s.dimension);
      return {interior_point(), s.scale * std::sqrt((n - 1.0) / n)};
    }
    case ConstraintKind::polytope: {
      const auto& p = as_polytope();
      if (p.vertices.empty()) return {0.5 * (p.bbox_lo + p.bbox_hi), 0.5 * (p.bbox_hi - p.bbox_lo).norm()};
      Vector centroid = Vector::Zero(p.H.cols());
      for (const Vector& v : p.vertices) centroid += v;
      centroid /= static_cast<double>(p.vertices.size());
      double radius = 0.0;
      for (const Vector& v : p.vertices) radius = std::max(radius, (v - centroid).norm());
      return {centroid, radius};
    }
  }
  return {};
}

std::pair<Vector, Vector> ConstraintSet::bounding_box() const {
  switch (kind()) {
    case ConstraintKind::box: return {as_box().lo, as_box().hi};
    case ConstraintKind::ball: {
      const auto& b = as_ball();
      return {b.center.array() - b.radius, b.center.array() + b.radius};
    }
    case ConstraintKind::simplex: {
      const auto& s = as_simplex();
      return {Vector::Zero(s.dimension), Vector::Constant(s.dimension, s.scale)};
    }
    case ConstraintKind::polytope: return {as_polytope().bbox_lo, as_polytope().bbox_hi};
  }
  return {};
}

bool contains(const ConstraintSet& set, const Vector& x, double tol) {
  require_dim(set, x, "contains");
  switch (set.kind()) {
    case ConstraintKind::box: {
      const auto& b = set.as_box();
      return ((x - b.lo).array() >= -tol).all() && ((b.hi - x).array() >= -tol).all();
    }
    case ConstraintKind::ball: {
      const auto& b = set.as_ball();
      return (x - b.center).norm() <= b.radius + tol;
    }
    case ConstraintKind::simplex: {
      const auto& s = set.as_simplex();
      return (x.array() >= -tol).all() && std::abs(x.sum() - s.scale) <= tol;
    }
    case ConstraintKind::polytope: {
      const auto& p = set.as_polytope();
      return (p.H * x - p.h).maxCoeff() <= tol;
    }
  }
  return false;
}

Vector project(const ConstraintSet& set, const Vector& x) {
  require_dim(set, x, "project");
  switch (set.kind()) {
    case ConstraintKind::box: return x.cwiseMax(set.as_box().lo).cwiseMin(set.as_box().hi);
    case ConstraintKind::ball: {
      const auto& b = set.as_ball();
      const Vector offset = x - b.center;
      const double dist = offset.norm();
      if (dist <= b.radius) return x;
      return b.center + (b.radius / dist) * offset;
    }
    case ConstraintKind::simplex: return project_simplex(x, set.as_simplex().scale);
    case ConstraintKind::polytope: return project_polytope(set.as_polytope(), x);
  }
  return x;
}

Vector linmin(const ConstraintSet& set, const Vector& g) {
  require_dim(set, g, "linmin");
  switch (set.kind()) {
    case ConstraintKind::box: {
      const auto& b = set.as_box();
      Vector y(g.size());
      for (Index i = 0; i < g.size(); ++i) y[i] = g[i] < 0.0 ? b.hi[i] : b.lo[i];
      return y;
    }
    case ConstraintKind::ball: {
      const auto& b = set.as_ball();
      const double norm = g.norm();
      if (norm == 0.0) return b.center;
      return b.center - (b.radius / norm) * g;
    }
    case ConstraintKind::simplex: {
      const auto& s = set.as_simplex();
      Index best = 0;
      g.minCoeff(&best);  // first index on ties
      Vector y = Vector::Zero(s.dimension);
      y[best] = s.scale;
      return y;
    }
    case ConstraintKind::polytope: return linmin_polytope(set.as_polytope(), g);
  }
  return g;
}

double diameter(const ConstraintSet& set) {
  switch (set.kind()) {
    case ConstraintKind::box: return (set.as_box().hi - set.as_box().lo).norm();
    case ConstraintKind::ball: return 2.0 * set.as_ball().radius;
    case ConstraintKind::simplex: {
      const auto& s = set.as_simplex();
      return s.dimension > 1 ? s.scale * std::sqrt(2.0) : 0.0;
    }
    case ConstraintKind::polytope: {
      const auto& p = set.as_polytope();
      return (p.bbox_hi - p.bbox_lo).norm();
    }
  }
  return 0.0;
}

Vector sample(const ConstraintSet& set, std::mt19937_64& rng) {
  const Index n = set.dimension();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (set.kind()) {
    case ConstraintKind::box: {
      const auto& b = set.as_box();
      Vector x(n);
      for (Index i = 0; i < n; ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * unit(rng);
      return x;
    }
    case ConstraintKind::ball: {
      const auto& b = set.as_ball();
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector dir(n);
      do {
        for (Index i = 0; i < n; ++i) dir[i] = normal(rng);
      } while (dir.norm() == 0.0);
      const double r = b.radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
      return b.center + (r / dir.norm()) * dir;
    }
    case ConstraintKind::simplex: {
      const auto& s = set.as_simplex();
      std::exponential_distribution<double> expo(1.0);
      Vector x(n);
      for (Index i = 0; i < n; ++i) x[i] = expo(rng);
      return (s.scale / x.sum()) * x;
    }
    case ConstraintKind::polytope: {
      const auto& p = set.as_polytope();
      for (int attempt = 0; attempt < 1000000; ++attempt) {
        Vector x(n);
        for (Index i = 0; i < n; ++i) x[i] = p.bbox_lo[i] + (p.bbox_hi[i] - p.bbox_lo[i]) * unit(rng);
        if ((p.H * x - p.h).maxCoeff() <= 0.0) return x;
      }
      throw NumericFailure("sample: rejection sampling from the polytope bounding box failed", 1.0);
    }
  }
  return Vector::Zero(n);
}

bool contains(const StepSet& s, const Vector& d, double tol) {
  return d.norm() <= s.eta + tol && contains(s.base, s.anchor + d, tol);
}

bool ball_inside(const StepSet& s) {
  const Vector& x = s.anchor;
  switch (s.base.kind()) {
    case ConstraintKind::box: {
      const auto& b = s.base.as_box();
      return (x - b.lo).minCoeff() >= s.eta && (b.hi - x).minCoeff() >= s.eta;
    }
    case ConstraintKind::ball: {
      const auto& b = s.base.as_ball();
      return (x - b.center).norm() + s.eta <= b.radius;
    }
    case ConstraintKind::simplex: return false;
    case ConstraintKind::polytope: {
      const auto& p = s.base.as_polytope();
      return ((p.h - p.H * x).array() >= s.eta * p.H.rowwise().norm().array()).all();
    }
  }
  return false;
}

Vector step_linmin(const StepSet& s, const Vector& g) {
  require_dim(s.base, g, "step_linmin");
  require(s.eta > 0.0, "step_linmin: eta must be > 0");
  const Index n = g.size();
  const double gnorm = g.norm();
  if (gnorm == 0.0) return Vector::Zero(n);
  if (ball_inside(s)) return (-s.eta / gnorm) * g;

  // On the simplex only differences of g matter; shifting makes tied minimal
  // coordinates exactly zero so huge multipliers below do not swamp them.
  Vector dir = g;
  if (s.base.kind() == ConstraintKind::simplex) dir.array() -= g.minCoeff();
  const double dnorm = dir.norm();
  if (dnorm == 0.0) return Vector::Zero(n);

  const double eta = s.eta;
  const Vector y = linmin(s.base, dir);
  if ((y - s.anchor).norm() <= eta) return y - s.anchor;

  // d(mu) = argmin_{d in C - x} dir'd + mu ||d||^2; ||d(mu)|| is nonincreasing in mu
  // and dir'd(mu) exceeds the optimum by at most mu (eta^2 - ||d(mu)||^2).
  auto d_of = [&](double mu) -> Vector { return project(s.base, s.anchor - dir / (2.0 * mu)) - s.anchor; };
  const double target = 1e-13 * std::max(1.0, dnorm * eta);
  // Without the ball the optimum is dir'(y - x); a d(mu) inside the ball that
  // reaches it is exact even when the bound above stays loose, as happens when
  // dir is normal to a face of C and the whole face is optimal.
  const double floor_value = dir.dot(y - s.anchor);
  auto excess = [&](double mu, const Vector& d) {
    return std::min(mu * (eta * eta - d.squaredNorm()), std::max(0.0, dir.dot(d) - floor_value));
  };

  double hi = dnorm / (2.0 * eta);
  Vector d_hi = d_of(hi);
  double lo = hi;
  bool bracketed = false;
  for (int i = 0; i < 80; ++i) {
    if (excess(hi, d_hi) <= target) return d_hi;
    lo = 0.25 * hi;
    Vector d_lo = d_of(lo);
    if (d_lo.norm() > eta) {
      bracketed = true;
      break;
    }
    hi = lo;
    d_hi = std::move(d_lo);
  }
  if (!bracketed) return d_hi;

  for (int i = 0; i < 200; ++i) {
    if (excess(hi, d_hi) <= target) return d_hi;
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    Vector d_mid = d_of(mid);
    if (d_mid.norm() > eta) {
      lo = mid;
    } else {
      hi = mid;
      d_hi = std::move(d_mid);
    }
  }
  const double residual = excess(hi, d_hi);
  if (residual > 1e-9 * std::max(1.0, dnorm * eta)) {
    throw NumericFailure("step_linmin: multiplier bisection did not converge", residual);
  }
  return d_hi;
}

}  // namespace ncsd
