#include "ncsd/model.hpp"

#include <cmath>
#include <string>

#include "ncsd/errors.hpp"

namespace ncsd {
namespace {

constexpr Index kMaxEnumeratedKinks = 10;

void require(bool ok, const std::string& message) {
  if (!ok) throw ContractViolation(message);
}

void check_point(const FunctionOracle& f, const Vector& x, const char* op) {
  if (x.size() != f.dimension()) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (function " +
                            std::to_string(f.dimension()) + ", point " + std::to_string(x.size()) + ")");
  }
  if (!x.allFinite()) throw ContractViolation(std::string(op) + ": point has non-finite entries");
}

QuadraticParams make_quadratic(Matrix Q, Vector q, double r, std::optional<double> alpha) {
  require(Q.rows() > 0 && Q.rows() == Q.cols() && Q.rows() == q.size(), "quadratic: Q must be n x n and q of size n");
  require(Q.allFinite() && q.allFinite() && std::isfinite(r), "quadratic: parameters must be finite");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "quadratic: Q must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  require(lambda_min >= -1e-12 * scale, "quadratic: Q must be positive semidefinite");

  QuadraticParams p;
  p.Q = std::move(Q);
  p.q = std::move(q);
  p.r = r;
  p.curvature_upper = std::max(lambda_max, 0.0);
  p.curvature_lower = std::max(lambda_min, 0.0);
  if (alpha) {
    require(*alpha >= 0.0 && *alpha <= p.curvature_lower + 1e-12 * scale,
            "quadratic: alpha must be a lower bound on the smallest eigenvalue of Q");
    p.curvature_lower = *alpha;
  }
  return p;
}

double eval_quadratic(const QuadraticParams& p, const Vector& x) {
  return 0.5 * x.dot(p.Q * x) + p.q.dot(x) + p.r;
}

Vector gradient_quadratic(const QuadraticParams& p, const Vector& x) { return p.Q * x + p.q; }

double lipschitz_quadratic(const QuadraticParams& p, const ConstraintSet& domain) {
  const EnclosingBall ball = domain.enclosing_ball();
  return gradient_quadratic(p, ball.center).norm() + p.curvature_upper * ball.radius;
}

GeneratorSet max_affine_generators(const MaxAffineParams& p, const Vector& x, double eps) {
  const Vector values = p.slopes * x + p.offsets;
  const double fx = values.maxCoeff();
  const double lipschitz = p.slopes.rowwise().norm().maxCoeff();
  const double threshold = 2.0 * eps * lipschitz;

  GeneratorSet out;
  out.epsilon = 2.0 * eps;
  // Keep an active piece first so generator 0 is a subgradient at x.
  Index first_active = 0;
  values.maxCoeff(&first_active);
  out.generators.emplace_back(p.slopes.row(first_active).transpose());
  for (Index i = 0; i < values.size(); ++i) {
    if (i != first_active && fx - values[i] <= threshold) out.generators.emplace_back(p.slopes.row(i).transpose());
  }
  return out;
}

// Sign patterns of the l1 term. A pattern flips a set F of coordinates
// relative to sign(x) (with sign(0) = +1); it is kept when ||x_F|| <= eps,
// i.e. when the point with x_F zeroed lies within eps of x. Every hyperplane
// crossing of a segment of length <= eps is covered that way.
GeneratorSet l1_generators(const QuadraticL1Params& p, const Vector& x, double eps) {
  const Index n = x.size();
  const Vector grad = gradient_quadratic(p.smooth, x);
  Vector base_sign(n);
  for (Index i = 0; i < n; ++i) base_sign[i] = x[i] < 0.0 ? -1.0 : 1.0;

  std::vector<Index> ambiguous;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(x[i]) <= eps) ambiguous.push_back(i);
  }

  GeneratorSet out;
  out.generators.push_back(grad + p.weight * base_sign);
  double certified = 0.0;
  const double eps_sq = eps * eps;

  if (static_cast<Index>(ambiguous.size()) <= kMaxEnumeratedKinks) {
    const std::size_t patterns = std::size_t{1} << ambiguous.size();
    for (std::size_t mask = 1; mask < patterns; ++mask) {
      double dist_sq = 0.0;
      Vector sign = base_sign;
      for (std::size_t j = 0; j < ambiguous.size(); ++j) {
        if (mask & (std::size_t{1} << j)) {
          const Index i = ambiguous[j];
          sign[i] = -sign[i];
          dist_sq += x[i] * x[i];
        }
      }
      if (dist_sq <= eps_sq) {
        out.generators.push_back(grad + p.weight * sign);
        certified = std::max(certified, std::sqrt(dist_sq));
      }
    }
  } else {
    for (const Index i : ambiguous) {
      Vector sign = base_sign;
      sign[i] = -sign[i];
      out.generators.push_back(grad + p.weight * sign);
      certified = std::max(certified, std::abs(x[i]));
    }
  }
  out.epsilon = certified;
  return out;
}

}  // namespace

const char* to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::max_affine: return "max_affine";
    case FunctionKind::quadratic: return "quadratic";
    case FunctionKind::quadratic_l1: return "quadratic_l1";
  }
  return "unknown";
}

FunctionOracle FunctionOracle::max_affine(Matrix slopes, Vector offsets) {
  require(slopes.rows() > 0 && slopes.cols() > 0, "max_affine: need at least one piece and dimension > 0");
  require(slopes.rows() == offsets.size(), "max_affine: one offset per piece");
  require(slopes.allFinite() && offsets.allFinite(), "max_affine: parameters must be finite");
  const Index n = slopes.cols();
  return FunctionOracle(std::make_shared<const Data>(
      Data{n, MaxAffineParams{std::move(slopes), std::move(offsets)}, std::nullopt}));
}

FunctionOracle FunctionOracle::quadratic(Matrix Q, Vector q, double r, std::optional<double> alpha) {
  QuadraticParams p = make_quadratic(std::move(Q), std::move(q), r, alpha);
  const Index n = p.q.size();
  return FunctionOracle(std::make_shared<const Data>(Data{n, std::move(p), std::nullopt}));
}

FunctionOracle FunctionOracle::quadratic_l1(Matrix Q, Vector q, double r, double weight,
                                            std::optional<double> alpha) {
  require(std::isfinite(weight) && weight >= 0.0, "quadratic_l1: weight must be >= 0");
  QuadraticParams p = make_quadratic(std::move(Q), std::move(q), r, alpha);
  const Index n = p.q.size();
  return FunctionOracle(
      std::make_shared<const Data>(Data{n, QuadraticL1Params{std::move(p), weight}, std::nullopt}));
}

FunctionOracle FunctionOracle::with_constants(FunctionConstants declared) const {
  require(declared.lipschitz > 0.0, "constants: lipschitz must be > 0");
  require(declared.weak_smooth >= 0.0 && declared.strong_convex >= 0.0, "constants: beta and alpha must be >= 0");
  require(declared.strong_convex <= declared.weak_smooth || declared.weak_smooth == 0.0 ||
              declared.strong_convex == 0.0,
          "constants: alpha must not exceed beta");
  return FunctionOracle(std::make_shared<const Data>(Data{data_->dimension, data_->params, declared}));
}

double eval(const FunctionOracle& f, const Vector& x) {
  check_point(f, x, "eval");
  switch (f.kind()) {
    case FunctionKind::max_affine: {
      const auto& p = f.as_max_affine();
      return (p.slopes * x + p.offsets).maxCoeff();
    }
    case FunctionKind::quadratic: return eval_quadratic(f.as_quadratic(), x);
    case FunctionKind::quadratic_l1: {
      const auto& p = f.as_quadratic_l1();
      return eval_quadratic(p.smooth, x) + p.weight * x.lpNorm<1>();
    }
  }
  return 0.0;
}

GeneratorSet relaxed_subdiff(const FunctionOracle& f, const Vector& x, double eps) {
  check_point(f, x, "relaxed_subdiff");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ContractViolation("relaxed_subdiff: eps must be finite and >= 0");
  switch (f.kind()) {
    case FunctionKind::max_affine: return max_affine_generators(f.as_max_affine(), x, eps);
    case FunctionKind::quadratic: return GeneratorSet{{gradient_quadratic(f.as_quadratic(), x)}, 0.0};
    case FunctionKind::quadratic_l1: return l1_generators(f.as_quadratic_l1(), x, eps);
  }
  return {};
}

double certified_epsilon_bound(const FunctionOracle& f, double eps) {
  switch (f.kind()) {
    case FunctionKind::max_affine: return 2.0 * eps;
    case FunctionKind::quadratic: return 0.0;
    case FunctionKind::quadratic_l1: return eps;
  }
  return eps;
}

bool is_smooth(const FunctionOracle& f) {
  switch (f.kind()) {
    case FunctionKind::max_affine: return f.as_max_affine().slopes.rows() == 1;
    case FunctionKind::quadratic: return true;
    case FunctionKind::quadratic_l1: return f.as_quadratic_l1().weight == 0.0;
  }
  return false;
}

FunctionConstants constants(const FunctionOracle& f, const ConstraintSet& domain) {
  if (f.declared_constants()) return *f.declared_constants();
  if (domain.dimension() != f.dimension()) throw ContractViolation("constants: dimension mismatch");
  switch (f.kind()) {
    case FunctionKind::max_affine: return constants(f);
    case FunctionKind::quadratic: {
      const auto& p = f.as_quadratic();
      return {lipschitz_quadratic(p, domain), p.curvature_upper, p.curvature_lower};
    }
    case FunctionKind::quadratic_l1: {
      const auto& p = f.as_quadratic_l1();
      const double l1_part = p.weight * std::sqrt(static_cast<double>(f.dimension()));
      return {lipschitz_quadratic(p.smooth, domain) + l1_part, p.smooth.curvature_upper, p.smooth.curvature_lower};
    }
  }
  return {};
}

FunctionConstants constants(const FunctionOracle& f) {
  if (f.declared_constants()) return *f.declared_constants();
  if (f.kind() != FunctionKind::max_affine) {
    throw ContractViolation("constants: quadratic kinds need a constraint set to bound the Lipschitz constant");
  }
  return {f.as_max_affine().slopes.rowwise().norm().maxCoeff(), 0.0, 0.0};
}

}  // namespace ncsd
