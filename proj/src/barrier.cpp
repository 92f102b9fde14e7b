#include "ncsd/barrier.hpp"

#include <cmath>

#include "ncsd/errors.hpp"

namespace ncsd::detail {
namespace {

constexpr double kGrowth = 10.0;
constexpr int kMaxNewtonPerStage = 80;
constexpr int kMaxStages = 60;

struct Slacks {
  Vector linear;
  Vector ball;  // 0.5 * (r^2 - ||z_n - c||^2)

  bool strictly_positive() const {
    return (linear.size() == 0 || linear.minCoeff() > 0.0) &&
           (ball.size() == 0 || ball.minCoeff() > 0.0);
  }
};

Slacks compute_slacks(const BarrierProblem& p, const Vector& z) {
  Slacks s;
  s.linear = p.b - p.A * z;
  s.ball.resize(static_cast<Index>(p.balls.size()));
  for (std::size_t j = 0; j < p.balls.size(); ++j) {
    const auto& bc = p.balls[j];
    const Vector off = z.head(bc.center.size()) - bc.center;
    s.ball[static_cast<Index>(j)] = 0.5 * (bc.radius * bc.radius - off.squaredNorm());
  }
  return s;
}

// Change of the barrier objective along z -> z + step * dz, evaluated from
// ratios of slacks to avoid cancellation when t is large.
double objective_change(const BarrierProblem& p, double t, const Vector& dz, double step,
                        const Slacks& before, const Slacks& after) {
  double change = t * step * p.cost.dot(dz);
  for (Index i = 0; i < before.linear.size(); ++i) {
    change -= std::log(after.linear[i] / before.linear[i]);
  }
  for (Index j = 0; j < before.ball.size(); ++j) {
    change -= std::log(after.ball[j] / before.ball[j]);
  }
  return change;
}

}  // namespace

BarrierResult solve_barrier(const BarrierProblem& p, const Vector& z0, double target_gap,
                            double t0) {
  const Index dim = z0.size();
  const Index n_eq = p.E.rows();
  const double m = static_cast<double>(p.A.rows() + static_cast<Index>(p.balls.size()));

  BarrierResult out;
  out.z = z0;
  Slacks slack = compute_slacks(p, out.z);
  if (!slack.strictly_positive()) {
    throw ContractViolation("solve_barrier: starting point is not strictly feasible");
  }
  if (m == 0.0) {
    throw ContractViolation("solve_barrier: problem has no inequality constraints");
  }

  // Equality constraints are eliminated: z moves only along an orthonormal
  // basis N of null(E), so E z stays at E z0 up to rounding.
  Matrix N = Matrix::Identity(dim, dim);
  if (n_eq > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(p.E.transpose());
    const Matrix Q = qr.householderQ();
    N = Q.rightCols(dim - qr.rank());
  }

  double t = t0;
  for (int stage = 0; stage < kMaxStages; ++stage) {
    for (int it = 0; it < kMaxNewtonPerStage; ++it) {
      const Vector inv_s = slack.linear.cwiseInverse();
      Vector grad = t * p.cost + p.A.transpose() * inv_s;
      Matrix hess = p.A.transpose() * inv_s.cwiseAbs2().asDiagonal() * p.A;
      for (std::size_t j = 0; j < p.balls.size(); ++j) {
        const auto& bc = p.balls[j];
        const Index nb = bc.center.size();
        const double w = slack.ball[static_cast<Index>(j)];
        const Vector off = out.z.head(nb) - bc.center;
        grad.head(nb) += off / w;
        hess.topLeftCorner(nb, nb) += off * off.transpose() / (w * w);
        hess.topLeftCorner(nb, nb).diagonal().array() += 1.0 / w;
      }

      const Vector reduced_grad = N.transpose() * grad;
      Matrix reduced_hess = N.transpose() * hess * N;
      Vector dy = reduced_hess.ldlt().solve(-reduced_grad);
      if (!dy.allFinite()) {
        reduced_hess.diagonal().array() += 1e-12 * (1.0 + reduced_hess.diagonal().cwiseAbs().maxCoeff());
        dy = reduced_hess.fullPivLu().solve(-reduced_grad);
      }
      const Vector dz = N * dy;
      const double decrement = -grad.dot(dz);
      ++out.newton_steps;
      if (!(decrement > 1e-12)) break;

      double step = 1.0;
      Slacks trial;
      bool accepted = false;
      while (step > 1e-18) {
        const Vector z_try = out.z + step * dz;
        trial = compute_slacks(p, z_try);
        if (trial.strictly_positive() &&
            objective_change(p, t, dz, step, slack, trial) <= -0.25 * step * decrement) {
          out.z = z_try;
          slack = std::move(trial);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      if (decrement < 1e-10) break;
    }

    if (m / t <= target_gap) {
      out.converged = true;
      break;
    }
    t *= kGrowth;
  }

  out.linear_duals = slack.linear.cwiseInverse() / t;
  out.gap_bound = m / t;
  return out;
}

}  // namespace ncsd::detail
