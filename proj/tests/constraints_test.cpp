#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ncsd/constraints.hpp"
#include "test_util.hpp"

using namespace ncsd;
using ncsd::test::mat;
using ncsd::test::vec;

namespace {

ConstraintSet square() { return ConstraintSet::box(vec({-1, -1}), vec({1, 1})); }

std::vector<ConstraintSet> zoo() {
  return {
      ConstraintSet::box(vec({-1, 0, -2}), vec({1, 0.5, 2})),
      ConstraintSet::ball(vec({0.5, -0.5, 1}), 1.5),
      ConstraintSet::simplex(3, 2.0),
      ConstraintSet::polytope(mat({{1, 1, 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}, {1, -1, 0}}),
                              vec({1, 0, 0, 0, 0.25})),
  };
}

}  // namespace

TEST_CASE("contains") {
  CHECK(contains(square(), vec({0, 0}), 0.0));
  CHECK(contains(ConstraintSet::ball(vec({0, 0}), 1.0), vec({1.0000001, 0}), 1e-6));
  CHECK_FALSE(contains(ConstraintSet::simplex(2, 1.0), vec({0.5, 0.6}), 1e-9));
}

TEST_CASE("project") {
  CHECK((project(square(), vec({2, 0.5})) - vec({1, 0.5})).norm() <= 1e-15);
  CHECK((project(ConstraintSet::ball(vec({0, 0}), 1.0), vec({3, 4})) - vec({0.6, 0.8})).norm() <= 1e-15);
  CHECK((project(ConstraintSet::simplex(2, 1.0), vec({0.8, 0.8})) - vec({0.5, 0.5})).norm() <= 1e-12);
}

TEST_CASE("linmin") {
  CHECK(linmin(square(), vec({1, -2})) == vec({-1, 1}));
  CHECK((linmin(ConstraintSet::ball(vec({0, 0}), 2.0), vec({3, 4})) - vec({-1.2, -1.6})).norm() <= 1e-15);
  CHECK(linmin(ConstraintSet::simplex(3, 1.0), vec({0.3, 0.1, 0.7})) == vec({0, 1, 0}));
}

TEST_CASE("linmin breaks ties toward the lowest index") {
  CHECK(linmin(ConstraintSet::simplex(3, 1.0), vec({0.2, 0.2, 0.5})) == vec({1, 0, 0}));
}

TEST_CASE("diameter") {
  CHECK(diameter(square()) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(diameter(ConstraintSet::ball(vec({0, 0}), 1.0)) == doctest::Approx(2.0));
  CHECK(diameter(ConstraintSet::simplex(3, 1.0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("invalid sets are rejected") {
  CHECK_THROWS_AS(ConstraintSet::box(vec({1}), vec({0})), ContractViolation);
  CHECK_THROWS_AS(ConstraintSet::ball(vec({0}), -1.0), ContractViolation);
  CHECK_THROWS_AS(ConstraintSet::simplex(2, 0.0), ContractViolation);
  // Unbounded polytope and an empty one.
  CHECK_THROWS_AS(ConstraintSet::polytope(mat({{1, 0}}), vec({1})), ContractViolation);
  CHECK_THROWS_AS(ConstraintSet::polytope(mat({{1}, {-1}}), vec({-1, 0})), ContractViolation);
  // A cone with vertices (0, 0) and (1, 0) that is unbounded along (1, 1).
  CHECK_THROWS_AS(ConstraintSet::polytope(mat({{-1, 0}, {0, -1}, {1, -1}}), vec({0, 0, 1})), ContractViolation);
  // A declared bounding box that cuts off part of the set.
  CHECK_THROWS_AS(ConstraintSet::polytope(mat({{1, 1}, {-1, 0}, {0, -1}}), vec({1, 0, 0}),
                                          std::pair{vec({0, 0}), vec({0.5, 1})}),
                  ContractViolation);
}

TEST_CASE("step_linmin") {
  SUBCASE("ball active") {
    const StepSet S{ConstraintSet::box(vec({-10}), vec({10})), vec({0}), 1.0};
    CHECK(step_linmin(S, vec({2}))[0] == doctest::Approx(-1.0));
  }
  SUBCASE("box face active") {
    const StepSet S{ConstraintSet::box(vec({-0.5}), vec({10})), vec({0}), 1.0};
    CHECK(step_linmin(S, vec({2}))[0] == doctest::Approx(-0.5));
  }
  SUBCASE("near a face in two dimensions") {
    // Grid search plus angular refinement puts the minimizer on the ball
    // at -(1, 1)/sqrt(2); that point is inside the box.
    const StepSet S{square(), vec({0.9, 0}), 1.0};
    const Vector d = step_linmin(S, vec({1, 1}));
    CHECK(d[0] == doctest::Approx(-0.707107).epsilon(1e-6));
    CHECK(d[1] == doctest::Approx(-0.707107).epsilon(1e-6));
  }
  SUBCASE("direction normal to a polytope face") {
    // The face x + y = 1 lies 0.354 from the anchor, inside the ball, so the
    // optimal value is -(1 - 0.5) with no ball contact.
    const StepSet S{ConstraintSet::polytope(mat({{1, 1}, {-1, 0}, {0, -1}}), vec({1, 0, 0})), vec({0.25, 0.25}), 0.5};
    const Vector d = step_linmin(S, vec({-1, -1}));
    CHECK(contains(S, d, 1e-12));
    CHECK(d.sum() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("ball_inside") {
  CHECK(ball_inside({square(), vec({0, 0}), 0.5}));
  CHECK_FALSE(ball_inside({square(), vec({0.9, 0}), 0.5}));
  CHECK_FALSE(ball_inside({ConstraintSet::simplex(2, 1.0), vec({0.5, 0.5}), 0.1}));
}

TEST_CASE("projection properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (const ConstraintSet& C : zoo()) {
    CAPTURE(to_string(C.kind()));
    for (int s = 0; s < 20; ++s) {
      Vector x(C.dimension());
      for (Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
      const Vector p = project(C, x);
      CHECK(contains(C, p, 1e-9));
      CHECK((project(C, p) - p).norm() <= 1e-10);
      for (int t = 0; t < 100; ++t) {
        const Vector y = sample(C, rng);
        CHECK((x - p).dot(y - p) <= 1e-9);
      }
    }
  }
}

TEST_CASE("linmin dominates samples") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const ConstraintSet& C : zoo()) {
    CAPTURE(to_string(C.kind()));
    for (int s = 0; s < 20; ++s) {
      Vector g(C.dimension());
      for (Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
      const Vector v = linmin(C, g);
      CHECK(contains(C, v, 1e-9));
      for (int t = 0; t < 100; ++t) CHECK(g.dot(v) <= g.dot(sample(C, rng)) + 1e-9);
    }
  }
}

TEST_CASE("diameter bounds sampled distances") {
  std::mt19937_64 rng(8);
  for (const ConstraintSet& C : zoo()) {
    const double R = diameter(C);
    for (int s = 0; s < 500; ++s) CHECK((sample(C, rng) - sample(C, rng)).norm() <= R + 1e-12);
  }
}

TEST_CASE("step_linmin is feasible and beats samples") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.05, 1.5);
  for (const ConstraintSet& C : zoo()) {
    CAPTURE(to_string(C.kind()));
    for (int s = 0; s < 20; ++s) {
      const StepSet S{C, sample(C, rng), radius(rng)};
      Vector g(C.dimension());
      for (Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
      const Vector d = step_linmin(S, g);
      CHECK(d.norm() <= S.eta + 1e-9);
      CHECK(contains(C, S.anchor + d, 1e-9));
      for (int t = 0; t < 50; ++t) {
        const Vector y = sample(C, rng);
        Vector e = y - S.anchor;
        if (e.norm() > S.eta) e *= S.eta / e.norm();  // still in C by convexity
        CHECK(g.dot(d) <= g.dot(e) + 1e-9);
      }
    }
  }
}
