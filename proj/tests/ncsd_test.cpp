#include <doctest.h>

#include <cmath>

#include "ncsd/audit.hpp"
#include "ncsd/format.hpp"
#include "ncsd/ncsd.hpp"
#include "test_util.hpp"

using namespace ncsd;
using ncsd::test::abs_slopes;
using ncsd::test::vec;

namespace {

FunctionOracle abs1() { return FunctionOracle::max_affine(abs_slopes(), vec({0, 0})); }
FunctionOracle half_square() { return FunctionOracle::quadratic(Matrix::Identity(1, 1), vec({0}), 0.0); }
ConstraintSet unit_interval() { return ConstraintSet::box(vec({-1}), vec({1})); }

NcsdConfig config_with(ScheduleHandle schedule, std::int64_t max_outer) {
  NcsdConfig cfg;
  cfg.schedule = std::move(schedule);
  cfg.max_outer = max_outer;
  return cfg;
}

}  // namespace

TEST_CASE("step on the half square takes the full step") {
  const IterateState x{0, vec({1}), 0.5, false};
  const StepResult r = step(half_square(), unit_interval(), x, 1.0, 0.0, NcsdConfig{});
  CHECK(r.record.gtd == doctest::Approx(-1.0));
  CHECK(r.record.lambda == 1.0);
  CHECK(r.record.ls_iters == 0);
  CHECK(std::abs(r.next.x[0]) <= 1e-12);
  CHECK_FALSE(r.next.stalled);
}

TEST_CASE("step at the kink of |x| stalls") {
  const IterateState x{0, vec({0}), 0.0, false};
  const StepResult r = step(abs1(), unit_interval(), x, 0.5, 0.1, NcsdConfig{});
  CHECK(r.record.stalled);
  CHECK(r.next.stalled);
  CHECK(r.next.x[0] == 0.0);
  CHECK(r.record.lambda == 0.0);
  // The requested eps is certified at twice its size for max_affine.
  CHECK(r.record.certificate == doctest::Approx(stall_certificate(0.2, 1.0)));
}

TEST_CASE("step on |x| away from the kink") {
  const IterateState x{0, vec({0.5}), 0.5, false};
  const StepResult r = step(abs1(), unit_interval(), x, 0.25, 0.05, NcsdConfig{});
  CHECK(r.record.gtd == doctest::Approx(-0.25));
  CHECK(r.record.lambda == 1.0);
  CHECK(r.next.x[0] == doctest::Approx(0.25));
  CHECK(r.next.fx == doctest::Approx(0.25));
}

TEST_CASE("step validates its inputs") {
  const IterateState x{0, vec({0.5}), 0.5, false};
  CHECK_THROWS_AS(step(abs1(), unit_interval(), x, 0.0, 0.1, NcsdConfig{}), ContractViolation);
  CHECK_THROWS_AS(step(abs1(), unit_interval(), x, 0.1, -1.0, NcsdConfig{}), ContractViolation);
  NcsdConfig bad;
  bad.rho = 1.0;
  CHECK_THROWS_AS(step(abs1(), unit_interval(), x, 0.1, 0.1, bad), ContractViolation);
}

TEST_CASE("line search gives up at its reduction cap") {
  // From x = 0.1 with eta = 1 the Armijo test needs lambda <= 0.1, which is
  // four halvings away; a cap of one reduction fails.
  const auto f = FunctionOracle::quadratic(Matrix::Identity(1, 1) * 1000.0, vec({0}), 0.0);
  NcsdConfig cfg;
  cfg.max_line_search = 1;
  const IterateState x{0, vec({0.1}), 5.0, false};
  CHECK_THROWS_AS(step(f, unit_interval(), x, 1.0, 0.0, cfg), LineSearchFailure);
}

TEST_CASE("stall_certificate") {
  CHECK(stall_certificate(0.05, 1.0) == doctest::Approx(0.1));
  CHECK(stall_certificate(0.0, 1.0) == 0.0);
  CHECK(stall_certificate(0.1, 1.0) == doctest::Approx(0.2));
}

TEST_CASE("run with a zero iteration cap") {
  const IterateTrace t = run(abs1(), unit_interval(), vec({0.7}), config_with(make_fixed(0.1, 0.0), 0));
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].x[0] == 0.7);
  CHECK(t.records[0].fx == doctest::Approx(0.7));
  CHECK(std::isnan(t.records[0].gtd));
}

TEST_CASE("run under the geometric schedule stays in its envelope") {
  const NcsdConfig cfg = config_with(make_sc_smooth(1.0, 1.0, 0.5, 0.5, 0.5), 200);
  const IterateTrace t = run(half_square(), unit_interval(), vec({1}), cfg);
  const RunReport report = verify_envelope(t, 0.0);
  CHECK(report.ok());
  CHECK(report.checked == static_cast<std::int64_t>(t.records.size()));
  CHECK(t.records.back().fx <= 1e-10);
  CHECK(audit_trace(t, half_square(), unit_interval(), KnownOptimum{vec({0}), 0.0}).ok());
}

TEST_CASE("run under the halving schedule reaches its target") {
  const ConstraintSet C = unit_interval();
  const double L = 1.0;
  const double R = diameter(C);
  const double c = compute_c(L, 0.0, R, 0.5, 0.5);
  const ScheduleHandle s = make_pwl_halving(std::min(L * R, c), c, L, 0.01);
  const IterateTrace t = run(abs1(), C, vec({1}), config_with(s, s.t_dagger));
  CHECK(t.records.back().k == *s.stop_index());
  CHECK(t.records.back().k <= s.t_dagger);
  CHECK(t.records.back().fx <= 0.01);
  CHECK(verify_envelope(t, 0.0).ok());
}

TEST_CASE("run stops on a stall under a fixed schedule") {
  const IterateTrace t = run(abs1(), unit_interval(), vec({0.3}), config_with(make_fixed(0.2, 0.05), 100));
  REQUIRE(t.records.size() >= 2);
  CHECK(t.records[t.records.size() - 2].stalled);
  CHECK(t.records.size() < 100);
}

TEST_CASE("run traces are monotone, feasible and satisfy Armijo") {
  const auto f = FunctionOracle::quadratic_l1(Matrix::Identity(2, 2), vec({-0.5, -2}), 2.125, 1.0);
  const ConstraintSet C = ConstraintSet::box(vec({-2, -2}), vec({2, 2}));
  const IterateTrace t = run(f, C, vec({-1.5, -1}), config_with(make_practical_strongly_convex(2.0), 300));
  const AuditReport audit = audit_trace(t, f, C, KnownOptimum{vec({0, 1}), 1.625});
  for (const AuditFinding& finding : audit.findings) {
    CAPTURE(finding.check);
    CAPTURE(finding.k);
    CHECK(finding.lhs <= finding.rhs);
  }
  CHECK(audit.applied_count("armijo") > 0);
  CHECK(audit.applied_count("monotone") == static_cast<std::int64_t>(t.records.size()) - 1);
}

TEST_CASE("run is deterministic") {
  const auto f = FunctionOracle::quadratic_l1(Matrix::Identity(2, 2), vec({-0.5, -2}), 2.125, 1.0);
  const ConstraintSet C = ConstraintSet::box(vec({-2, -2}), vec({2, 2}));
  const NcsdConfig cfg = config_with(make_practical_strongly_convex(2.0), 100);
  const IterateTrace a = run(f, C, vec({-1.5, -1}), cfg);
  const IterateTrace b = run(f, C, vec({-1.5, -1}), cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(format_real(a.records[i].lambda) == format_real(b.records[i].lambda));
  }
}

TEST_CASE("line_search_cap") {
  // Sufficient step already at lambda = 1.
  CHECK(line_search_cap(0.1, 0.1, -1.0, 1.0, 0.5, 0.5, false) == 2.0);
  // eps / eta = 1/8 needs three halvings.
  CHECK(line_search_cap(0.0125, 0.1, -1.0, 1.0, 0.5, 0.5, false) == 5.0);
  CHECK(std::isinf(line_search_cap(0.0, 0.1, -1.0, 0.0, 0.5, 0.5, false)));
  CHECK(std::isinf(line_search_cap(0.1, 0.1, 0.0, 1.0, 0.5, 0.5, true)));
}
