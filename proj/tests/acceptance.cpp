// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncsd/audit.hpp"
#include "ncsd/cli.hpp"
#include "ncsd/experiment.hpp"
#include "ncsd/format.hpp"
#include "ncsd/inner.hpp"
#include "ncsd/ncsd.hpp"
#include "ncsd/problem.hpp"

using namespace ncsd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int criterion, const Outcome& o) {
  std::cout << "criterion " << criterion << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string problem_path(const std::string& name) { return std::string(NCSD_PROBLEM_DIR) + "/" + name + ".json"; }

Vector normal_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// ||x||_1 as the max over all 2^n sign vectors.
FunctionOracle l1_max_affine(Index n) {
  const Index pieces = Index{1} << n;
  Matrix slopes(pieces, n);
  for (Index p = 0; p < pieces; ++p) {
    for (Index i = 0; i < n; ++i) slopes(p, i) = (p >> i) & 1 ? -1.0 : 1.0;
  }
  return FunctionOracle::max_affine(slopes, Vector::Zero(pieces));
}

Matrix random_psd(Index n, std::mt19937_64& rng) {
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j) A.col(j) = normal_vector(n, rng);
  return A * A.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n);
}

Outcome subgradient_bounds() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  struct Case {
    std::string label;
    FunctionOracle f;
  };
  std::vector<Case> cases;
  for (Index n : {1, 2, 5}) cases.push_back({"max_affine n=" + std::to_string(n), l1_max_affine(n)});
  for (Index n : {2, 5}) {
    cases.push_back({"quadratic n=" + std::to_string(n),
                     FunctionOracle::quadratic(random_psd(n, rng), normal_vector(n, rng), 0.0)});
  }
  for (Index n : {2, 5}) {
    cases.push_back({"quadratic_l1 n=" + std::to_string(n),
                     FunctionOracle::quadratic_l1(random_psd(n, rng), normal_vector(n, rng), 0.0, 0.7)});
  }

  Outcome o;
  double worst = -INFINITY;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Index n = cases[i].f.dimension();
    const ConstraintSet C = ConstraintSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
    for (double eps : {0.0, 0.1}) {
      const BoundsReport r = verify_subgradient_bounds(cases[i].f, C, eps, 1000, 100 + i, 1e-9);
      worst = std::max({worst, r.max_lower_excess, r.upper_pairs ? r.max_upper_excess : -INFINITY});
      if (!r.ok()) {
        o.pass = false;
        o.detail += cases[i].label + " eps=" + format_real(eps) + " failed; ";
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) o.pass = false;
  o.detail += std::to_string(cases.size()) + " functions x 1000 samples, worst excess " + format_real(worst) +
              ", " + format_real(std::round(elapsed * 100) / 100) + " s";
  return o;
}

Outcome inner_oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::vector<ConstraintSet> polytopes = {
      ConstraintSet::polytope((Matrix(2, 1) << 1, -1).finished(), (Vector(2) << 0.5, 1).finished()),
      ConstraintSet::polytope((Matrix(4, 2) << 1, 1, -1, 0, 0, -1, 1, -1).finished(),
                              (Vector(4) << 1, 0, 0, 0.5).finished()),
      ConstraintSet::polytope((Matrix(5, 3) << 1, 1, 1, -1, 0, 0, 0, -1, 0, 0, 0, -1, 1, -1, 0).finished(),
                              (Vector(5) << 1, 0, 0, 0, 0.25).finished()),
  };

  const double res = 1e-3;
  int instances = 0, diff_fail = 0, gap_fail = 0;
  double worst_slack = -INFINITY, worst_gap = 0.0;
  for (int s = 0; s < 200; ++s) {
    const int kind = s % 4;
    Index n = dim(rng);
    if (kind == 2 && n == 1) n = 2;  // a 1-D simplex is a single point
    ConstraintSet C = ConstraintSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
    if (kind == 0) {
      const Vector lo = -Vector::Constant(n, 0.2) - 0.8 * normal_vector(n, rng).cwiseAbs();
      C = ConstraintSet::box(lo, lo + Vector::Constant(n, 0.3) + normal_vector(n, rng).cwiseAbs());
    } else if (kind == 1) {
      C = ConstraintSet::ball(normal_vector(n, rng, 0.5), 0.3 + unit(rng));
    } else if (kind == 2) {
      C = ConstraintSet::simplex(n, 0.5 + unit(rng));
    } else {
      C = polytopes[static_cast<std::size_t>(n - 1)];
    }
    // A third of the anchors sit at a vertex or on the boundary.
    Vector anchor = unit(rng) < 1.0 / 3.0 ? linmin(C, normal_vector(n, rng)) : sample(C, rng);
    const double eta_max = n == 3 ? 0.08 : 0.5;
    const double eta = 0.02 + (eta_max - 0.02) * unit(rng);
    GeneratorSet G;
    const int m = count(rng);
    for (int j = 0; j < m; ++j) G.generators.push_back(normal_vector(n, rng));
    double gmax = 0.0;
    for (const Vector& g : G.generators) gmax = std::max(gmax, g.norm());

    const StepSet S{C, anchor, eta};
    const double tol = default_tol_inner(gmax, eta);
    InnerSolution exact;
    try {
      exact = solve_inner(G, S, tol);
    } catch (const InnerSolveFailure& e) {
      exact = e.best();
      std::cerr << "instance " << s << ": " << e.what() << " (kind " << to_string(C.kind()) << ", n=" << n
                << ", |G|=" << m << ", eta=" << format_real(eta) << ")\n";
    }
    const InnerSolution grid = brute_force_inner(G, S, res);
    const double slack = std::abs(exact.primal_value - grid.primal_value) - (res * gmax + tol);
    worst_slack = std::max(worst_slack, slack);
    worst_gap = std::max(worst_gap, exact.gap / tol);
    if (slack > 0.0) ++diff_fail;
    if (!(exact.gap <= tol)) ++gap_fail;
    ++instances;
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = diff_fail == 0 && gap_fail == 0 && elapsed < 60.0;
  o.detail = std::to_string(instances) + " instances, " + std::to_string(diff_fail) + " value mismatches, " +
             std::to_string(gap_fail) + " gaps above tol (worst gap/tol " + format_real(worst_gap) +
             ", worst slack " + format_real(worst_slack) + "), " + format_real(std::round(elapsed * 100) / 100) +
             " s";
  return o;
}

Outcome geometric_envelope() {
  const auto start = Clock::now();
  const ProblemSpec spec = load_problem(problem_path("quad_box"));
  const double delta0 = eval(spec.f, spec.x0) - spec.known_opt->f_star;
  ProblemSpec literal = spec;
  literal.run.schedule = "scsmooth";
  literal.run.D = delta0;
  literal.run.max_iter = 200;
  const NcsdConfig cfg = make_config(literal);
  const IterateTrace t = run(spec.f, spec.C, spec.x0, cfg);

  Outcome o;
  std::int64_t reached = -1, violations = 0;
  for (const TraceRecord& r : t.records) {
    const double gap = r.fx - spec.known_opt->f_star;
    if (gap > delta0 * std::pow(cfg.schedule.gamma, 2.0 * static_cast<double>(r.k)) + 1e-7) ++violations;
    if (gap < 1e-10) {
      reached = r.k;
      break;
    }
  }
  const double elapsed = seconds_since(start);
  const bool constants_ok = std::abs(cfg.schedule.gamma - std::sqrt(0.875)) < 1e-15 &&
                            std::abs(cfg.schedule.a - 0.25 * std::sqrt(2.0 * delta0)) < 1e-15;
  o.pass = constants_ok && violations == 0 && reached >= 0 && elapsed < 5.0;
  o.detail = "D=" + format_real(delta0) + " gamma=" + format_real(cfg.schedule.gamma) + " a=" +
             format_real(cfg.schedule.a) + ", gap < 1e-10 at k=" + std::to_string(reached) + ", " +
             std::to_string(violations) + " violations, " + format_real(std::round(elapsed * 1000) / 1000) + " s";
  return o;
}

Outcome halving_target() {
  const auto start = Clock::now();
  const ProblemSpec spec = load_problem(problem_path("l1_box2d"));
  ProblemSpec literal = spec;
  literal.run.schedule = "pwl";
  literal.run.target_eps = 0.01;
  literal.run.D.reset();
  NcsdConfig cfg = make_config(literal);
  const ScheduleHandle& s = cfg.schedule;
  const double L = constants(spec.f, spec.C).lipschitz;
  const double R = diameter(spec.C);
  const double c = compute_c(L, constants(spec.f, spec.C).weak_smooth, R, cfg.rho, cfg.tau);
  cfg.max_outer = s.t_dagger;
  const IterateTrace t = run(spec.f, spec.C, spec.x0, cfg);

  Outcome o;
  const std::int64_t stop = *s.stop_index();
  const bool constants_ok = std::abs(s.c - c) <= 1e-12 * c && std::abs(s.D - std::min(L * R, c)) <= 1e-12 * c;
  const bool reached_stop = t.records.back().k == stop && stop <= s.t_dagger;
  const double final_gap = t.records.back().fx - spec.known_opt->f_star;
  int boundary_fail = 0;
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    const double gap = t.records[static_cast<std::size_t>(s.phases[i].start)].fx - spec.known_opt->f_star;
    if (gap > s.D / std::pow(2.0, static_cast<double>(i)) + 1e-12) ++boundary_fail;
  }
  const double elapsed = seconds_since(start);
  o.pass = constants_ok && reached_stop && final_gap <= 0.01 && boundary_fail == 0 && elapsed < 60.0;
  o.detail = "c=" + format_real(s.c) + " D=" + format_real(s.D) + " m=" + std::to_string(s.phases.size()) +
             ", gap at S_m=" + std::to_string(stop) + " is " + format_real(final_gap) + " (T+=" +
             std::to_string(s.t_dagger) + "), " + std::to_string(boundary_fail) + " phase-boundary failures, " +
             format_real(std::round(elapsed * 100) / 100) + " s";
  return o;
}

Outcome inverse_square_envelope() {
  const auto start = Clock::now();
  const ProblemSpec spec = load_problem(problem_path("quad_l1_kink"));
  ProblemSpec literal = spec;
  literal.run.schedule = "sc";
  literal.run.practical = false;
  literal.run.max_iter = 10000;
  const NcsdConfig cfg = make_config(literal);
  const ScheduleHandle& s = cfg.schedule;
  const IterateTrace t = run(spec.f, spec.C, spec.x0, cfg);

  const FunctionConstants k = constants(spec.f, spec.C);
  const ScheduleHandle expected = make_strongly_convex(k.strong_convex, k.weak_smooth, k.lipschitz, cfg.rho,
                                                       cfg.tau, k.lipschitz * diameter(spec.C));
  std::int64_t violations = 0, increases = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& r = t.records[i];
    const double gap = r.fx - spec.known_opt->f_star;
    if (r.k >= 1 && gap > s.a * s.L / static_cast<double>(r.k * r.k)) ++violations;
    if (i > 0 && r.fx > t.records[i - 1].fx) ++increases;
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = s.a == expected.a && s.c == expected.c && t.records.back().k == 10000 && violations == 0 &&
           increases == 0 && elapsed < 120.0;
  o.detail = "a=" + format_real(s.a) + " c=" + format_real(s.c) + " L=" + format_real(s.L) + ", k=1.." +
             std::to_string(t.records.back().k) + ": " + std::to_string(violations) + " violations, " +
             std::to_string(increases) + " increases, final gap " +
             format_real(t.records.back().fx - spec.known_opt->f_star) + ", " +
             format_real(std::round(elapsed * 100) / 100) + " s";
  return o;
}

struct SuiteAudit {
  std::vector<std::pair<std::string, AuditReport>> runs;
  std::int64_t stalled = 0;
  std::string errors;
};

// Every bundled problem under its own schedule and under a fixed schedule
// (which is where most stalls happen).
SuiteAudit audit_suite() {
  SuiteAudit out;
  for (const ProblemSpec& spec : load_suite(NCSD_PROBLEM_DIR)) {
    for (const std::string schedule : {"", "fixed"}) {
      ProblemSpec variant = spec;
      if (!schedule.empty()) variant.run.schedule = schedule;
      const std::string label = spec.name + (schedule.empty() ? "" : "/" + schedule);
      try {
        const NcsdConfig cfg = make_config(variant);
        const IterateTrace t = run(spec.f, spec.C, spec.x0, cfg);
        for (const TraceRecord& r : t.records) out.stalled += r.has_step && r.stalled;
        out.runs.emplace_back(label, audit_trace(t, spec.f, spec.C, spec.known_opt));
      } catch (const std::exception& e) {
        out.errors += label + ": " + e.what() + "; ";
      }
    }
  }
  return out;
}

Outcome audit_checks(const SuiteAudit& suite, const std::vector<std::string>& checks, bool need_stalls) {
  Outcome o;
  o.pass = suite.errors.empty();
  std::string counts;
  for (const std::string& check : checks) {
    std::int64_t applied = 0, failed = 0;
    for (const auto& [label, report] : suite.runs) {
      applied += report.applied_count(check);
      for (const AuditFinding& f : report.findings) {
        if (f.check != check) continue;
        ++failed;
        if (failed <= 3) {
          o.detail += label + " " + check + " k=" + std::to_string(f.k) + " " + format_real(f.lhs) + " > " +
                      format_real(f.rhs) + "; ";
        }
      }
    }
    if (failed > 0 || applied == 0) o.pass = false;
    counts += check + " " + std::to_string(applied - failed) + "/" + std::to_string(applied) + " ";
  }
  if (need_stalls && suite.stalled == 0) o.pass = false;
  o.detail += suite.errors + counts + "over " + std::to_string(suite.runs.size()) + " runs";
  if (need_stalls) o.detail += " (" + std::to_string(suite.stalled) + " stalled iterations)";
  return o;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome bench_determinism() {
  const fs::path root = fs::temp_directory_path() / "ncsd_acceptance_bench";
  fs::remove_all(root);
  Outcome o;
  for (const std::string jobs : {"1", "4"}) {
    const std::string out = (root / ("jobs" + jobs)).string();
    const char* argv[] = {"ncsd", "bench", "--suite", NCSD_PROBLEM_DIR, "--out", out.c_str(), "--jobs", jobs.c_str()};
    std::ostringstream sink;
    const int code = run_cli(8, argv, sink, sink);
    if (code != kExitOk) {
      o.pass = false;
      o.detail += "bench --jobs " + jobs + " exited " + std::to_string(code) + "; ";
    }
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(root / "jobs1")) {
    const fs::path other = root / "jobs4" / entry.path().filename();
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
    ++compared;
  }
  std::size_t in_four = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(root / "jobs4")) ++in_four;
  if (differing > 0 || compared != in_four || compared == 0) o.pass = false;
  o.detail += std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ";
  fs::remove_all(root);
  return o;
}

template <typename F>
void guarded(int criterion, F&& check) {
  try {
    report(criterion, check());
  } catch (const std::exception& e) {
    report(criterion, {false, std::string("exception: ") + e.what()});
  }
}

}  // namespace

int main() {
  guarded(1, subgradient_bounds);
  guarded(2, inner_oracle_equivalence);
  guarded(3, geometric_envelope);
  guarded(4, halving_target);
  guarded(5, inverse_square_envelope);
  SuiteAudit suite;
  try {
    suite = audit_suite();
  } catch (const std::exception& e) {
    suite.errors = e.what();
  }
  guarded(6, [&] { return audit_checks(suite, {"stall_gap", "ls_cap"}, true); });
  guarded(7, [&] { return audit_checks(suite, {"descent_far", "step_far", "descent_near", "step_near"}, false); });
  guarded(8, bench_determinism);
  return failures == 0 ? 0 : 1;
}
