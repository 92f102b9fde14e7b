#include "ncsd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ncsd/audit.hpp"
#include "ncsd/experiment.hpp"
#include "ncsd/format.hpp"
#include "ncsd/trace_io.hpp"

namespace ncsd {
namespace {

namespace fs = std::filesystem;

struct SolveArgs {
  std::string problem;
  std::string schedule;
  std::optional<std::int64_t> max_iter;
  std::string out;
  std::optional<double> rho, tau, tol_inner, eta, eps, target_eps, D;
  std::uint64_t seed = 0;
  bool timing = false;
};

struct VerifyArgs {
  std::string problem;
  std::string trace;
};

struct BenchArgs {
  std::string suite;
  std::string out;
  int jobs = 1;
  bool timing = false;
};

struct BoundsArgs {
  std::string problem;
  double eps = 0.0;
  std::int64_t samples = 1000;
  std::uint64_t seed = 0;
};

void print_findings(std::ostream& out, const AuditReport& audit) {
  for (const AuditFinding& f : audit.findings) {
    out << "  " << f.check << " failed at k=" << f.k << ": " << format_real(f.lhs) << " > " << format_real(f.rhs)
        << '\n';
  }
}

void print_envelope(std::ostream& out, const RunReport& report) {
  out << "envelope: " << (report.ok() ? "ok" : "VIOLATED") << " (" << report.checked << " checks, fitted rate "
      << format_real(report.fitted_rate) << ")\n";
  for (const EnvelopeViolation& v : report.violations) {
    out << "  k=" << v.k << " gap " << format_real(v.observed) << " > bound " << format_real(v.bound) << '\n';
  }
}

bool has_envelope(const ScheduleHandle& s) { return !s.practical && s.kind != ScheduleKind::fixed; }

int solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  ProblemSpec spec = load_problem(a.problem);
  if (!a.schedule.empty()) spec.run.schedule = a.schedule;
  if (a.max_iter) spec.run.max_iter = *a.max_iter;
  if (a.rho) spec.run.rho = *a.rho;
  if (a.tau) spec.run.tau = *a.tau;
  if (a.tol_inner) spec.run.tol_inner = a.tol_inner;
  if (a.eta) spec.run.eta = a.eta;
  if (a.eps) spec.run.eps = a.eps;
  if (a.target_eps) spec.run.target_eps = a.target_eps;
  if (a.D) spec.run.D = a.D;
  const NcsdConfig cfg = make_config(spec);

  fs::create_directories(a.out);
  const fs::path trace_path = fs::path(a.out) / (spec.name + ".ncsd.csv");
  auto save = [&](const IterateTrace& trace) {
    std::ofstream file(trace_path, std::ios::binary | std::ios::trunc);
    write_trace_csv(file, trace, cfg, a.timing);
    if (!file) throw ValidationError(trace_path.string(), "cannot write trace");
  };

  IterateTrace trace;
  try {
    trace = run(spec.f, spec.C, spec.x0, cfg);
  } catch (const RunFailure& e) {
    save(e.trace());
    err << "error: " << e.what() << "\npartial trace written to " << trace_path.string() << '\n';
    return kExitNumeric;
  }
  save(trace);

  const TraceRecord& last = trace.records.back();
  out << spec.name << ": " << (trace.records.size() - 1) << " iterations, f = " << format_real(last.fx);
  if (spec.known_opt) out << ", gap = " << format_real(last.fx - spec.known_opt->f_star);
  out << "\ntrace: " << trace_path.string() << '\n';

  const AuditReport audit = audit_trace(trace, spec.f, spec.C, spec.known_opt);
  if (!audit.ok()) {
    out << "audit warnings:\n";
    print_findings(out, audit);
  }
  if (spec.known_opt && has_envelope(cfg.schedule)) {
    const RunReport report = verify_envelope(trace, spec);
    print_envelope(out, report);
    if (!report.ok()) return kExitViolation;
  }
  return kExitOk;
}

bool same_row(const TraceRecord& a, const TraceRecord& b) {
  return a.k == b.k && format_real(a.fx) == format_real(b.fx) && format_real(a.eta) == format_real(b.eta) &&
         format_real(a.eps) == format_real(b.eps) && format_real(a.gtd) == format_real(b.gtd) &&
         format_real(a.lambda) == format_real(b.lambda) && a.ls_iters == b.ls_iters &&
         format_real(a.inner_gap) == format_real(b.inner_gap) && a.stalled == b.stalled;
}

int verify(const VerifyArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.problem);
  std::ifstream file(a.trace, std::ios::binary);
  if (!file) throw ValidationError(a.trace, "cannot open trace file");
  ParsedTrace parsed;
  try {
    parsed = read_trace_csv(file);
  } catch (const ParseError& e) {
    throw ParseError(a.trace + ":" + e.path(), e.what());
  }
  const NcsdConfig cfg = config_from_trace(parsed);

  bool ok = true;
  // Armijo and monotonicity straight from the file.
  for (std::size_t i = 0; i + 1 < parsed.records.size(); ++i) {
    const TraceRecord& r = parsed.records[i];
    const TraceRecord& next = parsed.records[i + 1];
    if (next.fx > r.fx) {
      out << "k=" << r.k << ": objective increased\n";
      ok = false;
    }
    if (r.has_step && !r.stalled && next.fx > r.fx + cfg.rho * r.lambda * r.gtd + 1e-12) {
      out << "k=" << r.k << ": sufficient-decrease test fails\n";
      ok = false;
    }
  }

  // Replay for the iterates themselves, which the file does not store.
  IterateTrace replay;
  try {
    replay = run(spec.f, spec.C, spec.x0, cfg);
  } catch (const RunFailure& e) {
    replay = e.trace();
  }
  if (replay.records.size() != parsed.records.size()) {
    out << "replay has " << replay.records.size() << " records, file has " << parsed.records.size() << '\n';
    ok = false;
  } else {
    for (std::size_t i = 0; i < replay.records.size(); ++i) {
      if (!same_row(replay.records[i], parsed.records[i])) {
        out << "replay differs from the file at k=" << parsed.records[i].k << '\n';
        ok = false;
        break;
      }
    }
  }

  const AuditReport audit = audit_trace(replay, spec.f, spec.C, spec.known_opt);
  if (!audit.ok()) {
    out << "audit failures:\n";
    print_findings(out, audit);
    ok = false;
  }
  if (spec.known_opt && has_envelope(cfg.schedule)) {
    IterateTrace from_file;
    from_file.records = parsed.records;
    from_file.schedule = cfg.schedule;
    const RunReport report = verify_envelope(from_file, spec);
    print_envelope(out, report);
    ok = ok && report.ok();
  }
  out << (ok ? "trace verified" : "trace FAILED verification") << " (" << parsed.records.size() << " records)\n";
  return ok ? kExitOk : kExitViolation;
}

int bench(const BenchArgs& a, std::ostream& out) {
  const std::vector<ProblemSpec> specs = load_suite(a.suite);
  const auto results = run_experiment(specs, ExperimentOptions{a.out, a.jobs, a.timing});
  bool failed = false;
  bool violated = false;
  for (const ExperimentResult& r : results) {
    for (const MethodResult& m : r.methods) {
      out << r.problem << ' ' << m.method << ": " << m.iters << " iterations, gap " << format_real(m.final_gap);
      if (!m.error.empty()) {
        out << " (error: " << m.error << ")";
        failed = true;
      }
      out << '\n';
    }
    if (r.envelope && !r.envelope->ok()) {
      out << r.problem << ": envelope violated\n";
      violated = true;
    }
  }
  out << "summary: " << (fs::path(a.out) / "summary.csv").string() << '\n';
  if (violated) return kExitViolation;
  return failed ? kExitNumeric : kExitOk;
}

int check_bounds(const BoundsArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.problem);
  const BoundsReport report = verify_subgradient_bounds(spec.f, spec.C, a.eps, a.samples, a.seed);
  out << spec.name << ": lower bound " << report.lower_pairs << " pairs, max excess "
      << format_real(report.max_lower_excess) << "; upper bound " << report.upper_pairs << " pairs, max excess "
      << format_real(report.max_upper_excess) << '\n';
  for (const BoundWitness& w : report.violations) {
    out << "  " << w.bound << " bound fails by " << format_real(w.excess) << " at x = [";
    for (Index i = 0; i < w.x.size(); ++i) out << (i ? ", " : "") << format_real(w.x[i]);
    out << "], y = [";
    for (Index i = 0; i < w.y.size(); ++i) out << (i ? ", " : "") << format_real(w.y[i]);
    out << "]\n";
  }
  return report.ok() ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Norm-constrained subgradient descent: solve, verify and benchmark"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Run the solver on one problem and write its trace");
  solve_cmd->add_option("--problem", solve_args.problem, "Problem file (JSON)")->required();
  solve_cmd->add_option("--schedule", solve_args.schedule, "Step-size schedule")
      ->check(CLI::IsMember({"fixed", "pwl", "sc", "scsmooth", "auto"}));
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "Iteration cap");
  solve_cmd->add_option("--out", solve_args.out, "Output directory")->required();
  solve_cmd->add_option("--rho", solve_args.rho, "Sufficient-decrease parameter");
  solve_cmd->add_option("--tau", solve_args.tau, "Backtracking factor");
  solve_cmd->add_option("--tol-inner", solve_args.tol_inner, "Inner duality-gap tolerance");
  solve_cmd->add_option("--eta", solve_args.eta, "Step radius (fixed schedule)");
  solve_cmd->add_option("--eps", solve_args.eps, "Relaxation radius (fixed schedule)");
  solve_cmd->add_option("--target-eps", solve_args.target_eps, "Target gap (pwl schedule)");
  solve_cmd->add_option("--D", solve_args.D, "Initial-gap bound");
  solve_cmd->add_option("--seed", solve_args.seed, "Accepted for symmetry with other commands; runs are deterministic");
  solve_cmd->add_flag("--timing", solve_args.timing, "Record wall-clock times in the trace");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Re-check a trace file against its problem");
  verify_cmd->add_option("--problem", verify_args.problem, "Problem file (JSON)")->required();
  verify_cmd->add_option("--trace", verify_args.trace, "Trace CSV written by solve or bench")->required();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver and baselines on every problem of a directory");
  bench_cmd->add_option("--suite", bench_args.suite, "Directory of problem files")->required();
  bench_cmd->add_option("--out", bench_args.out, "Output directory")->required();
  bench_cmd->add_option("--jobs", bench_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--timing", bench_args.timing, "Record wall-clock times");

  BoundsArgs bounds_args;
  auto* bounds_cmd = app.add_subcommand("check-bounds", "Sample the subgradient lower/upper bounds");
  bounds_cmd->add_option("--problem", bounds_args.problem, "Problem file (JSON)")->required();
  bounds_cmd->add_option("--eps", bounds_args.eps, "Relaxation radius")->required()->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--samples", bounds_args.samples, "Number of sampled pairs")->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--seed", bounds_args.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve_cmd) return solve(solve_args, out, err);
    if (*verify_cmd) return verify(verify_args, out);
    if (*bench_cmd) return bench(bench_args, out);
    return check_bounds(bounds_args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace ncsd
