#include "ncsd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "ncsd/baselines.hpp"
#include "ncsd/format.hpp"
#include "ncsd/trace_io.hpp"

namespace ncsd {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

double gap_of(const ProblemSpec& spec, double fx) { return spec.known_opt ? fx - spec.known_opt->f_star : kNaN; }

bool has_envelope(const ScheduleHandle& s) {
  return !s.practical && s.kind != ScheduleKind::fixed;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

MethodResult run_baseline(const std::string& method, const ProblemSpec& spec, std::int64_t steps,
                          const ExperimentOptions& options) {
  MethodResult m;
  m.method = method;
  const auto started = Clock::now();
  try {
    BaselineTrace trace;
    if (method == "subgradient") {
      const double c0 = spec.run.subgradient_step.value_or(diameter(spec.C) / constants(spec.f, spec.C).lipschitz);
      trace = projected_subgradient(spec.f, spec.C, spec.x0, steps, diminishing_steps(c0));
    } else {
      trace = frank_wolfe(spec.f, spec.C, spec.x0, steps);
    }
    m.wall_ns = elapsed_ns(started);
    m.iters = static_cast<std::int64_t>(trace.records.size()) - 1;
    m.final_fx = trace.records.back().best_fx;
    m.final_gap = gap_of(spec, m.final_fx);
    if (!options.out_dir.empty()) {
      std::ostringstream csv;
      write_baseline_csv(csv, trace);
      write_file(fs::path(options.out_dir) / (spec.name + "." + method + ".csv"), csv.str());
    }
  } catch (const std::exception& e) {
    m.wall_ns = elapsed_ns(started);
    m.final_fx = kNaN;
    m.final_gap = kNaN;
    m.error = e.what();
  }
  return m;
}

ExperimentResult run_one(const ProblemSpec& spec, const ExperimentOptions& options) {
  ExperimentResult result;
  result.problem = spec.name;

  MethodResult m;
  m.method = "ncsd";
  IterateTrace trace;
  NcsdConfig cfg;
  bool have_trace = false;
  const auto started = Clock::now();
  try {
    cfg = make_config(spec);
    trace = run(spec.f, spec.C, spec.x0, cfg);
    have_trace = true;
  } catch (const RunFailure& e) {
    trace = e.trace();
    have_trace = true;
    m.error = e.what();
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  m.wall_ns = elapsed_ns(started);

  std::int64_t steps = 0;
  if (have_trace) {
    steps = static_cast<std::int64_t>(trace.records.size()) - 1;
    m.iters = steps;
    m.final_fx = trace.records.back().fx;
    m.final_gap = gap_of(spec, m.final_fx);
    if (spec.known_opt && has_envelope(trace.schedule)) result.envelope = verify_envelope(trace, spec);
    result.audit = audit_trace(trace, spec.f, spec.C, spec.known_opt);
    if (!options.out_dir.empty()) {
      std::ostringstream csv;
      write_trace_csv(csv, trace, cfg, options.timing);
      write_file(fs::path(options.out_dir) / (spec.name + ".ncsd.csv"), csv.str());
    }
  } else {
    m.final_fx = kNaN;
    m.final_gap = kNaN;
  }
  result.methods.push_back(std::move(m));
  result.methods.push_back(run_baseline("subgradient", spec, steps, options));
  result.methods.push_back(run_baseline("frank_wolfe", spec, steps, options));
  return result;
}

std::string summary_csv(const std::vector<ExperimentResult>& results, bool timing) {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const ExperimentResult& r : results) {
    for (const MethodResult& m : r.methods) {
      std::string envelope = "na";
      if (!m.error.empty()) {
        envelope = "error";
      } else if (m.method == "ncsd" && r.envelope) {
        envelope = r.envelope->ok() ? "1" : "0";
      }
      out << r.problem << ',' << m.method << ',' << m.iters << ',' << format_real(m.final_gap) << ','
          << (timing ? m.wall_ns : 0) << ',' << envelope << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::vector<ExperimentResult> run_experiment(const std::vector<ProblemSpec>& specs, const ExperimentOptions& options) {
  if (options.jobs < 1) throw ContractViolation("run_experiment: jobs must be >= 1");
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  std::vector<ExperimentResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) results[i] = run_one(specs[i], options);
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.jobs), specs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (!options.out_dir.empty()) write_file(fs::path(options.out_dir) / "summary.csv", summary_csv(results, options.timing));
  return results;
}

std::vector<ProblemSpec> load_suite(const std::string& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw ValidationError(dir, "cannot read suite directory: " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<ProblemSpec> specs;
  std::set<std::string> names;
  for (const fs::path& file : files) {
    specs.push_back(load_problem(file.string()));
    if (!names.insert(specs.back().name).second) {
      throw ValidationError(file.string() + ":/name", "duplicate problem name '" + specs.back().name + "'");
    }
  }
  return specs;
}

}  // namespace ncsd
