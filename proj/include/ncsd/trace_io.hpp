#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ncsd/baselines.hpp"
#include "ncsd/ncsd.hpp"

namespace ncsd {

inline constexpr const char* kTraceHeader = "k,fx,eta,eps,gtd,lambda,ls_iters,inner_gap,stalled,wall_ns";

/// Two comment lines ("# schedule: ..." and "# config: ...") followed by the
/// CSV header and one row per record. wall_ns is written as 0 unless
/// `timing` is set, so that identical runs produce identical files.
void write_trace_csv(std::ostream& out, const IterateTrace& trace, const NcsdConfig& cfg, bool timing);

struct ParsedTrace {
  std::map<std::string, std::string> schedule;
  std::map<std::string, std::string> config;
  /// Only the serialized fields are filled in.
  std::vector<TraceRecord> records;
};

/// Throws ParseError with "line N" as the path on malformed input.
ParsedTrace read_trace_csv(std::istream& in);

/// Rebuilds the solver configuration from the comment lines.
NcsdConfig config_from_trace(const ParsedTrace& parsed);

/// "k,fx,best_fx" rows.
void write_baseline_csv(std::ostream& out, const BaselineTrace& trace);

}  // namespace ncsd
