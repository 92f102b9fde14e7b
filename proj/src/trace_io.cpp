#include "ncsd/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncsd/format.hpp"

namespace ncsd {
namespace {

std::map<std::string, std::string> parse_fields(const std::string& text, const std::string& where) {
  std::map<std::string, std::string> fields;
  std::istringstream words(text);
  std::string word;
  while (words >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(where, "expected key=value, got '" + word + "'");
    fields[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return fields;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename Int>
Int parse_int(const std::string& text, const std::string& where) {
  Int value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw ParseError(where, "expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_cell(const std::string& text, const std::string& where) {
  const auto value = parse_real(text);
  if (!value) throw ParseError(where, "expected a number, got '" + text + "'");
  return *value;
}

const std::string& lookup(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw ParseError("config", "missing field '" + key + "'");
  return it->second;
}

}  // namespace

void write_trace_csv(std::ostream& out, const IterateTrace& trace, const NcsdConfig& cfg, bool timing) {
  out << "# schedule: " << trace.schedule.describe() << '\n';
  out << "# config: rho=" << format_real(cfg.rho) << " tau=" << format_real(cfg.tau)
      << " tol_inner=" << (cfg.tol_inner ? format_real(*cfg.tol_inner) : std::string("auto"))
      << " max_outer=" << cfg.max_outer << " max_line_search=" << cfg.max_line_search << '\n';
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.k << ',' << format_real(r.fx) << ',' << format_real(r.eta) << ',' << format_real(r.eps) << ','
        << format_real(r.gtd) << ',' << format_real(r.lambda) << ',' << r.ls_iters << ','
        << format_real(r.inner_gap) << ',' << (r.stalled ? 1 : 0) << ',' << (timing ? r.wall_ns : 0) << '\n';
  }
}

ParsedTrace read_trace_csv(std::istream& in) {
  ParsedTrace parsed;
  std::string line;
  int number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# schedule:", 0) == 0) {
      parsed.schedule = parse_fields(line.substr(11), where);
      continue;
    }
    if (line.rfind("# config:", 0) == 0) {
      parsed.config = parse_fields(line.substr(9), where);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != kTraceHeader) throw ParseError(where, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 10) throw ParseError(where, "expected 10 columns");
    TraceRecord r;
    r.k = parse_int<std::int64_t>(cells[0], where);
    r.fx = parse_cell(cells[1], where);
    r.eta = parse_cell(cells[2], where);
    r.eps = parse_cell(cells[3], where);
    r.gtd = parse_cell(cells[4], where);
    r.lambda = parse_cell(cells[5], where);
    r.ls_iters = parse_int<int>(cells[6], where);
    r.inner_gap = parse_cell(cells[7], where);
    if (cells[8] != "0" && cells[8] != "1") throw ParseError(where, "stalled must be 0 or 1");
    r.stalled = cells[8] == "1";
    r.wall_ns = parse_int<std::int64_t>(cells[9], where);
    r.has_step = !std::isnan(r.gtd);
    parsed.records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("line " + std::to_string(number), "missing CSV header");
  return parsed;
}

NcsdConfig config_from_trace(const ParsedTrace& parsed) {
  NcsdConfig cfg;
  cfg.rho = parse_cell(lookup(parsed.config, "rho"), "config/rho");
  cfg.tau = parse_cell(lookup(parsed.config, "tau"), "config/tau");
  const std::string& tol = lookup(parsed.config, "tol_inner");
  if (tol != "auto") cfg.tol_inner = parse_cell(tol, "config/tol_inner");
  cfg.max_outer = parse_int<std::int64_t>(lookup(parsed.config, "max_outer"), "config/max_outer");
  cfg.max_line_search = parse_int<int>(lookup(parsed.config, "max_line_search"), "config/max_line_search");
  cfg.schedule = schedule_from_description(parsed.schedule);
  return cfg;
}

void write_baseline_csv(std::ostream& out, const BaselineTrace& trace) {
  out << "k,fx,best_fx\n";
  for (const BaselineRecord& r : trace.records) {
    out << r.k << ',' << format_real(r.fx) << ',' << format_real(r.best_fx) << '\n';
  }
}

}  // namespace ncsd
