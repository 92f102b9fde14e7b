#include "ncsd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ncsd/errors.hpp"
#include "ncsd/format.hpp"
#include "ncsd/model.hpp"

namespace ncsd {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ContractViolation(message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void require_line_search(double rho, double tau) {
  require(rho > 0.0 && rho < 1.0 && tau > 0.0 && tau < 1.0, "schedule: rho and tau must lie in (0, 1)");
}

double phase_gap(double D, int i) { return (1.0 - 2.0 / std::numbers::e) * D / std::ldexp(1.0, i); }

ScheduleHandle build_pwl(double D, double c, double L, double target_eps) {
  require(positive(D) && positive(c) && positive(L) && positive(target_eps),
          "pwl_halving: D, c, L and target_eps must be positive");
  ScheduleHandle s;
  s.kind = ScheduleKind::pwl_halving;
  s.D = D;
  s.c = c;
  s.L = L;
  s.target_eps = target_eps;

  int m = 0;
  while (D / std::ldexp(1.0, m) > target_eps) ++m;
  std::int64_t start = 0;
  for (int i = 0; i < m; ++i) {
    const double eps_bar = phase_gap(D, i);
    const auto length = static_cast<std::int64_t>(std::ceil(c / eps_bar));
    s.phases.push_back({eps_bar, start, length, eps_bar / L, eps_bar / (4.0 * L)});
    start += length;
  }
  const double e = std::numbers::e;
  s.t_dagger = static_cast<std::int64_t>(std::ceil(2.0 * c * e / ((e - 2.0) * target_eps))) + m;
  return s;
}

std::string field(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw ValidationError(key, "missing schedule field");
  return it->second;
}

double real_field(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto value = parse_real(field(fields, key));
  if (!value) throw ValidationError(key, "schedule field is not a number");
  return *value;
}

}  // namespace

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::fixed: return "fixed";
    case ScheduleKind::pwl_halving: return "pwl_halving";
    case ScheduleKind::strongly_convex: return "strongly_convex";
    case ScheduleKind::sc_smooth: return "sc_smooth";
  }
  return "unknown";
}

StepSizes ScheduleHandle::at(std::int64_t k) const {
  require(k >= 0, "schedule: k must be >= 0");
  switch (kind) {
    case ScheduleKind::fixed: return {eta, eps};
    case ScheduleKind::pwl_halving: {
      if (phases.empty()) {
        const double eps_bar = phase_gap(D, 0);
        return {eps_bar / L, eps_bar / (4.0 * L)};
      }
      for (const PwlPhase& p : phases) {
        if (k < p.start + p.length) return {p.eta, p.eps};
      }
      return {phases.back().eta, phases.back().eps};
    }
    case ScheduleKind::strongly_convex: {
      const double k1 = static_cast<double>(k + 1);
      const double kk = static_cast<double>(std::max<std::int64_t>(k, 1));
      return {a / (k1 * k1), a / (8.0 * kk * kk)};
    }
    case ScheduleKind::sc_smooth: return {a * std::pow(gamma, static_cast<double>(k)), 0.0};
  }
  return {eta, eps};
}

std::optional<std::int64_t> ScheduleHandle::stop_index() const {
  if (kind != ScheduleKind::pwl_halving) return std::nullopt;
  return phases.empty() ? 0 : phases.back().start + phases.back().length;
}

std::optional<double> ScheduleHandle::envelope(std::int64_t k) const {
  if (practical) return std::nullopt;
  switch (kind) {
    case ScheduleKind::fixed: return std::nullopt;
    case ScheduleKind::pwl_halving: {
      if (k >= *stop_index()) return std::min(target_eps, D);
      for (std::size_t i = 0; i < phases.size(); ++i) {
        if (phases[i].start == k) return D / std::ldexp(1.0, static_cast<int>(i));
      }
      return std::nullopt;
    }
    case ScheduleKind::strongly_convex: {
      if (k < 1) return std::nullopt;
      const double kd = static_cast<double>(k);
      return a * L / (kd * kd);
    }
    case ScheduleKind::sc_smooth: return D * std::pow(gamma, 2.0 * static_cast<double>(k));
  }
  return std::nullopt;
}

std::string ScheduleHandle::describe() const {
  std::ostringstream out;
  out << "kind=" << to_string(kind) << " a=" << format_real(a) << " c=" << format_real(c)
      << " gamma=" << format_real(gamma) << " D=" << format_real(D) << " L=" << format_real(L)
      << " target=" << format_real(target_eps) << " eta=" << format_real(eta) << " eps=" << format_real(eps)
      << " practical=" << (practical ? 1 : 0);
  return out.str();
}

double compute_c(double L, double beta, double R, double rho, double tau) {
  require(positive(L) && positive(R), "compute_c: L and R must be positive");
  require(beta >= 0.0, "compute_c: beta must be >= 0");
  require_line_search(rho, tau);
  return std::max(4.0 * L, effective_beta(beta) * R / (1.0 - rho)) * R / (rho * tau);
}

ScheduleHandle make_fixed(double eta, double eps) {
  require(positive(eta), "fixed schedule: eta must be positive");
  require(std::isfinite(eps) && eps >= 0.0, "fixed schedule: eps must be >= 0");
  ScheduleHandle s;
  s.eta = eta;
  s.eps = eps;
  return s;
}

ScheduleHandle make_pwl_halving(double D, double c, double L, double target_eps) {
  require(D <= c, "pwl_halving: D must not exceed c");
  return build_pwl(D, c, L, target_eps);
}

ScheduleHandle make_strongly_convex(double alpha, double beta, double L, double rho, double tau, double D) {
  require(positive(alpha), "strongly_convex: alpha must be positive");
  require(positive(L) && positive(D), "strongly_convex: L and D must be positive");
  require_line_search(rho, tau);
  ScheduleHandle s;
  s.kind = ScheduleKind::strongly_convex;
  s.L = L;
  s.D = D;
  s.c = std::min(0.125, 5.0 * alpha * (1.0 - rho) / (16.0 * effective_beta(beta)));
  const double base = 5.4 / (rho * tau * s.c);
  s.a = std::max(base * base * L / (2.0 * alpha), 9.0 * D / L);
  return s;
}

ScheduleHandle make_sc_smooth(double alpha, double beta, double rho, double tau, double D) {
  require(positive(alpha) && positive(beta), "sc_smooth: alpha and beta must be positive");
  require(alpha <= beta, "sc_smooth: alpha must not exceed beta");
  require(positive(D), "sc_smooth: D must be positive");
  require_line_search(rho, tau);
  ScheduleHandle s;
  s.kind = ScheduleKind::sc_smooth;
  s.D = D;
  s.a = tau * (1.0 - rho) * std::sqrt(2.0 * alpha * D) / beta;
  s.gamma = std::sqrt(1.0 - tau * rho * (1.0 - rho) * alpha / beta);
  return s;
}

ScheduleHandle make_practical_pwl(double D, double c, double L, double target_eps) {
  ScheduleHandle s = build_pwl(D, c, L, target_eps);
  s.practical = true;
  return s;
}

ScheduleHandle make_practical_strongly_convex(double a) {
  require(positive(a), "strongly_convex: a must be positive");
  ScheduleHandle s;
  s.kind = ScheduleKind::strongly_convex;
  s.practical = true;
  s.a = a;
  return s;
}

ScheduleHandle make_practical_sc_smooth(double a, double gamma) {
  require(positive(a), "sc_smooth: a must be positive");
  require(gamma > 0.0 && gamma < 1.0, "sc_smooth: gamma must lie in (0, 1)");
  ScheduleHandle s;
  s.kind = ScheduleKind::sc_smooth;
  s.practical = true;
  s.a = a;
  s.gamma = gamma;
  return s;
}

std::int64_t iterations_to_reach(const ScheduleHandle& schedule, double eps) {
  require(schedule.kind == ScheduleKind::sc_smooth && !schedule.practical,
          "iterations_to_reach: needs a theoretical sc_smooth schedule");
  require(positive(eps), "iterations_to_reach: eps must be positive");
  if (schedule.D <= eps) return 0;
  const double k = (std::log(schedule.D) - std::log(eps)) / (2.0 * std::log(1.0 / schedule.gamma));
  return static_cast<std::int64_t>(std::ceil(k));
}

ScheduleHandle schedule_from_description(const std::map<std::string, std::string>& fields) {
  const std::string kind = field(fields, "kind");
  const bool practical = field(fields, "practical") == "1";
  const double a = real_field(fields, "a");
  const double c = real_field(fields, "c");
  const double gamma = real_field(fields, "gamma");
  const double D = real_field(fields, "D");
  const double L = real_field(fields, "L");
  const double target = real_field(fields, "target");
  try {
    if (kind == "fixed") return make_fixed(real_field(fields, "eta"), real_field(fields, "eps"));
    if (kind == "pwl_halving") return practical ? make_practical_pwl(D, c, L, target) : make_pwl_halving(D, c, L, target);
    ScheduleHandle s;
    if (kind == "strongly_convex") {
      s = make_practical_strongly_convex(a);
      s.L = L;
      s.D = D;
      s.c = c;
    } else if (kind == "sc_smooth") {
      s = make_practical_sc_smooth(a, gamma);
      s.D = D;
    } else {
      throw ValidationError("kind", "unknown schedule kind '" + kind + "'");
    }
    s.practical = practical;
    return s;
  } catch (const ContractViolation& e) {
    throw ValidationError("schedule", e.what());
  }
}

}  // namespace ncsd
