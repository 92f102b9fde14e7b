#include "ncsd/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ncsd {
namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& message) { throw ParseError(path, message); }

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) schema_error(path + "/" + key, "unknown field");
  }
}

const json& object_at(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) schema_error(path + "/" + key, "missing required field");
  const json& v = parent.at(key);
  if (!v.is_object()) schema_error(path + "/" + key, "expected an object");
  return v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(path, "expected a finite number");
  return x;
}

double number_at(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) schema_error(path + "/" + key, "missing required field");
  return number(parent.at(key), path + "/" + key);
}

std::optional<double> optional_number(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) return std::nullopt;
  return number(parent.at(key), path + "/" + key);
}

Vector vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected a nonempty array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = number(v[i], path + "/" + std::to_string(i));
  return out;
}

Vector vector_at(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) schema_error(path + "/" + key, "missing required field");
  return vector(parent.at(key), path + "/" + key);
}

Matrix matrix_at(const json& parent, const std::string& key, const std::string& path) {
  const std::string here = path + "/" + key;
  if (!parent.contains(key)) schema_error(here, "missing required field");
  const json& v = parent.at(key);
  if (!v.is_array() || v.empty()) schema_error(here, "expected a nonempty array of rows");
  const Vector first = vector(v[0], here + "/0");
  Matrix out(static_cast<Index>(v.size()), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vector row = vector(v[i], here + "/" + std::to_string(i));
    if (row.size() != first.size()) schema_error(here + "/" + std::to_string(i), "rows must have equal length");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

std::string string_at(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) schema_error(path + "/" + key, "missing required field");
  const json& v = parent.at(key);
  if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

template <typename Build>
auto validated(const std::string& path, Build&& build) {
  try {
    return build();
  } catch (const ContractViolation& e) {
    throw ValidationError(path, e.what());
  }
}

FunctionOracle parse_function(const json& doc) {
  const std::string path = "/function";
  const json& fn = object_at(doc, "function", "");
  const std::string kind = string_at(fn, "kind", path);
  if (kind == "max_affine") {
    reject_unknown(fn, path, {"kind", "slopes", "offsets"});
    Matrix slopes = matrix_at(fn, "slopes", path);
    Vector offsets = vector_at(fn, "offsets", path);
    return validated(path, [&] { return FunctionOracle::max_affine(std::move(slopes), std::move(offsets)); });
  }
  if (kind == "quadratic" || kind == "quadratic_l1") {
    const bool l1 = kind == "quadratic_l1";
    if (l1) {
      reject_unknown(fn, path, {"kind", "Q", "q", "r", "alpha", "weight"});
    } else {
      reject_unknown(fn, path, {"kind", "Q", "q", "r", "alpha"});
    }
    Matrix Q = matrix_at(fn, "Q", path);
    Vector q = vector_at(fn, "q", path);
    const double r = optional_number(fn, "r", path).value_or(0.0);
    const auto alpha = optional_number(fn, "alpha", path);
    if (l1) {
      const double weight = number_at(fn, "weight", path);
      return validated(path, [&] { return FunctionOracle::quadratic_l1(std::move(Q), std::move(q), r, weight, alpha); });
    }
    return validated(path, [&] { return FunctionOracle::quadratic(std::move(Q), std::move(q), r, alpha); });
  }
  schema_error(path + "/kind", "unknown function kind '" + kind + "'");
}

ConstraintSet parse_constraint(const json& doc) {
  const std::string path = "/constraint";
  const json& c = object_at(doc, "constraint", "");
  const std::string kind = string_at(c, "kind", path);
  if (kind == "box") {
    reject_unknown(c, path, {"kind", "lo", "hi"});
    Vector lo = vector_at(c, "lo", path);
    Vector hi = vector_at(c, "hi", path);
    return validated(path, [&] { return ConstraintSet::box(std::move(lo), std::move(hi)); });
  }
  if (kind == "ball") {
    reject_unknown(c, path, {"kind", "center", "radius"});
    Vector center = vector_at(c, "center", path);
    const double radius = number_at(c, "radius", path);
    return validated(path, [&] { return ConstraintSet::ball(std::move(center), radius); });
  }
  if (kind == "simplex") {
    reject_unknown(c, path, {"kind", "dimension", "scale"});
    if (!c.contains("dimension") || !c.at("dimension").is_number_integer()) {
      schema_error(path + "/dimension", "expected an integer");
    }
    const auto n = c.at("dimension").get<std::int64_t>();
    const double scale = optional_number(c, "scale", path).value_or(1.0);
    return validated(path, [&] { return ConstraintSet::simplex(static_cast<Index>(n), scale); });
  }
  if (kind == "polytope") {
    reject_unknown(c, path, {"kind", "H", "h", "bbox_lo", "bbox_hi"});
    Matrix H = matrix_at(c, "H", path);
    Vector h = vector_at(c, "h", path);
    std::optional<std::pair<Vector, Vector>> bbox;
    if (c.contains("bbox_lo") || c.contains("bbox_hi")) {
      bbox = std::make_pair(vector_at(c, "bbox_lo", path), vector_at(c, "bbox_hi", path));
    }
    return validated(path, [&] { return ConstraintSet::polytope(std::move(H), std::move(h), std::move(bbox)); });
  }
  schema_error(path + "/kind", "unknown constraint kind '" + kind + "'");
}

RunSettings parse_run(const json& doc) {
  RunSettings s;
  if (!doc.contains("run")) return s;
  const std::string path = "/run";
  const json& r = object_at(doc, "run", "");
  reject_unknown(r, path,
                 {"schedule", "max_iter", "rho", "tau", "tol_inner", "eta", "eps", "D", "target_eps", "practical",
                  "practical_c", "practical_a", "practical_gamma", "subgradient_step"});
  if (r.contains("schedule")) s.schedule = string_at(r, "schedule", path);
  if (!std::set<std::string>{"auto", "fixed", "pwl", "sc", "scsmooth"}.count(s.schedule)) {
    schema_error(path + "/schedule", "expected one of auto, fixed, pwl, sc, scsmooth");
  }
  if (r.contains("max_iter")) {
    if (!r.at("max_iter").is_number_integer() || r.at("max_iter").get<std::int64_t>() < 0) {
      schema_error(path + "/max_iter", "expected a nonnegative integer");
    }
    s.max_iter = r.at("max_iter").get<std::int64_t>();
  }
  s.rho = optional_number(r, "rho", path).value_or(s.rho);
  s.tau = optional_number(r, "tau", path).value_or(s.tau);
  s.tol_inner = optional_number(r, "tol_inner", path);
  s.eta = optional_number(r, "eta", path);
  s.eps = optional_number(r, "eps", path);
  s.D = optional_number(r, "D", path);
  s.target_eps = optional_number(r, "target_eps", path);
  if (r.contains("practical")) {
    if (!r.at("practical").is_boolean()) schema_error(path + "/practical", "expected a boolean");
    s.practical = r.at("practical").get<bool>();
  }
  s.practical_c = optional_number(r, "practical_c", path);
  s.practical_a = optional_number(r, "practical_a", path);
  s.practical_gamma = optional_number(r, "practical_gamma", path);
  s.subgradient_step = optional_number(r, "subgradient_step", path);
  return s;
}

}  // namespace

ProblemSpec parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("", "expected a JSON object");
  reject_unknown(doc, "", {"schema", "name", "function", "constraint", "x0", "known_opt", "constants", "run"});
  if (!doc.contains("schema")) schema_error("/schema", "missing required field");
  if (!doc.at("schema").is_number_integer() || doc.at("schema").get<int>() != 1) {
    schema_error("/schema", "unsupported schema version (expected 1)");
  }
  const std::string name = string_at(doc, "name", "");
  if (name.empty() || name.find_first_of("/\\ ,") != std::string::npos) {
    throw ValidationError("/name", "name must be nonempty and free of '/', '\\', ',' and spaces");
  }

  FunctionOracle f = parse_function(doc);
  const ConstraintSet C = parse_constraint(doc);
  if (f.dimension() != C.dimension()) {
    throw ValidationError("/constraint", "dimension " + std::to_string(C.dimension()) +
                                             " does not match the function's " + std::to_string(f.dimension()));
  }
  if (doc.contains("constants")) {
    const std::string path = "/constants";
    const json& k = object_at(doc, "constants", "");
    reject_unknown(k, path, {"lipschitz", "beta", "alpha"});
    FunctionConstants declared;
    declared.lipschitz = number_at(k, "lipschitz", path);
    declared.weak_smooth = optional_number(k, "beta", path).value_or(0.0);
    declared.strong_convex = optional_number(k, "alpha", path).value_or(0.0);
    f = validated(path, [&] { return f.with_constants(declared); });
  }

  if (!doc.contains("x0")) schema_error("/x0", "missing required field");
  Vector x0 = vector(doc.at("x0"), "/x0");
  if (x0.size() != C.dimension()) throw ValidationError("/x0", "dimension mismatch");
  if (!contains(C, x0, 1e-9)) throw ValidationError("/x0", "x0 is not in the constraint set");

  std::optional<KnownOptimum> known;
  if (doc.contains("known_opt")) {
    const std::string path = "/known_opt";
    const json& k = object_at(doc, "known_opt", "");
    reject_unknown(k, path, {"x_star", "f_star"});
    KnownOptimum opt{vector_at(k, "x_star", path), number_at(k, "f_star", path)};
    if (opt.x_star.size() != C.dimension()) throw ValidationError(path + "/x_star", "dimension mismatch");
    if (!contains(C, opt.x_star, 1e-9)) throw ValidationError(path + "/x_star", "x_star is not in the constraint set");
    const double value = eval(f, opt.x_star);
    if (std::abs(value - opt.f_star) > 1e-9) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "f_star " << opt.f_star << " does not match f(x_star) = " << value;
      throw ValidationError(path + "/f_star", msg.str());
    }
    known = std::move(opt);
  }

  return ProblemSpec{name, std::move(f), C, std::move(x0), std::move(known), parse_run(doc)};
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path, "cannot open problem file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_problem(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.path(), e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ":" + e.path(), e.what());
  }
}

ScheduleHandle make_schedule(const ProblemSpec& spec) {
  const RunSettings& s = spec.run;
  const FunctionConstants k = constants(spec.f, spec.C);
  const double R = diameter(spec.C);
  return validated("/run", [&] {
    if (!(R > 0.0)) throw ContractViolation("the constraint set has zero diameter");
    std::string kind = s.schedule;
    if (kind == "auto") {
      if (k.strong_convex > 0.0) {
        kind = is_smooth(spec.f) ? "scsmooth" : "sc";
      } else {
        kind = "pwl";
      }
    }
    if (kind == "fixed") {
      const double eta = s.eta.value_or(R / 10.0);
      return make_fixed(eta, s.eps.value_or(eta / 4.0));
    }
    if (kind == "pwl") {
      const double c = s.practical && s.practical_c ? *s.practical_c : compute_c(k.lipschitz, k.weak_smooth, R, s.rho, s.tau);
      const double D = s.D.value_or(std::min(k.lipschitz * R, c));
      const double target = s.target_eps.value_or(D / 100.0);
      return s.practical ? make_practical_pwl(D, c, k.lipschitz, target) : make_pwl_halving(D, c, k.lipschitz, target);
    }
    const double D = s.D.value_or(k.lipschitz * R);
    if (kind == "sc") {
      if (s.practical) {
        if (!s.practical_a) throw ContractViolation("practical sc schedule needs practical_a");
        return make_practical_strongly_convex(*s.practical_a);
      }
      return make_strongly_convex(k.strong_convex, k.weak_smooth, k.lipschitz, s.rho, s.tau, D);
    }
    if (s.practical) {
      if (!s.practical_a || !s.practical_gamma) {
        throw ContractViolation("practical scsmooth schedule needs practical_a and practical_gamma");
      }
      return make_practical_sc_smooth(*s.practical_a, *s.practical_gamma);
    }
    return make_sc_smooth(k.strong_convex, k.weak_smooth, s.rho, s.tau, D);
  });
}

NcsdConfig make_config(const ProblemSpec& spec) {
  NcsdConfig cfg;
  cfg.rho = spec.run.rho;
  cfg.tau = spec.run.tau;
  cfg.tol_inner = spec.run.tol_inner;
  cfg.max_outer = spec.run.max_iter;
  cfg.schedule = make_schedule(spec);
  return cfg;
}

}  // namespace ncsd
