#include "cmc/config.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cmc/error.hpp"

namespace cmc {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Homotopy: return "homotopy";
    case Command::Axisym: return "axisym";
    case Command::Compare: return "compare";
    case Command::Verify: return "verify";
    case Command::MeshReport: return "mesh-report";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Solve, Command::Homotopy, Command::Axisym, Command::Compare,
                    Command::Verify, Command::MeshReport})
    if (name == to_string(c)) return c;
  fail(ErrorKind::ConfigError, "unknown command '" + name + "'");
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorKind::ConfigError, path + ": " + what);
}

// Typed access to one object of the document with unknown-key rejection.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) bad(at(k), "unknown key");
  }

  bool has(const char* k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json& raw(const char* k) const { return j_.at(k); }

  double number(const char* k, std::optional<double> def, double lo, double hi, bool lo_open,
                bool hi_open = false) const {
    if (!has(k)) {
      if (!def) bad(at(k), "required");
      return *def;
    }
    const json& v = j_.at(k);
    if (!v.is_number()) bad(at(k), "expected a number");
    const double x = v.get<double>();
    const bool lo_ok = lo_open ? x > lo : x >= lo;
    const bool hi_ok = hi_open ? x < hi : x <= hi;
    if (!std::isfinite(x) || !lo_ok || !hi_ok) {
      std::ostringstream msg;
      msg << "value " << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi
          << (hi_open ? ")" : "]");
      bad(at(k), msg.str());
    }
    return x;
  }

  long integer(const char* k, long def, long lo, long hi) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) bad(at(k), "expected an integer");
    const long x = v.get<long>();
    if (x < lo || x > hi) {
      std::ostringstream msg;
      msg << "value " << x << " outside [" << lo << ", " << hi << "]";
      bad(at(k), msg.str());
    }
    return x;
  }

  std::string string(const char* k, std::optional<std::string> def,
                     std::initializer_list<const char*> choices = {}) const {
    if (!has(k)) {
      if (!def) bad(at(k), "required");
      return *def;
    }
    const json& v = j_.at(k);
    if (!v.is_string()) bad(at(k), "expected a string");
    std::string s = v.get<std::string>();
    if (choices.size() != 0) {
      bool found = false;
      std::string list;
      for (const char* c : choices) {
        found = found || s == c;
        list += std::string(list.empty() ? "" : ", ") + c;
      }
      if (!found) bad(at(k), "'" + s + "' is not one of " + list);
    }
    return s;
  }

  Section sub(const char* k) const {
    static const json empty = json::object();
    return has(k) ? Section(j_.at(k), at(k)) : Section(empty, at(k));
  }

 private:
  const json& j_;
  std::string path_;
};

void set_path(json& root, const std::string& path, json value) {
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) bad(path, "empty override path component");
    if (!node->is_object()) bad(path, "override descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void parse_domain(const Section& s, DomainConfig& d) {
  d.type = s.string("type", std::nullopt, {"disk", "ellipse", "rounded_polygon", "ball", "spheroid"});
  if (d.type == "disk" || d.type == "ball") {
    s.allow({"type", "R"});
    d.R = s.number("R", 1.0, 0.0, 1e6, true);
  } else if (d.type == "ellipse" || d.type == "spheroid") {
    s.allow({"type", "a", "b"});
    d.a = s.number("a", std::nullopt, 0.0, 1e6, true);
    d.b = s.number("b", std::nullopt, 0.0, 1e6, true);
  } else {
    s.allow({"type", "vertices", "r"});
    d.r = s.number("r", std::nullopt, 0.0, 1e6, true);
    if (!s.has("vertices") || !s.raw("vertices").is_array())
      bad(s.at("vertices"), "required array of [x, y] pairs");
    const json& vs = s.raw("vertices");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const json& p = vs[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        bad(s.at("vertices") + "[" + std::to_string(i) + "]", "expected [x, y]");
      d.vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (d.vertices.size() < 3) bad(s.at("vertices"), "needs at least 3 vertices");
  }
}

json domain_json(const DomainConfig& d) {
  json j{{"type", d.type}};
  if (d.type == "disk" || d.type == "ball") {
    j["R"] = d.R;
  } else if (d.type == "ellipse" || d.type == "spheroid") {
    j["a"] = d.a;
    j["b"] = d.b;
  } else {
    j["r"] = d.r;
    j["vertices"] = json::array();
    for (const auto& p : d.vertices) j["vertices"].push_back({p.x(), p.y()});
  }
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigError, std::string("<document>: malformed JSON: ") + e.what());
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) bad("--override", "expected KEY=VALUE, got '" + ov + "'");
    const std::string key = ov.substr(0, eq), val = ov.substr(eq + 1);
    json v = json::parse(val, nullptr, false);
    if (v.is_discarded()) v = val;
    set_path(doc, key, std::move(v));
  }

  RunConfig cfg;
  const Section root(doc, "");
  root.allow({"domain", "problem", "mesh", "solver", "tolerances", "compare", "output", "seed",
              "solution_file", "properties"});
  if (!root.has("domain")) bad("domain", "required");
  if (!root.has("problem")) bad("problem", "required");
  parse_domain(root.sub("domain"), cfg.domain);

  const Section pr = root.sub("problem");
  pr.allow({"H", "bc", "alpha", "c", "t", "schedule", "schedule_steps", "n_dim"});
  cfg.spec.H = pr.number("H", std::nullopt, 0.0, 1e6, true);
  const std::string bc = pr.string("bc", std::nullopt, {"robin", "neumann"});
  if (bc == "robin") {
    if (pr.has("c")) bad(pr.at("c"), "not allowed with bc = robin");
    cfg.spec.bc = Robin{pr.number("alpha", std::nullopt, 0.0, 1e6, true)};
  } else {
    if (pr.has("alpha")) bad(pr.at("alpha"), "not allowed with bc = neumann");
    cfg.spec.bc = Neumann{pr.number("c", std::nullopt, 0.0, 1e6, true)};
  }
  cfg.spec.t = pr.number("t", 1.0, 0.0, 1.0, false);
  const int default_n = cfg.domain.axisymmetric() ? 3 : 2;
  cfg.spec.n_dim = static_cast<int>(pr.integer("n_dim", default_n, 2, 16));
  if (!cfg.domain.axisymmetric() && cfg.spec.n_dim != 2)
    bad(pr.at("n_dim"), "planar domains need n_dim = 2");
  if (cfg.domain.axisymmetric() && cfg.spec.n_dim < 3)
    bad(pr.at("n_dim"), "domains of revolution need n_dim >= 3");
  if (pr.has("schedule") && pr.has("schedule_steps"))
    bad(pr.at("schedule"), "give either schedule or schedule_steps");
  if (pr.has("schedule")) {
    const json& s = pr.raw("schedule");
    if (!s.is_array() || s.empty()) bad(pr.at("schedule"), "expected a non-empty array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number()) bad(pr.at("schedule") + "[" + std::to_string(i) + "]", "expected a number");
      const double t = s[i].get<double>();
      if (!(t >= 0 && t <= 1)) bad(pr.at("schedule") + "[" + std::to_string(i) + "]", "outside [0, 1]");
      if (i > 0 && !(t > cfg.schedule.back()))
        bad(pr.at("schedule") + "[" + std::to_string(i) + "]", "schedule must increase strictly");
      cfg.schedule.push_back(t);
    }
    if (cfg.schedule.back() != 1.0) bad(pr.at("schedule"), "must end at 1");
  } else {
    cfg.schedule = uniform_schedule(static_cast<int>(pr.integer("schedule_steps", 11, 2, 10000)));
  }

  const Section me = root.sub("mesh");
  me.allow({"h_target"});
  cfg.h_target = me.number("h_target", 0.1, 0.0, 1e6, true);

  const Section so = root.sub("solver");
  so.allow({"newton_tol", "max_iter", "armijo_factor", "sufficient_decrease", "max_backtracks",
            "neumann_compat_tol", "min_dt"});
  SolverOptions& o = cfg.solver;
  o.newton_tol = so.number("newton_tol", o.newton_tol, 0.0, 1.0, true);
  o.max_iter = static_cast<int>(so.integer("max_iter", o.max_iter, 1, 10000));
  o.armijo_factor = so.number("armijo_factor", o.armijo_factor, 0.0, 1.0, true, true);
  o.sufficient_decrease = so.number("sufficient_decrease", o.sufficient_decrease, 0.0, 1.0, true, true);
  o.max_backtracks = static_cast<int>(so.integer("max_backtracks", o.max_backtracks, 0, 200));
  o.neumann_compat_tol = so.number("neumann_compat_tol", o.neumann_compat_tol, 0.0, 1e6, false);
  o.min_dt = so.number("min_dt", o.min_dt, 0.0, 1.0, true);

  const Section to = root.sub("tolerances");
  to.allow({"grad_tol_factor", "degeneracy_tol", "cluster_radius_factor", "index_radius_factor",
            "sign_deadband", "trace_rel", "monotone_tol", "axis_cross_rel", "volume_h2",
            "feasibility_rel"});
  VerifyTolerances& t = cfg.tolerances;
  t.critical.grad_tol_factor = to.number("grad_tol_factor", t.critical.grad_tol_factor, 0.0, 1.0, true);
  t.critical.degeneracy_tol = to.number("degeneracy_tol", t.critical.degeneracy_tol, 0.0, 1.0, true);
  t.critical.cluster_radius_factor =
      to.number("cluster_radius_factor", t.critical.cluster_radius_factor, 0.0, 100.0, true);
  t.critical.index_radius_factor =
      to.number("index_radius_factor", t.critical.index_radius_factor, 0.0, 100.0, true);
  t.sign_deadband = to.number("sign_deadband", t.sign_deadband, 0.0, 1.0, false);
  t.trace_rel = to.number("trace_rel", t.trace_rel, 0.0, 10.0, true);
  t.monotone_tol = to.number("monotone_tol", t.monotone_tol, 0.0, 1.0, false);
  t.axis_cross_rel = to.number("axis_cross_rel", t.axis_cross_rel, 0.0, 10.0, true);
  t.volume_h2 = to.number("volume_h2", t.volume_h2, 0.0, 1e6, true);
  t.feasibility_rel = to.number("feasibility_rel", t.feasibility_rel, 0.0, 1.0, false);

  const Section co = root.sub("compare");
  co.allow({"field", "degree", "reference", "angle", "radius"});
  CompareConfig& c = cfg.compare;
  c.field = co.string("field", c.field, {"solution", "harmonic"});
  c.degree = static_cast<int>(co.integer("degree", c.degree, 1, 20));
  c.reference = co.string("reference", c.reference, {"cylinder", "quadratic", "none"});
  if (co.has("angle")) c.angle = co.number("angle", std::nullopt, -1e3, 1e3, false);
  if (co.has("radius")) c.radius = co.number("radius", std::nullopt, 0.0, 1e6, true);

  const Section out = root.sub("output");
  out.allow({"dir"});
  cfg.output_dir = out.string("dir", "");
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 0, 0, std::numeric_limits<long>::max()));
  cfg.solution_file = root.string("solution_file", "");
  if (root.has("properties")) {
    const json& p = root.raw("properties");
    if (!p.is_array()) bad("properties", "expected an array of property names");
    for (const auto& n : p) {
      if (!n.is_string()) bad("properties", "expected strings");
      cfg.properties.push_back(n.get<std::string>());
    }
    try {
      check_property_names(cfg.properties);
    } catch (const Error& e) {
      bad("properties", e.what());
    }
  }

  // Library-level validation, reported with the config path.
  try {
    cfg.spec.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, e.what());
  }

  json canon;
  canon["domain"] = domain_json(cfg.domain);
  json problem{{"H", cfg.spec.H}, {"t", cfg.spec.t}, {"n_dim", cfg.spec.n_dim}, {"schedule", cfg.schedule}};
  if (const auto* r = std::get_if<Robin>(&cfg.spec.bc)) {
    problem["bc"] = "robin";
    problem["alpha"] = r->alpha;
  } else {
    problem["bc"] = "neumann";
    problem["c"] = std::get<Neumann>(cfg.spec.bc).c;
  }
  canon["problem"] = problem;
  canon["mesh"] = {{"h_target", cfg.h_target}};
  canon["solver"] = {{"newton_tol", o.newton_tol}, {"max_iter", o.max_iter},
                     {"armijo_factor", o.armijo_factor}, {"sufficient_decrease", o.sufficient_decrease},
                     {"max_backtracks", o.max_backtracks}, {"neumann_compat_tol", o.neumann_compat_tol},
                     {"min_dt", o.min_dt}};
  canon["tolerances"] = {{"grad_tol_factor", t.critical.grad_tol_factor},
                         {"degeneracy_tol", t.critical.degeneracy_tol},
                         {"cluster_radius_factor", t.critical.cluster_radius_factor},
                         {"index_radius_factor", t.critical.index_radius_factor},
                         {"sign_deadband", t.sign_deadband}, {"trace_rel", t.trace_rel},
                         {"monotone_tol", t.monotone_tol}, {"axis_cross_rel", t.axis_cross_rel},
                         {"volume_h2", t.volume_h2}, {"feasibility_rel", t.feasibility_rel}};
  json cmp{{"field", c.field}, {"degree", c.degree}, {"reference", c.reference}};
  if (c.angle) cmp["angle"] = *c.angle;
  if (c.radius) cmp["radius"] = *c.radius;
  canon["compare"] = cmp;
  canon["seed"] = cfg.seed;
  canon["properties"] = cfg.properties;
  cfg.canonical = canon.dump();
  cfg.hash = fnv1a_hex(cfg.canonical);
  return cfg;
}

ConvexDomain build_domain(const DomainConfig& d) {
  if (d.type == "disk") return make_disk(d.R);
  if (d.type == "ellipse") return make_ellipse(d.a, d.b);
  if (d.type == "rounded_polygon") return make_rounded_polygon(d.vertices, d.r);
  fail(ErrorKind::ConfigError, "domain.type: '" + d.type + "' is not a planar domain");
}

MeridianProfile build_profile(const DomainConfig& d) {
  if (d.type == "ball") return ball_profile(d.R);
  if (d.type == "spheroid") return spheroid_profile(d.a, d.b);
  fail(ErrorKind::ConfigError, "domain.type: '" + d.type + "' is not a domain of revolution");
}

}  // namespace cmc
