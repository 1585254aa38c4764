#include "cmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"

#include "cmc/axisym.hpp"
#include "cmc/critical.hpp"
#include "cmc/error.hpp"
#include "cmc/mesh.hpp"
#include "cmc/nodal.hpp"
#include "cmc/solver.hpp"
#include "cmc/verify.hpp"

namespace cmc {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string g6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json pairs_json(const std::vector<std::pair<std::string, double>>& v) {
  json j = json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

json property_json(const PropertyRecord& p) {
  return {{"name", p.name}, {"anchor", p.anchor}, {"status", to_string(p.status)},
          {"measured", pairs_json(p.measured)}, {"tolerances", pairs_json(p.tolerances)},
          {"note", p.note}};
}

json step_json(const HomotopyStep& s) {
  return {{"t", s.t}, {"min_value", s.min_value}, {"max_value", s.max_value},
          {"mean_value", s.mean_value}, {"critical_count", s.critical_count},
          {"min_count", s.min_count}, {"saddle_count", s.saddle_count}, {"max_count", s.max_count},
          {"degenerate_count", s.degenerate_count}, {"morse", s.morse},
          {"min_gauss_curvature", s.min_gauss_curvature},
          {"newton_iterations", s.newton_iterations},
          {"compatibility_shift", s.compatibility_shift}};
}

json trace_json(const HomotopyTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(step_json(s));
  return {{"complete", t.complete}, {"steps", steps}};
}

json solver_json(const SolveReport& r) {
  return {{"source", "solve"}, {"converged", r.converged}, {"iterations", r.iterations},
          {"final_residual_norm", r.final_residual_norm},
          {"normalization", to_string(r.normalization)}, {"t", r.t},
          {"compatibility_shift", r.compatibility_shift}, {"message", r.message}};
}

json critical_json(const CriticalPointRecord& c) {
  return {{"x", c.location.x()}, {"y", c.location.y()}, {"value", c.value},
          {"grad_norm", c.grad_norm},
          {"hessian", {c.hessian(0, 0), c.hessian(0, 1), c.hessian(1, 1)}},
          {"gauss_curvature", c.gauss_curvature}, {"classification", to_string(c.classification)},
          {"index", c.index_valid ? json(c.index) : json(nullptr)}};
}

json mesh_json(const TriMesh& m) {
  return {{"vertices", m.vertex_count()}, {"cells", m.cell_count()}, {"h", m.h()},
          {"min_angle_deg", m.min_angle_deg()}, {"area", m.total_area()},
          {"boundary_length", m.boundary_length()}, {"hash", hex64(m.hash())}};
}

json feasibility_json(const FeasibilityReport& f) {
  return {{"status", to_string(f.status)}, {"margin", f.margin},
          {"flux_capacity", f.flux_capacity}, {"load", f.load}, {"tolerance", f.tolerance}};
}

PropertyRecord skipped(const std::string& name, const std::string& note) {
  PropertyRecord r;
  r.name = name;
  r.anchor = property_anchor(name);
  r.status = PropertyStatus::Skip;
  r.note = note;
  return r;
}

// ---------------------------------------------------------------------------
// Artifacts

struct Polyline {
  std::string set;
  std::vector<Point> points;
};

struct Artifacts {
  std::string config_hash;
  std::shared_ptr<const TriMesh> mesh;
  std::optional<ScalarField> field;
  std::optional<HomotopyTrace> trace;
  std::vector<CriticalPointRecord> critical;
  std::vector<Polyline> nodal;
  std::vector<Polyline> contours;
};

std::string provenance(const Artifacts& a) {
  std::string s = "config_hash=" + a.config_hash;
  if (a.mesh) s += " mesh_hash=" + hex64(a.mesh->hash());
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorKind::IoError, "write failed for " + p.string());
}

std::string solution_csv(const Artifacts& a) {
  std::string out = "# " + provenance(a) + "\n";
  if (a.trace) {
    out += "# trace_complete=" + std::string(a.trace->complete ? "1" : "0") + "\n";
    for (const auto& s : a.trace->steps) {
      out += "# trace," + g17(s.t) + "," + g17(s.min_value) + "," + g17(s.max_value) + "," +
             g17(s.mean_value) + "," + std::to_string(s.critical_count) + "," +
             std::to_string(s.min_count) + "," + std::to_string(s.saddle_count) + "," +
             std::to_string(s.max_count) + "," + std::to_string(s.degenerate_count) + "," +
             (s.morse ? "1" : "0") + "," + g17(s.min_gauss_curvature) + "," +
             std::to_string(s.newton_iterations) + "," + g17(s.compatibility_shift) + "\n";
    }
  }
  out += "x,y,value\n";
  const auto& m = *a.field->mesh;
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    const Point& p = m.vertex(static_cast<int>(i));
    out += g17(p.x()) + "," + g17(p.y()) + "," + g17(a.field->values[static_cast<Eigen::Index>(i)]) + "\n";
  }
  return out;
}

std::string critical_csv(const Artifacts& a) {
  std::string out = "# " + provenance(a) + "\n";
  out += "x,y,value,grad_norm,h11,h12,h22,gauss_curvature,classification,index\n";
  for (const auto& c : a.critical) {
    out += g17(c.location.x()) + "," + g17(c.location.y()) + "," + g17(c.value) + "," +
           g17(c.grad_norm) + "," + g17(c.hessian(0, 0)) + "," + g17(c.hessian(0, 1)) + "," +
           g17(c.hessian(1, 1)) + "," + g17(c.gauss_curvature) + "," +
           to_string(c.classification) + "," + (c.index_valid ? std::to_string(c.index) : "") + "\n";
  }
  return out;
}

std::string polyline_csv(const Artifacts& a) {
  std::string out = "# " + provenance(a) + "\n";
  out += "set,arc,seq,x,y\n";
  auto emit = [&](const std::vector<Polyline>& lines) {
    for (std::size_t i = 0; i < lines.size(); ++i)
      for (std::size_t k = 0; k < lines[i].points.size(); ++k)
        out += lines[i].set + "," + std::to_string(i) + "," + std::to_string(k) + "," +
               g17(lines[i].points[k].x()) + "," + g17(lines[i].points[k].y()) + "\n";
  };
  emit(a.nodal);
  emit(a.contours);
  return out;
}

std::string contours_svg(const Artifacts& a) {
  const TriMesh& m = *a.mesh;
  Point lo = m.vertex(0), hi = m.vertex(0);
  for (const auto& p : m.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double scale = 480.0 / span, pad = 10.0;
  const double W = (hi.x() - lo.x()) * scale + 2 * pad, Hh = (hi.y() - lo.y()) * scale + 2 * pad;
  auto X = [&](const Point& p) { return g6((p.x() - lo.x()) * scale + pad); };
  auto Y = [&](const Point& p) { return g6((hi.y() - p.y()) * scale + pad); };
  auto path = [&](const std::vector<Point>& pts) {
    std::string d;
    for (std::size_t k = 0; k < pts.size(); ++k) d += (k ? " L" : "M") + X(pts[k]) + " " + Y(pts[k]);
    return d;
  };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + g6(W) + "\" height=\"" +
                  g6(Hh) + "\" viewBox=\"0 0 " + g6(W) + " " + g6(Hh) + "\">\n";
  s += "<!-- " + provenance(a) + " -->\n";
  s += "<g fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\">\n";
  for (const auto& e : m.boundary_edges()) {
    const char* dash = e.kind == EdgeKind::Axis ? " stroke-dasharray=\"4 3\"" : "";
    s += "<path d=\"" + path({m.vertex(e.a), m.vertex(e.b)}) + "\"" + dash + "/>\n";
  }
  s += "</g>\n<g fill=\"none\" stroke=\"#4a6fa5\" stroke-width=\"0.8\">\n";
  for (const auto& c : a.contours) s += "<path d=\"" + path(c.points) + "\"/>\n";
  s += "</g>\n<g fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.2\">\n";
  for (const auto& c : a.nodal) s += "<path d=\"" + path(c.points) + "\"/>\n";
  s += "</g>\n<g fill=\"#000\">\n";
  for (const auto& c : a.critical)
    s += "<circle cx=\"" + X(c.location) + "\" cy=\"" + Y(c.location) + "\" r=\"3\"/>\n";
  s += "</g>\n</svg>\n";
  return s;
}

void write_artifacts(const std::string& out_dir, const Artifacts& a, const std::string& report) {
  if (out_dir.empty()) return;
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create output directory " + out_dir + ": " + ec.message());
  write_file(dir / "report.json", report);
  if (a.field) write_file(dir / "solution.csv", solution_csv(a));
  if (a.mesh) {
    write_file(dir / "critical_points.csv", critical_csv(a));
    write_file(dir / "nodal_arcs.csv", polyline_csv(a));
    write_file(dir / "contours.svg", contours_svg(a));
  }
}

std::vector<Polyline> level_contours(const ScalarField& f, int levels) {
  std::vector<Polyline> out;
  const double lo = f.values.minCoeff(), hi = f.values.maxCoeff();
  if (!(hi > lo)) return out;
  for (int i = 1; i <= levels; ++i) {
    const double level = lo + (hi - lo) * i / (levels + 1);
    ScalarField g(f.mesh, (f.values.array() - level).matrix());
    for (auto& arc : trace_nodal_set(g).arcs) out.push_back({"contour" + std::to_string(i), std::move(arc)});
  }
  return out;
}

std::vector<Polyline> gradient_nodal_sets(const ScalarField& f) {
  const auto grad = recover_gradient(f);
  std::vector<Polyline> out;
  for (int k = 0; k < 2; ++k) {
    Vector comp(static_cast<Eigen::Index>(grad.size()));
    for (std::size_t i = 0; i < grad.size(); ++i) comp[static_cast<Eigen::Index>(i)] = grad[i][k];
    const std::string name = k == 0 ? "du_dx1" : "du_dx2";
    for (auto& arc : trace_nodal_set(ScalarField(f.mesh, comp)).arcs) out.push_back({name, std::move(arc)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stored solutions

struct StoredSolution {
  Vector values;
  std::optional<HomotopyTrace> trace;
};

StoredSolution load_solution(const std::string& path, const RunConfig& cfg, const TriMesh& mesh) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "solution_file: cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# config_hash=", 0) != 0)
    fail(ErrorKind::IoError, "solution_file: missing provenance header");
  const std::string expect_cfg = "config_hash=" + cfg.hash;
  const std::string expect_mesh = "mesh_hash=" + hex64(mesh.hash());
  if (line.find(expect_cfg) == std::string::npos)
    fail(ErrorKind::ConfigError, "solution_file: written by a different configuration (" + line.substr(2) +
                                     ", expected " + expect_cfg + ")");
  if (line.find(expect_mesh) == std::string::npos)
    fail(ErrorKind::ConfigError, "solution_file: mesh hash mismatch (expected " + expect_mesh + ")");

  StoredSolution s;
  std::vector<double> vals;
  bool header = false;
  while (std::getline(f, line)) {
    if (line.rfind("# trace_complete=", 0) == 0) {
      s.trace.emplace();
      s.trace->complete = line.back() == '1';
      continue;
    }
    if (line.rfind("# trace,", 0) == 0) {
      if (!s.trace) s.trace.emplace();
      std::vector<std::string> cols;
      std::stringstream ss(line.substr(8));
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      if (cols.size() != 13) fail(ErrorKind::IoError, "solution_file: malformed trace line");
      HomotopyStep st;
      st.t = std::stod(cols[0]);
      st.min_value = std::stod(cols[1]);
      st.max_value = std::stod(cols[2]);
      st.mean_value = std::stod(cols[3]);
      st.critical_count = std::stoi(cols[4]);
      st.min_count = std::stoi(cols[5]);
      st.saddle_count = std::stoi(cols[6]);
      st.max_count = std::stoi(cols[7]);
      st.degenerate_count = std::stoi(cols[8]);
      st.morse = cols[9] == "1";
      st.min_gauss_curvature = std::stod(cols[10]);
      st.newton_iterations = std::stoi(cols[11]);
      st.compatibility_shift = std::stod(cols[12]);
      s.trace->steps.push_back(st);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "x,y,value") fail(ErrorKind::IoError, "solution_file: expected column header x,y,value");
      header = true;
      continue;
    }
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      fail(ErrorKind::IoError, "solution_file: malformed row " + std::to_string(vals.size() + 1));
    const double x = std::stod(line.substr(0, c1)), y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const auto i = vals.size();
    if (i >= mesh.vertex_count() || (mesh.vertex(static_cast<int>(i)) - Point(x, y)).norm() > 1e-12)
      fail(ErrorKind::IoError, "solution_file: vertex " + std::to_string(i) + " does not match the mesh");
    vals.push_back(std::stod(line.substr(c2 + 1)));
  }
  if (vals.size() != mesh.vertex_count())
    fail(ErrorKind::IoError, "solution_file: " + std::to_string(vals.size()) + " values for " +
                                 std::to_string(mesh.vertex_count()) + " vertices");
  s.values = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return s;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  Command command;
  const RunConfig& cfg;
  json report;
  Artifacts art;
  std::vector<PropertyRecord> props;
};

bool wanted(const RunConfig& cfg, const std::string& name) {
  return cfg.properties.empty() ||
         std::find(cfg.properties.begin(), cfg.properties.end(), name) != cfg.properties.end();
}

void add(Context& cx, PropertyRecord r) {
  if (wanted(cx.cfg, r.name)) cx.props.push_back(std::move(r));
}

// Solution at spec.t: continuation over the schedule when t = 1, a direct
// Newton solve from the Poisson start otherwise.
struct Solved {
  Solution solution;
  std::optional<HomotopyTrace> trace;
};

Solved solve_on(const MeanCurvatureOperator& op, const RunConfig& cfg, bool need_trace) {
  if (cfg.spec.t == 1.0) {
    auto hr = homotopy_solve(op, cfg.spec, cfg.schedule, cfg.solver, cfg.tolerances.critical);
    return {std::move(hr.solution), std::move(hr.trace)};
  }
  if (need_trace) fail(ErrorKind::ConfigError, "problem.t: continuation runs to t = 1");
  const auto init = poisson_init(op, cfg.spec);
  return {newton_solve(op, cfg.spec, init.field, cfg.solver), std::nullopt};
}

// Divergence-theorem gate for Neumann data; Robin data always passes.
bool feasibility_gate(Context& cx, double measure, double boundary_measure, const ConvexDomain* domain) {
  const auto& spec = cx.cfg.spec;
  if (!spec.is_neumann()) {
    add(cx, skipped("feasibility", "Robin data: no flux bound"));
    return true;
  }
  const double rel = cx.cfg.tolerances.feasibility_rel;
  const auto f = domain ? neumann_feasibility(*domain, spec, rel)
                        : neumann_feasibility(measure, boundary_measure, spec, rel);
  cx.report["feasibility"] = feasibility_json(f);
  add(cx, verify_feasibility(f));
  return f.status != Feasibility::Infeasible;
}

void planar(Context& cx) {
  const RunConfig& cfg = cx.cfg;
  const auto domain = build_domain(cfg.domain);
  cx.report["domain"] = {{"area", domain.area()}, {"length", domain.length()}, {"diameter", domain.diameter()}};
  if (cx.command != Command::MeshReport && cx.command != Command::Compare &&
      !feasibility_gate(cx, 0, 0, &domain)) {
    cx.report["status"] = "infeasible";
    return;
  }

  auto mesh = std::make_shared<const TriMesh>(triangulate(domain, cfg.h_target));
  cx.art.mesh = mesh;
  cx.report["mesh"] = mesh_json(*mesh);
  if (cx.command == Command::MeshReport) {
    cx.report["mesh"]["area_error"] = mesh->total_area() - domain.area();
    cx.report["mesh"]["length_error"] = mesh->boundary_length() - domain.length();
    return;
  }

  const double H = cfg.spec.H;
  const MeanCurvatureOperator op(mesh);
  ScalarField u;
  std::optional<HomotopyTrace> trace;

  if (cx.command == Command::Compare && cfg.compare.field == "harmonic") {
    Vector vals(static_cast<Eigen::Index>(mesh->vertex_count()));
    for (std::size_t i = 0; i < mesh->vertex_count(); ++i) {
      const Point& p = mesh->vertex(static_cast<int>(i));
      vals[static_cast<Eigen::Index>(i)] = std::pow(std::complex<double>(p.x(), p.y()), cfg.compare.degree).real();
    }
    u = ScalarField(mesh, vals);
  } else if (cx.command == Command::Verify && !cfg.solution_file.empty()) {
    auto stored = load_solution(cfg.solution_file, cfg, *mesh);
    u = ScalarField(mesh, stored.values);
    trace = std::move(stored.trace);
    cx.report["solver"] = {{"source", "solution_file"}};
  } else {
    const bool need_trace = cx.command == Command::Homotopy || cx.command == Command::Verify;
    try {
      auto s = solve_on(op, cfg, need_trace);
      u = std::move(s.solution.field);
      trace = std::move(s.trace);
      cx.report["solver"] = solver_json(s.solution.report);
    } catch (const SolverFailure& e) {
      cx.report["solver"] = solver_json(e.report());
      if (e.trace()) {
        cx.report["homotopy"] = trace_json(*e.trace());
        cx.art.trace = e.trace();
      }
      throw;
    }
  }
  cx.art.field = u;
  if (trace) {
    cx.report["homotopy"] = trace_json(*trace);
    cx.art.trace = trace;
  }

  const auto cp = find_critical_points(u, H, cfg.tolerances.critical);
  cx.art.critical = cp.records;
  json crit = json::array();
  for (const auto& c : cp.records) crit.push_back(critical_json(c));
  cx.report["critical_points"] = crit;
  cx.report["critical_anomalies"] = cp.anomalies;
  cx.report["solution_range"] = {u.values.minCoeff(), u.values.maxCoeff()};
  cx.art.contours = level_contours(u, 10);

  if (cx.command == Command::Compare) {
    const auto& cc = cfg.compare;
    Point center = Point::Zero();
    ScalarField target = u;
    json cmp{{"field", cc.field}, {"reference", cc.reference}};
    if (cc.field == "solution") {
      if (cp.records.size() != 1)
        fail(ErrorKind::OutOfDomain, "compare: needs exactly one critical point, found " +
                                         std::to_string(cp.records.size()));
      const auto& p = cp.records[0];
      center = p.location;
      if (cc.reference != "none") {
        AnalyticField ref;
        if (cc.reference == "cylinder") {
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(p.hessian);
          const Eigen::Vector2d dir = eig.eigenvectors().col(1);
          const double angle = cc.angle ? *cc.angle : std::atan2(dir.y(), dir.x());
          cmp["angle"] = angle;
          ref = cylinder_field(cylinder_solution(p.value, H), center, angle);
        } else {
          ref = quadratic_model(p.value, center, p.hessian);
        }
        const auto d = difference_field(u, ref);
        target = d.field;
        cmp["description"] = ref.description;
        cmp["clipped"] = d.clipped;
        cmp["subdomain"] = d.subdomain;
      }
      add(cx, verify_degenerate_contact(u, H, cp, cfg.tolerances));
    } else {
      cmp["degree"] = cc.degree;
      cmp["reference"] = "none";
      cx.art.contours.clear();
    }
    const double dist = distance_to_boundary(*target.mesh, center);
    const double radius = cc.radius ? *cc.radius : std::max(4.0 * mesh->h(), std::min(0.3, 0.5 * dist));
    cmp["center"] = {center.x(), center.y()};
    cmp["radius"] = radius;
    cmp["sectors"] = sector_count(target, center, radius);
    const auto fit = leading_order_fit(target, center);
    cmp["k"] = fit.k;
    cmp["fit"] = {{"r_min", fit.r_min}, {"r_max", fit.r_max}, {"residual", fit.residual},
                  {"amplitude", fit.amplitude}};
    const auto arcs = trace_nodal_set(target);
    cmp["nodal_arcs"] = arcs.arcs.size();
    cmp["junction"] = arcs.junction ? json{arcs.junction->x(), arcs.junction->y()} : json(nullptr);
    for (const auto& a : arcs.arcs) cx.art.nodal.push_back({"difference", a});
    cx.report["compare"] = cmp;
    return;
  }

  cx.art.nodal = gradient_nodal_sets(u);
  add(cx, verify_sign_conditions(u, cfg.spec, cfg.tolerances));
  for (auto& r : verify_critical_structure(u, H, cp, cfg.tolerances)) add(cx, std::move(r));
  add(cx, verify_saddle_equivalence(cp));
  if (cx.command == Command::Homotopy || cx.command == Command::Verify) {
    if (trace)
      add(cx, verify_homotopy_stability(*trace, cfg.spec));
    else
      add(cx, skipped("homotopy_stability", "no continuation trace available"));
  }
  if (cx.command == Command::Verify) add(cx, verify_degenerate_contact(u, H, cp, cfg.tolerances));
}

void axisymmetric(Context& cx) {
  const RunConfig& cfg = cx.cfg;
  MeridianProblem problem{build_profile(cfg.domain), cfg.spec};
  problem.validate();
  auto mesh = std::make_shared<const TriMesh>(meridian_mesh(problem, cfg.h_target));
  cx.art.mesh = mesh;
  cx.report["mesh"] = mesh_json(*mesh);
  const int n = cfg.spec.n_dim;
  const double exact = exact_revolved_volume(problem.profile, n);
  cx.report["domain"] = {{"volume", exact}, {"a", problem.profile.a}, {"b", problem.profile.b}};
  if (cx.command == Command::MeshReport) {
    cx.report["mesh"]["revolved_volume"] = revolved_volume(*mesh, n);
    return;
  }
  const auto op = meridian_operator(mesh, n);
  if (!feasibility_gate(cx, op.measure(), op.boundary_measure(), nullptr)) {
    cx.report["status"] = "infeasible";
    return;
  }

  ScalarField v;
  if (cx.command == Command::Verify && !cfg.solution_file.empty()) {
    v = ScalarField(mesh, load_solution(cfg.solution_file, cfg, *mesh).values);
    cx.report["solver"] = {{"source", "solution_file"}};
  } else {
    try {
      auto s = solve_on(op, cfg, false);
      v = std::move(s.solution.field);
      cx.report["solver"] = solver_json(s.solution.report);
    } catch (const SolverFailure& e) {
      cx.report["solver"] = solver_json(e.report());
      throw;
    }
  }
  cx.art.field = v;
  cx.report["solution_range"] = {v.values.minCoeff(), v.values.maxCoeff()};

  const auto axis = meridian_critical_points(v, cfg.spec.H, cfg.tolerances.critical);
  json ax{{"found", axis.found}, {"axis_extrema", axis.axis_extrema}, {"off_axis", axis.off_axis_count}};
  if (axis.found) {
    ax["x_n"] = axis.location.y();
    ax["value"] = axis.value;
    const auto h = axis_hessian(v, n, axis);
    ax["hessian_diagonal"] = h.diagonal;
    ax["hessian_trace"] = h.trace;
    CriticalPointRecord rec;
    rec.location = axis.location;
    rec.value = axis.value;
    rec.hessian << h.diagonal.front(), 0.0, 0.0, h.diagonal.back();
    rec.gauss_curvature = rec.hessian.determinant();
    rec.classification = CriticalKind::Minimum;
    for (double d : h.diagonal)
      if (!(d > 0)) rec.classification = CriticalKind::Degenerate;
    cx.art.critical.push_back(rec);
  }
  for (const auto& c : axis.off_axis) cx.art.critical.push_back(c);
  cx.report["axis"] = ax;
  json crit = json::array();
  for (const auto& c : cx.art.critical) crit.push_back(critical_json(c));
  cx.report["critical_points"] = crit;

  const auto nodal = axial_derivative_nodal_set(v);
  for (const auto& a : nodal.arcs.arcs) cx.art.nodal.push_back({"dv_dxn", a});
  cx.art.contours = level_contours(v, 10);

  add(cx, verify_sign_conditions(v, cfg.spec, cfg.tolerances));
  for (auto& r : verify_axisymmetric(v, problem, cfg.tolerances)) add(cx, std::move(r));
}

std::string status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::SolverFailure:
    case ErrorKind::LinearFailure: return "solver-failure";
    case ErrorKind::MeshQualityFailure: return "mesh-failure";
    case ErrorKind::InvalidParameter:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError: return "invalid";
    default: return "analysis-error";
  }
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::SolverFailure:
    case ErrorKind::LinearFailure: return kExitSolverFailure;
    case ErrorKind::MeshQualityFailure:
    case ErrorKind::InvalidParameter:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError: return kExitInvalid;
    default: return kExitVerifyFail;
  }
}

}  // namespace

RunResult run(Command command, const RunConfig& cfg, const std::string& out_dir) {
  Context cx{command, cfg, json::object(), {}, {}};
  cx.art.config_hash = cfg.hash;
  cx.report["command"] = to_string(command);
  cx.report["config_hash"] = cfg.hash;
  cx.report["config"] = json::parse(cfg.canonical);

  RunResult res;
  std::optional<Error> failure;
  try {
    const bool axi = cfg.domain.axisymmetric();
    if (command == Command::Axisym && !axi)
      fail(ErrorKind::ConfigError, "domain.type: axisym needs a ball or spheroid domain");
    if (command == Command::Compare && axi)
      fail(ErrorKind::ConfigError, "domain.type: compare needs a planar domain");
    if (!cfg.solution_file.empty() && command != Command::Verify)
      fail(ErrorKind::ConfigError, "solution_file: only the verify command reads stored solutions");
    if (axi)
      axisymmetric(cx);
    else
      planar(cx);
  } catch (const Error& e) {
    failure = e;
  } catch (const std::exception& e) {
    failure = Error(ErrorKind::SolverFailure, std::string("internal error: ") + e.what());
  }

  const auto rep = aggregate(cx.props);
  json props = json::array();
  for (const auto& p : rep.properties) props.push_back(property_json(p));
  json verification{{"properties", props}, {"verdict", to_string(rep.verdict)}, {"error", ""}};

  if (cx.report.value("status", "") == "infeasible") {
    res.exit_code = kExitInvalid;
    res.status = "infeasible";
    verification["verdict"] = to_string(Verdict::Error);
    verification["error"] = "Neumann data violate the divergence-theorem flux bound; no solve attempted";
  } else if (failure) {
    res.exit_code = exit_for(failure->kind());
    res.status = status_for(failure->kind());
    verification["verdict"] = to_string(Verdict::Error);
    verification["error"] = std::string(to_string(failure->kind())) + ": " + failure->what();
  } else if (command == Command::MeshReport) {
    res.status = "ok";
  } else {
    res.exit_code = rep.verdict == Verdict::Pass ? kExitPass : kExitVerifyFail;
    res.status = rep.verdict == Verdict::Pass ? "ok" : "verification-failed";
  }
  cx.report["status"] = res.status;
  cx.report["exit_code"] = res.exit_code;
  if (!verification["error"].get<std::string>().empty()) cx.report["error"] = verification["error"];
  if (command != Command::MeshReport) cx.report["verification"] = verification;
  res.report = cx.report.dump(2) + "\n";

  try {
    write_artifacts(out_dir, cx.art, res.report);
  } catch (const Error& e) {
    if (res.exit_code == kExitPass) res.exit_code = kExitInvalid;
    res.status = "io-error";
  }
  return res;
}

RunResult run_document(const std::string& command, const std::string& config_text,
                       const std::vector<std::string>& overrides, const std::string& out_dir) {
  Command cmd;
  RunConfig cfg;
  try {
    cmd = parse_command(command);
    cfg = parse_config(config_text, overrides);
  } catch (const Error& e) {
    RunResult r;
    r.exit_code = kExitInvalid;
    r.status = "invalid";
    json rep{{"command", command}, {"status", "invalid"}, {"exit_code", kExitInvalid},
             {"error", std::string(to_string(e.kind())) + ": " + e.what()}};
    r.report = rep.dump(2) + "\n";
    // The configured directory is unknown here; only an explicit one is used.
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      std::ofstream(std::filesystem::path(out_dir) / "report.json", std::ios::trunc) << r.report;
    }
    return r;
  }
  std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
  if (dir.empty()) dir = "cmc_out";
  return run(cmd, cfg, dir);
}

}  // namespace cmc
