#include "cmc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cmc/error.hpp"
#include "cmc/nodal.hpp"

namespace cmc {
namespace {

const std::vector<std::pair<std::string, std::string>>& registry() {
  static const std::vector<std::pair<std::string, std::string>> r = {
      {"feasibility", "divergence-theorem bound on Neumann data (necessary for existence)"},
      {"sign_conditions", "Robin sign lemma: u negative up to the boundary, du/dn = -alpha u positive"},
      {"critical_count", "existence of a critical point and uniqueness theorems: exactly one"},
      {"critical_minimum", "uniqueness theorems: the critical point is an interior minimum"},
      {"morse_nondegenerate", "Morse lemma: det D^2u is nonzero at every critical point"},
      {"no_interior_maximum", "no-maximum lemma"},
      {"index_sum", "index count: outward boundary gradient forces total index +1"},
      {"critical_identity", "the equation at a critical point: trace D^2u = H"},
      {"saddle_equivalence", "two minima exist iff a critical point with K < 0 exists"},
      {"homotopy_stability", "continuity in t: exactly one minimum for every member of the family"},
      {"degenerate_contact", "cylinder comparison: contact of order three or more is excluded"},
      {"axis_critical_point", "axisymmetric theorem: the unique critical point lies on the axis"},
      {"axis_hessian_positive", "axisymmetric theorem: D^2u at the axis point is diagonal and positive"},
      {"radial_monotone", "axisymmetric theorem: dv/dr > 0 off the axis"},
      {"axial_nodal_curve", "axisymmetric theorem: the zero set of du/dx_n meets the axis once"},
      {"revolution_measure", "meridian reduction: r^(n-2) weighted measure equals the revolved volume"},
  };
  return r;
}

PropertyRecord make(const std::string& name) {
  PropertyRecord r;
  r.name = name;
  r.anchor = property_anchor(name);
  return r;
}

PropertyStatus pass_if(bool ok) { return ok ? PropertyStatus::Pass : PropertyStatus::Fail; }

std::string where(const Point& p) {
  std::ostringstream s;
  s << "(" << p.x() << ", " << p.y() << ")";
  return s.str();
}

std::vector<int> outer_boundary_vertices(const TriMesh& mesh) {
  std::vector<int> v;
  for (const auto& e : mesh.boundary_edges())
    if (e.kind == EdgeKind::Outer) {
      v.push_back(e.a);
      v.push_back(e.b);
    }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

const char* to_string(PropertyStatus s) {
  switch (s) {
    case PropertyStatus::Pass: return "pass";
    case PropertyStatus::Fail: return "fail";
    case PropertyStatus::Warn: return "warn";
    case PropertyStatus::Skip: return "skip";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Error: return "error";
  }
  return "unknown";
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

const std::string& property_anchor(const std::string& name) {
  for (const auto& [k, v] : registry())
    if (k == name) return v;
  fail(ErrorKind::ConfigError, "unknown verification property '" + name + "'");
}

void check_property_names(const std::vector<std::string>& names) {
  for (const auto& n : names) property_anchor(n);
}

PropertyRecord verify_sign_conditions(const ScalarField& u, const ProblemSpec& spec,
                                      const VerifyTolerances& tol) {
  PropertyRecord r = make("sign_conditions");
  const auto* robin = std::get_if<Robin>(&spec.bc);
  if (!robin) {
    r.status = PropertyStatus::Skip;
    r.note = "Robin-only; for Neumann data du/dn = c > 0 holds by construction";
    return r;
  }
  const TriMesh& mesh = *u.mesh;
  Eigen::Index imax = 0;
  const double umax = u.values.maxCoeff(&imax);
  double min_flux = std::numeric_limits<double>::infinity();
  int worst = -1;
  for (int v : outer_boundary_vertices(mesh)) {
    const double f = -robin->alpha * u.values[v];
    if (f < min_flux) {
      min_flux = f;
      worst = v;
    }
  }
  r.measured = {{"max_u", umax}, {"min_boundary_dudn", min_flux}};
  r.tolerances = {{"deadband", tol.sign_deadband}};
  const bool interior_ok = umax < -tol.sign_deadband;
  const bool boundary_ok = min_flux > tol.sign_deadband;
  r.status = pass_if(interior_ok && boundary_ok);
  if (!interior_ok) r.note = "u >= 0 at " + where(mesh.vertex(static_cast<int>(imax)));
  if (!boundary_ok && worst >= 0)
    r.note += std::string(r.note.empty() ? "" : "; ") + "-alpha u <= 0 at " + where(mesh.vertex(worst));
  return r;
}

std::vector<PropertyRecord> verify_critical_structure(const ScalarField& u, double H,
                                                      const CriticalAnalysis& cp,
                                                      const VerifyTolerances& tol) {
  const TriMesh& mesh = *u.mesh;
  std::vector<PropertyRecord> out;
  const int n = static_cast<int>(cp.records.size());

  PropertyRecord count = make("critical_count");
  count.measured = {{"count", n}, {"candidate_cells", cp.candidate_cells}};
  count.status = pass_if(n == 1);
  const double diam = boundary_diameter(mesh);
  if (n == 0 && mesh.h() > 0.3 * diam) {
    count.status = PropertyStatus::Warn;
    count.note = "mesh too coarse to resolve interior critical points";
  }
  out.push_back(count);

  PropertyRecord minimum = make("critical_minimum");
  minimum.measured = {{"minima", cp.count(CriticalKind::Minimum)},
                      {"maxima", cp.count(CriticalKind::Maximum)},
                      {"saddles", cp.count(CriticalKind::Saddle)},
                      {"degenerate", cp.count(CriticalKind::Degenerate)}};
  minimum.status = pass_if(n == 1 && cp.records[0].classification == CriticalKind::Minimum);
  if (n >= 1) {
    minimum.measured.emplace_back("x", cp.records[0].location.x());
    minimum.measured.emplace_back("y", cp.records[0].location.y());
  }
  out.push_back(minimum);

  PropertyRecord morse = make("morse_nondegenerate");
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& rec : cp.records)
    worst_ratio = std::min(worst_ratio, std::abs(rec.gauss_curvature) / (rec.scale * rec.scale));
  morse.measured = {{"min_abs_K_over_scale2", n ? worst_ratio : 0.0}};
  morse.tolerances = {{"degeneracy_tol", tol.critical.degeneracy_tol}};
  morse.status = n == 0 ? PropertyStatus::Skip : pass_if(worst_ratio > tol.critical.degeneracy_tol);
  if (n == 0) morse.note = "no critical points";
  out.push_back(morse);

  PropertyRecord nomax = make("no_interior_maximum");
  const auto maxima = interior_max_scan(u);
  nomax.measured = {{"interior_maxima", static_cast<double>(maxima.size())}};
  nomax.status = pass_if(maxima.empty());
  if (!maxima.empty()) nomax.note = "local maximum at " + where(mesh.vertex(maxima.front()));
  out.push_back(nomax);

  PropertyRecord index = make("index_sum");
  int sum = 0;
  bool sum_valid = true;
  for (const auto& rec : cp.records) {
    sum += rec.index;
    sum_valid = sum_valid && rec.index_valid;
  }
  index.measured = {{"sum_of_indices", sum}};
  try {
    const int loop = gradient_index(u, inward_offset_loop(mesh, 2.0 * mesh.h()), cp.grad_tol);
    index.measured.emplace_back("boundary_loop_index", loop);
    index.status = pass_if(sum_valid && loop == sum && loop == 1);
    if (!sum_valid) index.note = "a critical point has no valid index";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditionedLoop) throw;
    index.status = PropertyStatus::Fail;
    index.note = e.what();
  }
  out.push_back(index);

  PropertyRecord ident = make("critical_identity");
  double worst = 0.0;
  for (const auto& rec : cp.records) worst = std::max(worst, std::abs(rec.hessian.trace() - H));
  ident.measured = {{"max_abs_trace_minus_H", worst}, {"H", H}};
  if (n >= 1) ident.measured.emplace_back("trace", cp.records[0].hessian.trace());
  ident.tolerances = {{"rel", tol.trace_rel}};
  ident.status = n == 0 ? PropertyStatus::Skip : pass_if(worst <= tol.trace_rel * H);
  out.push_back(ident);
  return out;
}

PropertyRecord verify_saddle_equivalence(const CriticalAnalysis& cp) {
  PropertyRecord r = make("saddle_equivalence");
  const int mins = cp.count(CriticalKind::Minimum);
  const int saddles = cp.count(CriticalKind::Saddle);
  const bool lhs = mins >= 2, rhs = saddles >= 1;
  r.measured = {{"minima", mins}, {"saddles", saddles}, {"two_minima", lhs}, {"negative_K_point", rhs}};
  r.status = pass_if(lhs == rhs);
  return r;
}

PropertyRecord verify_feasibility(const FeasibilityReport& f) {
  PropertyRecord r = make("feasibility");
  r.measured = {{"margin", f.margin}, {"flux_capacity", f.flux_capacity}, {"load", f.load}};
  r.tolerances = {{"borderline", f.tolerance}};
  switch (f.status) {
    case Feasibility::Feasible: r.status = PropertyStatus::Pass; break;
    case Feasibility::Borderline:
      r.status = PropertyStatus::Warn;
      r.note = "load equals the flux capacity within tolerance";
      break;
    case Feasibility::Infeasible:
      r.status = PropertyStatus::Fail;
      r.note = "H |Omega| exceeds the largest boundary flux";
      break;
  }
  return r;
}

PropertyRecord verify_homotopy_stability(const HomotopyTrace& trace, const ProblemSpec& spec) {
  PropertyRecord r = make("homotopy_stability");
  bool ok = !trace.steps.empty();
  int bad_steps = 0;
  for (const auto& s : trace.steps)
    if (!(s.min_count == 1 && s.saddle_count == 0 && s.morse)) {
      ok = false;
      ++bad_steps;
    }
  r.measured = {{"steps", static_cast<double>(trace.steps.size())}, {"bad_steps", bad_steps}};
  if (!spec.is_neumann() && !trace.steps.empty() && trace.steps.front().t == 0.0) {
    const double k0 = trace.steps.front().min_gauss_curvature;
    r.measured.emplace_back("K0", k0);
    ok = ok && k0 > 0.0;
  }
  r.status = pass_if(ok);
  if (!trace.complete) {
    r.status = PropertyStatus::Warn;
    r.note = "trace incomplete (solver failure); partial data only";
  }
  return r;
}

PropertyRecord verify_degenerate_contact(const ScalarField& u, double H,
                                         const CriticalAnalysis& cp, const VerifyTolerances& tol) {
  PropertyRecord r = make("degenerate_contact");
  if (cp.records.size() != 1) {
    r.status = PropertyStatus::Skip;
    r.note = "needs exactly one critical point";
    return r;
  }
  const auto& p = cp.records[0];
  const TriMesh& mesh = *u.mesh;
  const double dist = distance_to_boundary(mesh, p.location);
  const double radius = std::max(4.0 * mesh.h(), std::min(0.3, 0.5 * dist));
  if (radius > 0.8 * dist) {
    r.status = PropertyStatus::Warn;
    r.note = "critical point too close to the boundary for a sampling circle";
    return r;
  }
  // Bend the cylinder along the eigenvector of the larger Hessian eigenvalue.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(p.hessian);
  const Eigen::Vector2d dir = eig.eigenvectors().col(1);
  const double angle = std::atan2(dir.y(), dir.x());
  try {
    const auto d = difference_field(u, cylinder_field(cylinder_solution(p.value, H), p.location, angle));
    const int sectors = sector_count(d.field, p.location, radius);
    const auto fit = leading_order_fit(d.field, p.location);
    r.measured = {{"sectors", sectors}, {"k", fit.k}, {"fit_residual", fit.residual}, {"radius", radius}};
    r.tolerances = {{"sectors", tol.contact_sectors}, {"k", tol.contact_degree}};
    r.status = pass_if(!(sectors >= tol.contact_sectors && fit.k >= tol.contact_degree));
    if (d.clipped) r.note = "clipped to " + d.subdomain;
  } catch (const Error& e) {
    r.status = PropertyStatus::Warn;
    r.note = e.what();
  }
  return r;
}

std::vector<PropertyRecord> verify_axisymmetric(const ScalarField& v, const MeridianProblem& problem,
                                                const VerifyTolerances& tol) {
  const TriMesh& mesh = *v.mesh;
  const int n = problem.spec.n_dim;
  const double H = problem.spec.H;
  std::vector<PropertyRecord> out;

  const auto axis = meridian_critical_points(v, H, tol.critical);
  PropertyRecord crit = make("axis_critical_point");
  crit.measured = {{"axis_extrema", axis.axis_extrema}, {"off_axis", axis.off_axis_count}};
  if (axis.found) crit.measured.emplace_back("x_n", axis.location.y());
  crit.status = pass_if(axis.found && axis.axis_extrema == 1 && axis.off_axis_count == 0);
  out.push_back(crit);

  PropertyRecord hess = make("axis_hessian_positive");
  if (axis.found) {
    const auto h = axis_hessian(v, n, axis);
    const double smallest = *std::min_element(h.diagonal.begin(), h.diagonal.end());
    hess.measured = {{"u_rr", h.diagonal.front()}, {"u_nn", h.diagonal.back()}, {"trace", h.trace},
                     {"cross_rz", h.cross_rz}, {"cone", h.cone}};
    hess.tolerances = {{"cross_rel", tol.axis_cross_rel}, {"trace_rel", tol.trace_rel}};
    hess.status = pass_if(smallest > 0 && std::abs(h.cross_rz) <= tol.axis_cross_rel * smallest &&
                          std::abs(h.cone) <= tol.axis_cross_rel * smallest &&
                          std::abs(h.trace - H) <= tol.trace_rel * H);
  } else {
    hess.status = PropertyStatus::Fail;
    hess.note = "no axis critical point";
  }
  out.push_back(hess);

  PropertyRecord mono = make("radial_monotone");
  const auto m = check_monotone(v, tol.monotone_tol);
  mono.measured = {{"min_vr", m.min_vr}, {"checked", m.checked}};
  mono.tolerances = {{"tol", tol.monotone_tol}};
  mono.status = pass_if(m.holds);
  if (!m.holds) mono.note = "dv/dr < 0 at " + where(m.worst);
  out.push_back(mono);

  PropertyRecord nodal = make("axial_nodal_curve");
  const auto ns = axial_derivative_nodal_set(v);
  nodal.measured = {{"curves", static_cast<double>(ns.arcs.arcs.size())}};
  nodal.status = pass_if(ns.single_axis_to_boundary);
  nodal.note = ns.detail;
  out.push_back(nodal);

  PropertyRecord vol = make("revolution_measure");
  const double exact = exact_revolved_volume(problem.profile, n);
  const double rel = std::abs(revolved_volume(mesh, n) - exact) / exact;
  vol.measured = {{"relative_error", rel}, {"exact", exact}};
  vol.tolerances = {{"bound", tol.volume_h2 * mesh.h() * mesh.h()}};
  vol.status = pass_if(rel <= tol.volume_h2 * mesh.h() * mesh.h());
  out.push_back(vol);
  return out;
}

VerificationReport aggregate(std::vector<PropertyRecord> properties) {
  VerificationReport rep;
  // Registry order regardless of evaluation order.
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < property_names().size(); ++i) rank[property_names()[i]] = i;
  for (const auto& p : properties) property_anchor(p.name);
  std::stable_sort(properties.begin(), properties.end(),
                   [&](const auto& a, const auto& b) { return rank[a.name] < rank[b.name]; });
  rep.properties = std::move(properties);
  rep.verdict = Verdict::Pass;
  for (const auto& p : rep.properties)
    if (p.status == PropertyStatus::Fail) rep.verdict = Verdict::Fail;
  return rep;
}

}  // namespace cmc
