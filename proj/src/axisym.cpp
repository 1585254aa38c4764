#include "cmc/axisym.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

#include "cmc/error.hpp"

namespace cmc {

MeridianProfile ball_profile(double R) {
  if (!(R > 0)) fail(ErrorKind::InvalidParameter, "domain.R must be positive");
  return {R, R};
}

MeridianProfile spheroid_profile(double a, double b) {
  if (!(a > 0)) fail(ErrorKind::InvalidParameter, "domain.a must be positive");
  if (!(b > 0)) fail(ErrorKind::InvalidParameter, "domain.b must be positive");
  return {a, b};
}

void MeridianProblem::validate() const {
  if (!(profile.a > 0) || !(profile.b > 0))
    fail(ErrorKind::InvalidParameter, "meridian profile semi-axes must be positive");
  spec.validate();
}

TriMesh meridian_mesh(const MeridianProblem& problem, double h_target, const MeshOptions& options) {
  problem.validate();
  const auto& pr = problem.profile;
  const ConvexDomain section = make_ellipse(pr.a, pr.b);
  const double L = section.length();
  if (!(h_target > 0) || !(h_target < L / 8))
    fail(ErrorKind::InvalidParameter, "h_target must satisfy 0 < h_target < L/8");

  BoundaryLoop loop;
  const auto n_arc = static_cast<int>(std::ceil(0.5 * L / h_target)) + 1;
  for (int k = 0; k <= n_arc; ++k) {
    Point p = section.position(-0.25 * L + 0.5 * L * k / n_arc);
    if (k == 0) p = Point(0.0, -pr.b);
    if (k == n_arc) p = Point(0.0, pr.b);
    loop.points.push_back(p);
    loop.kinds.push_back(k < n_arc ? EdgeKind::Outer : EdgeKind::Axis);
  }
  const auto n_axis = static_cast<int>(std::ceil(2.0 * pr.b / h_target)) + 1;
  for (int k = 1; k < n_axis; ++k) {
    loop.points.emplace_back(0.0, pr.b - 2.0 * pr.b * k / n_axis);
    loop.kinds.push_back(EdgeKind::Axis);
  }
  return triangulate_loop(loop, h_target, Point::Zero(), options);
}

MeanCurvatureOperator meridian_operator(std::shared_ptr<const TriMesh> mesh, int n_dim) {
  if (n_dim < 2) fail(ErrorKind::InvalidParameter, "problem.n_dim must be at least 2");
  return MeanCurvatureOperator(std::move(mesh), static_cast<double>(n_dim - 2));
}

Solution solve_meridian(const MeridianProblem& problem, std::shared_ptr<const TriMesh> mesh,
                        const ScalarField& init, const SolverOptions& options) {
  problem.validate();
  return newton_solve(meridian_operator(std::move(mesh), problem.spec.n_dim), problem.spec, init,
                      options);
}

std::vector<int> axis_chain(const TriMesh& mesh) {
  std::vector<int> v;
  for (const auto& e : mesh.boundary_edges())
    if (e.kind == EdgeKind::Axis) {
      v.push_back(e.a);
      v.push_back(e.b);
    }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::sort(v.begin(), v.end(),
            [&](int a, int b) { return mesh.vertex(a).y() < mesh.vertex(b).y(); });
  return v;
}

MonotoneReport check_monotone(const ScalarField& v, double tol) {
  const TriMesh& mesh = *v.mesh;
  const auto grad = recover_gradient(v);
  MonotoneReport out;
  out.min_vr = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const Point& p = mesh.vertices()[i];
    if (!(p.x() > 2.0 * mesh.h())) continue;
    ++out.checked;
    if (grad[i].x() < out.min_vr) {
      out.min_vr = grad[i].x();
      out.worst = p;
    }
  }
  if (out.checked == 0) {
    out.min_vr = 0.0;
    return out;
  }
  out.holds = out.min_vr > -tol;
  out.boundary_case = std::abs(out.min_vr) <= tol;
  return out;
}

AxisCritical meridian_critical_points(const ScalarField& v, double H,
                                      const CriticalOptions& options) {
  const TriMesh& mesh = *v.mesh;
  const auto chain = axis_chain(mesh);
  AxisCritical out;
  // Sign changes of the differences along the chain; exact ties (the axis
  // samples of a mirror-symmetric mesh) do not break a run.
  double scale = 0.0;
  for (int c : chain) scale = std::max(scale, std::abs(v.values[c]));
  const double tie = 1e-14 * std::max(scale, 1e-300);
  auto sign = [&](std::size_t i) {
    const double d = v.values[chain[i + 1]] - v.values[chain[i]];
    return d > tie ? 1 : d < -tie ? -1 : 0;
  };
  double best = std::numeric_limits<double>::infinity();
  int last = 0;
  std::size_t run_start = 0;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const int sg = sign(i);
    if (sg == 0) continue;
    if (last != 0 && sg != last) {
      ++out.axis_extrema;
      // The extremal vertex lies in (run_start, i]; take the extreme sample.
      std::size_t j = run_start + 1;
      for (std::size_t q = j; q <= i; ++q)
        if (last < 0 ? v.values[chain[q]] < v.values[chain[j]] : v.values[chain[q]] > v.values[chain[j]])
          j = q;
      const double b = v.values[chain[j]];
      if (!out.found || b < best) {
        best = b;
        out.found = true;
        // Vertex of the parabola through the three samples around j.
        const double a = v.values[chain[j - 1]], c = v.values[chain[j + 1]];
        const double z0 = mesh.vertex(chain[j - 1]).y(), z1 = mesh.vertex(chain[j]).y(),
                     z2 = mesh.vertex(chain[j + 1]).y();
        const double d1 = (b - a) / (z1 - z0), d2 = (c - b) / (z2 - z1);
        const double k = (d2 - d1) / (z2 - z0);
        const double z = k != 0.0 ? std::clamp(0.5 * (z0 + z1) - d1 / (2.0 * k), z0, z2) : z1;
        out.location = Point(0.0, z);
        out.value = a + d1 * (z - z0) + k * (z - z0) * (z - z1);
      }
    }
    if (sg != last) run_start = i;
    last = sg;
  }
  const auto cp = find_critical_points(v, H, options);
  for (const auto& r : cp.records)
    if (r.location.x() > 2.0 * mesh.h()) out.off_axis.push_back(r);
  out.off_axis_count = static_cast<int>(out.off_axis.size());
  return out;
}

AxisHessian axis_hessian(const ScalarField& v, int n_dim, const AxisCritical& axis) {
  if (!axis.found) fail(ErrorKind::InvalidParameter, "axis_hessian needs an axis critical point");
  if (n_dim < 2) fail(ErrorKind::InvalidParameter, "problem.n_dim must be at least 2");
  const TriMesh& mesh = *v.mesh;
  const Point p = axis.location;
  // P1 values near the axis carry an O(h^2) non-smooth error; a 3h window
  // turns it into an O(1) Hessian bias, 5h keeps it to a few percent.
  double rho = 5.0 * mesh.h();
  std::vector<int> patch;
  for (;;) {
    patch.clear();
    for (int i = 0; i < static_cast<int>(mesh.vertex_count()); ++i)
      if ((mesh.vertex(i) - p).norm() <= rho) patch.push_back(i);
    if (patch.size() >= 12) break;
    rho *= 1.5;
  }
  const auto m = static_cast<Eigen::Index>(patch.size());
  Eigen::MatrixXd A(m, 4), X(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Point& q = mesh.vertex(patch[static_cast<std::size_t>(k)]);
    const double r = q.x() / rho, z = (q.y() - p.y()) / rho;
    A.row(k) << 1.0, z, 0.5 * r * r, 0.5 * z * z;
    X.row(k) << r * z, r;
    y[k] = v.values[patch[static_cast<std::size_t>(k)]];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * c;
  // Terms a smooth revolved function cannot have, fitted to what is left.
  const Eigen::VectorXd e = X.colPivHouseholderQr().solve(res);
  const double s2 = 1.0 / (rho * rho);
  AxisHessian out;
  out.location = p;
  out.diagonal.assign(static_cast<std::size_t>(n_dim - 1), c[2] * s2);
  out.diagonal.push_back(c[3] * s2);
  for (double d : out.diagonal) out.trace += d;
  out.cross_rz = e[0] * s2;
  out.cone = e[1] * s2;
  out.rms = std::sqrt(res.squaredNorm() / static_cast<double>(m));
  return out;
}

AxialNodalReport axial_derivative_nodal_set(const ScalarField& v) {
  const TriMesh& mesh = *v.mesh;
  const auto grad = recover_gradient(v);
  Vector vz(static_cast<Eigen::Index>(grad.size()));
  for (std::size_t i = 0; i < grad.size(); ++i) vz[static_cast<Eigen::Index>(i)] = grad[i].y();
  AxialNodalReport out;
  out.arcs = trace_nodal_set(ScalarField(v.mesh, vz));

  auto on_outer = [&](const Point& q) {
    for (const auto& e : mesh.boundary_edges()) {
      if (e.kind != EdgeKind::Outer) continue;
      const Point& a = mesh.vertex(e.a);
      const Point ab = mesh.vertex(e.b) - a;
      const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      if ((a + t * ab - q).norm() <= 1e-9) return true;
    }
    return false;
  };
  std::ostringstream detail;
  detail << out.arcs.arcs.size() << " nodal curve(s)";
  if (out.arcs.arcs.size() == 1) {
    const auto& arc = out.arcs.arcs[0];
    const Point& a = arc.front();
    const Point& b = arc.back();
    const bool a_axis = std::abs(a.x()) <= 1e-12, b_axis = std::abs(b.x()) <= 1e-12;
    out.single_axis_to_boundary =
        arc.size() > 1 && ((a_axis && on_outer(b)) || (b_axis && on_outer(a)));
    detail << " from (" << a.x() << ", " << a.y() << ") to (" << b.x() << ", " << b.y() << ")";
  }
  out.detail = detail.str();
  return out;
}

double revolved_volume(const TriMesh& mesh, int n_dim) {
  if (n_dim < 2) fail(ErrorKind::InvalidParameter, "problem.n_dim must be at least 2");
  const double m = n_dim - 1.0;
  const double omega = 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c)
    sum += std::pow(mesh.centroid(c).x(), n_dim - 2.0) * mesh.signed_area(c);
  return omega * sum;
}

double exact_revolved_volume(const MeridianProfile& profile, int n_dim) {
  const double n = n_dim;
  const double unit = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return unit * std::pow(profile.a, n - 1.0) * profile.b;
}

}  // namespace cmc
