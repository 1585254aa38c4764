#include "cmc/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

#include "cmc/error.hpp"

namespace cmc {

Cylinder::Cylinder(double h_val, double H) : h_(h_val), H_(H) {
  if (!(H > 0)) fail(ErrorKind::InvalidParameter, "cylinder needs H > 0");
  if (!std::isfinite(h_val)) fail(ErrorKind::InvalidParameter, "cylinder height must be finite");
}

void Cylinder::check(double x) const {
  if (!(std::abs(x) < 1.0 / H_)) {
    std::ostringstream msg;
    msg << "cylinder evaluated at |x| = " << std::abs(x) << " >= 1/H = " << 1.0 / H_;
    fail(ErrorKind::OutOfDomain, msg.str());
  }
}

double Cylinder::value(double x) const {
  check(x);
  return h_ + (1.0 - std::sqrt(1.0 - H_ * H_ * x * x)) / H_;
}

double Cylinder::slope(double x) const {
  check(x);
  return H_ * x / std::sqrt(1.0 - H_ * H_ * x * x);
}

double Cylinder::second_derivative(double x) const {
  check(x);
  return H_ / std::pow(1.0 - H_ * H_ * x * x, 1.5);
}

Cylinder cylinder_solution(double h_val, double H) { return Cylinder(h_val, H); }

AnalyticField cylinder_field(const Cylinder& X, const Point& center, double angle) {
  const Point d(std::cos(angle), std::sin(angle));
  AnalyticField f;
  f.eval = [X, center, d](const Point& p) { return X.value(d.dot(p - center)); };
  f.defined = [X, center, d](const Point& p) {
    return std::abs(d.dot(p - center)) < X.half_width();
  };
  std::ostringstream desc;
  desc << "cylinder h=" << X.h_val() << " H=" << X.H() << " center=(" << center.x() << ", "
       << center.y() << ") angle=" << angle;
  f.description = desc.str();
  return f;
}

AnalyticField quadratic_model(double u0, double lambda1, double lambda2) {
  return quadratic_model(u0, Point::Zero(), Eigen::Vector2d(lambda1, lambda2).asDiagonal());
}

AnalyticField quadratic_model(double u0, const Point& center, const Eigen::Matrix2d& hessian) {
  AnalyticField f;
  const Eigen::Matrix2d A = 0.5 * (hessian + hessian.transpose());
  f.eval = [u0, center, A](const Point& p) {
    const Point x = p - center;
    return u0 + 0.5 * x.dot(A * x);
  };
  std::ostringstream desc;
  desc << "quadratic u0=" << u0 << " hessian=[" << A(0, 0) << ", " << A(0, 1) << "; " << A(1, 0)
       << ", " << A(1, 1) << "]";
  f.description = desc.str();
  return f;
}

DifferenceField difference_field(const ScalarField& field, const AnalyticField& analytic) {
  const TriMesh& mesh = *field.mesh;
  const auto n = mesh.vertex_count();
  std::vector<char> ok(n);
  bool all = true;
  for (std::size_t v = 0; v < n; ++v) {
    ok[v] = analytic.is_defined(mesh.vertices()[v]);
    all = all && ok[v];
  }
  DifferenceField out;
  if (all) {
    Vector d(static_cast<Eigen::Index>(n));
    for (std::size_t v = 0; v < n; ++v)
      d[static_cast<Eigen::Index>(v)] = field.values[static_cast<Eigen::Index>(v)] - analytic(mesh.vertices()[v]);
    out.field = ScalarField(field.mesh, std::move(d));
    return out;
  }

  std::vector<int> cells;
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c) {
    const auto& t = mesh.cell(c);
    if (ok[t[0]] && ok[t[1]] && ok[t[2]]) cells.push_back(c);
  }
  if (cells.empty())
    fail(ErrorKind::OutOfDomain, "comparison function is undefined on every cell (" +
                                     analytic.description + ")");
  SubMesh sub = submesh(mesh, cells);
  Vector d(static_cast<Eigen::Index>(sub.vertex_map.size()));
  for (std::size_t v = 0; v < sub.vertex_map.size(); ++v) {
    const int o = sub.vertex_map[v];
    d[static_cast<Eigen::Index>(v)] = field.values[o] - analytic(mesh.vertex(o));
  }
  auto m = std::make_shared<const TriMesh>(std::move(sub.mesh));
  std::ostringstream desc;
  desc << cells.size() << " of " << mesh.cell_count() << " cells, area " << m->total_area()
       << " of " << mesh.total_area() << " (" << analytic.description << ")";
  out.field = ScalarField(m, std::move(d));
  out.clipped = true;
  out.subdomain = desc.str();
  out.vertex_map = std::move(sub.vertex_map);
  return out;
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

double perturbed(double v, double eps) { return v == 0.0 ? eps : v; }

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double nearest_distance(const std::vector<Point>& line, const Point& p, std::size_t* at) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < line.size(); ++i) {
    const double d = (line[i] - p).norm();
    if (d < best) {
      best = d;
      if (at) *at = i;
    }
  }
  return best;
}

}  // namespace

NodalArcSet trace_nodal_set(const ScalarField& field) {
  const TriMesh& mesh = *field.mesh;
  const double scale = max_abs(field.values);
  if (!(scale > 0)) fail(ErrorKind::InvalidParameter, "nodal set of an identically zero field");
  const double eps = 1e-12 * scale;
  auto val = [&](int v) { return perturbed(field.values[v], eps); };

  std::map<EdgeKey, Point> zero;
  std::map<EdgeKey, std::vector<EdgeKey>> links;
  for (const auto& t : mesh.cells()) {
    std::vector<EdgeKey> crossing;
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      const double fa = val(a), fb = val(b);
      if ((fa > 0) == (fb > 0)) continue;
      const EdgeKey k = key(a, b);
      if (!zero.count(k)) {
        const double s = fa / (fa - fb);
        zero[k] = mesh.vertex(a) + s * (mesh.vertex(b) - mesh.vertex(a));
      }
      crossing.push_back(k);
    }
    if (crossing.size() == 2) {
      links[crossing[0]].push_back(crossing[1]);
      links[crossing[1]].push_back(crossing[0]);
    }
  }

  // Chain open curves from their ends first, then closed loops.
  NodalArcSet out;
  std::map<EdgeKey, bool> used;
  auto walk = [&](EdgeKey start) {
    std::vector<Point> line{zero.at(start)};
    used[start] = true;
    EdgeKey cur = start;
    for (;;) {
      const auto& nb = links[cur];
      auto it = std::find_if(nb.begin(), nb.end(), [&](const EdgeKey& k) { return !used[k]; });
      if (it == nb.end()) {
        // Close a loop if it returns to the start.
        if (std::find(nb.begin(), nb.end(), start) != nb.end() && line.size() > 2)
          line.push_back(line.front());
        break;
      }
      cur = *it;
      used[cur] = true;
      line.push_back(zero.at(cur));
    }
    return line;
  };
  for (const auto& [k, nb] : links)
    if (nb.size() == 1 && !used[k]) out.arcs.push_back(walk(k));
  for (const auto& [k, nb] : links)
    if (!used[k]) out.arcs.push_back(walk(k));

  // Junction: curves that come within 2h of each other cross numerically.
  const double reach = 2.0 * mesh.h();
  Point sum = Point::Zero();
  int pairs = 0;
  for (std::size_t i = 0; i < out.arcs.size(); ++i)
    for (std::size_t j = i + 1; j < out.arcs.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      Point mid;
      for (const Point& p : out.arcs[i]) {
        std::size_t at = 0;
        const double d = nearest_distance(out.arcs[j], p, &at);
        if (d < best) {
          best = d;
          mid = 0.5 * (p + out.arcs[j][at]);
        }
      }
      if (best < reach) {
        sum += mid;
        ++pairs;
      }
    }
  if (pairs == 0) return out;
  const Point junction = sum / pairs;
  out.junction = junction;

  std::vector<std::vector<Point>> rays;
  for (auto& line : out.arcs) {
    std::size_t at = 0;
    const bool closed = line.size() > 2 && line.front() == line.back();
    if (closed || nearest_distance(line, junction, &at) >= reach) {
      rays.push_back(std::move(line));
      continue;
    }
    std::vector<Point> a(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(at) + 1);
    std::vector<Point> b(line.begin() + static_cast<std::ptrdiff_t>(at), line.end());
    std::reverse(a.begin(), a.end());
    for (auto* piece : {&a, &b})
      if (piece->size() > 1) rays.push_back(std::move(*piece));
  }
  out.arcs = std::move(rays);
  return out;
}

namespace {

constexpr int kCircleSamples = 720;

std::vector<double> circle_values(const ScalarField& field, const PointLocator& loc,
                                  const Point& p, double r) {
  std::vector<double> vals(kCircleSamples);
  const std::span<const double> values(field.values.data(), static_cast<std::size_t>(field.values.size()));
  for (int k = 0; k < kCircleSamples; ++k) {
    const double a = 2.0 * std::numbers::pi * k / kCircleSamples;
    const Point q = p + r * Point(std::cos(a), std::sin(a));
    if (!loc.locate(q)) {
      std::ostringstream msg;
      msg << "sampling circle of radius " << r << " around (" << p.x() << ", " << p.y()
          << ") leaves the mesh";
      fail(ErrorKind::OutOfDomain, msg.str());
    }
    vals[static_cast<std::size_t>(k)] = loc.interpolate(values, q);
  }
  return vals;
}

}  // namespace

int sector_count(const ScalarField& field, const Point& p, double r) {
  const TriMesh& mesh = *field.mesh;
  if (!(r >= 4.0 * mesh.h())) {
    std::ostringstream msg;
    msg << "sector_count radius " << r << " is below 4h = " << 4.0 * mesh.h();
    fail(ErrorKind::InvalidParameter, msg.str());
  }
  const PointLocator loc(mesh);
  const auto vals = circle_values(field, loc, p, r);
  const double eps = 1e-12 * max_abs(field.values);
  int changes = 0;
  for (int k = 0; k < kCircleSamples; ++k) {
    const double a = perturbed(vals[static_cast<std::size_t>(k)], eps);
    const double b = perturbed(vals[static_cast<std::size_t>((k + 1) % kCircleSamples)], eps);
    if ((a > 0) != (b > 0)) ++changes;
  }
  return changes;
}

LeadingOrderFit leading_order_fit(const ScalarField& field, const Point& p, double r_min,
                                  double r_max) {
  const TriMesh& mesh = *field.mesh;
  if (!(r_min >= 2.0 * mesh.h() * (1.0 - 1e-12)) || !(r_max > r_min)) {
    std::ostringstream msg;
    msg << "fit window [" << r_min << ", " << r_max << "] needs 2h = " << 2.0 * mesh.h()
        << " <= r_min < r_max";
    fail(ErrorKind::InvalidParameter, msg.str());
  }
  const PointLocator loc(mesh);
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * max_abs(field.values);
  constexpr int kRadii = 12;
  Eigen::MatrixXd A(kRadii, 2);
  Eigen::VectorXd y(kRadii);
  for (int i = 0; i < kRadii; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (kRadii - 1));
    const auto vals = circle_values(field, loc, p, r);
    double m = 0.0;
    for (double v : vals) m = std::max(m, std::abs(v));
    if (!(m > floor)) {
      std::ostringstream msg;
      msg << "field magnitude " << m << " at radius " << r << " is below the fit floor " << floor;
      fail(ErrorKind::UnderflowFit, msg.str());
    }
    A(i, 0) = std::log(r);
    A(i, 1) = 1.0;
    y[i] = std::log(m);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  LeadingOrderFit out;
  out.k = c[0];
  out.amplitude = std::exp(c[1]);
  out.r_min = r_min;
  out.r_max = r_max;
  out.residual = std::sqrt((A * c - y).squaredNorm() / kRadii);
  return out;
}

LeadingOrderFit leading_order_fit(const ScalarField& field, const Point& p) {
  const TriMesh& mesh = *field.mesh;
  const double r_max =
      std::min(0.3 * boundary_diameter(mesh), 0.5 * distance_to_boundary(mesh, p));
  return leading_order_fit(field, p, 2.0 * mesh.h(), r_max);
}

}  // namespace cmc
