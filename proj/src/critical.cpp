#include "cmc/critical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "cmc/error.hpp"
#include "delaunay.hpp"

namespace cmc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool hull_contains_origin(const Point& a, const Point& b, const Point& c) {
  const Point o = Point::Zero();
  const double d1 = detail::orient(a, b, o);
  const double d2 = detail::orient(b, c, o);
  const double d3 = detail::orient(c, a, o);
  if (d1 == 0 && d2 == 0 && d3 == 0)  // all on one line through the origin
    return a.dot(b) <= 0 || b.dot(c) <= 0 || c.dot(a) <= 0;
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(has_neg && has_pos);
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

std::vector<Point> circle(const Point& center, double radius, int samples) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double a = kTwoPi * k / samples;
    pts.emplace_back(center + radius * Point(std::cos(a), std::sin(a)));
  }
  return pts;
}

}  // namespace

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::Minimum: return "minimum";
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Saddle: return "saddle";
    case CriticalKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

int CriticalAnalysis::count(CriticalKind kind) const {
  return static_cast<int>(std::count_if(records.begin(), records.end(),
                                        [kind](const auto& r) { return r.classification == kind; }));
}

std::vector<Point> recover_gradient(const ScalarField& field) {
  const TriMesh& mesh = *field.mesh;
  std::vector<Point> cell_grad(mesh.cell_count());
  std::vector<double> area(mesh.cell_count());
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c) {
    const auto& t = mesh.cell(c);
    const double a2 = 2.0 * mesh.signed_area(c);
    Point g = Point::Zero();
    for (int i = 0; i < 3; ++i) {
      const Point& p = mesh.vertex(t[(i + 1) % 3]);
      const Point& q = mesh.vertex(t[(i + 2) % 3]);
      g += field.values[t[i]] * Point(p.y() - q.y(), q.x() - p.x()) / a2;
    }
    cell_grad[c] = g;
    area[c] = 0.5 * a2;
  }
  std::vector<Point> out(mesh.vertex_count(), Point::Zero());
  for (int v = 0; v < static_cast<int>(mesh.vertex_count()); ++v) {
    double w = 0.0;
    for (int c : mesh.cells_of(v)) {
      out[v] += area[c] * cell_grad[c];
      w += area[c];
    }
    if (w > 0) out[v] /= w;
  }
  return out;
}

double classification_scale(const Eigen::Matrix2d& hessian, double H) {
  const Eigen::Matrix2d sym = 0.5 * (hessian + hessian.transpose());
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues();
  return std::max({std::abs(ev[0]), std::abs(ev[1]), H});
}

CriticalKind classify(const Eigen::Matrix2d& hessian, double scale, double degeneracy_tol) {
  const Eigen::Matrix2d sym = 0.5 * (hessian + hessian.transpose());
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues();
  const double band = degeneracy_tol * scale;
  if (ev[0] > band && ev[1] > band) return CriticalKind::Minimum;
  if (ev[0] < -band && ev[1] < -band) return CriticalKind::Maximum;
  if (ev[0] < -band && ev[1] > band) return CriticalKind::Saddle;
  return CriticalKind::Degenerate;
}

int nearest_vertex(const TriMesh& mesh, const Point& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < static_cast<int>(mesh.vertex_count()); ++v) {
    const double d = (mesh.vertex(v) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

std::vector<int> two_ring(const TriMesh& mesh, int vertex) {
  std::vector<int> ring{vertex};
  for (int n : mesh.neighbors(vertex)) {
    ring.push_back(n);
    for (int m : mesh.neighbors(n)) ring.push_back(m);
  }
  std::sort(ring.begin(), ring.end());
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  return ring;
}

QuadraticFit fit_quadratic(const ScalarField& field, const Point& center,
                           std::span<const int> vertices) {
  if (vertices.size() < 6)
    fail(ErrorKind::InvalidParameter, "quadratic fit needs at least 6 vertices");
  const TriMesh& mesh = *field.mesh;
  double scale = 0.0;
  for (int v : vertices) scale = std::max(scale, (mesh.vertex(v) - center).norm());
  if (!(scale > 0)) scale = 1.0;
  // Coordinates are scaled to unit size for conditioning.
  Eigen::MatrixXd A(static_cast<Eigen::Index>(vertices.size()), 6);
  Eigen::VectorXd b(static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const Point d = (mesh.vertex(vertices[k]) - center) / scale;
    const auto r = static_cast<Eigen::Index>(k);
    A.row(r) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    b[r] = field.values[vertices[k]];
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  QuadraticFit fit;
  fit.center = center;
  fit.value = x[0];
  fit.gradient = Point(x[1], x[2]) / scale;
  fit.hessian << x[3], x[4], x[4], x[5];
  fit.hessian /= scale * scale;
  fit.rms = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(vertices.size()));
  return fit;
}

int gradient_index(const ScalarField& field, std::span<const Point> loop, double grad_tol) {
  if (loop.size() < 3) fail(ErrorKind::InvalidParameter, "index loop needs >= 3 points");
  const TriMesh& mesh = *field.mesh;
  const std::vector<Point> grad = recover_gradient(field);
  const PointLocator locator(mesh);
  const double step = 0.25 * mesh.h();
  double total = 0.0;
  bool first = true;
  double prev = 0.0, first_angle = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point& a = loop[i];
    const Point& b = loop[(i + 1) % loop.size()];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int k = 0; k < pieces; ++k) {
      const Point p = a + (b - a) * (static_cast<double>(k) / pieces);
      const Point g = locator.interpolate(std::span<const Point>(grad), p);
      if (g.norm() < 10.0 * grad_tol) {
        std::ostringstream msg;
        msg << "ill-conditioned loop: |grad| = " << g.norm() << " below 10 grad_tol at ("
            << p.x() << ", " << p.y() << ")";
        fail(ErrorKind::IllConditionedLoop, msg.str());
      }
      const double ang = std::atan2(g.y(), g.x());
      if (first) {
        first_angle = prev = ang;
        first = false;
        continue;
      }
      total += std::remainder(ang - prev, kTwoPi);
      prev = ang;
    }
  }
  total += std::remainder(first_angle - prev, kTwoPi);
  return static_cast<int>(std::lround(total / kTwoPi));
}

int gradient_index(const ScalarField& field, std::span<const Point> loop,
                   const CriticalOptions& options) {
  double gmax = 0.0;
  for (const Point& g : recover_gradient(field)) gmax = std::max(gmax, g.norm());
  return gradient_index(field, loop, options.grad_tol_factor * gmax);
}

std::vector<Point> inward_offset_loop(const TriMesh& mesh, double distance) {
  const auto& edges = mesh.boundary_edges();
  const std::size_t n = edges.size();
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const BoundaryEdge& prev = edges[(k + n - 1) % n];
    const BoundaryEdge& cur = edges[k];
    const Point normal = (prev.normal + cur.normal).normalized();
    out.push_back(mesh.vertex(cur.a) - distance * normal);
  }
  return out;
}

std::vector<int> interior_max_scan(const ScalarField& field) {
  const TriMesh& mesh = *field.mesh;
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(mesh.vertex_count()); ++v) {
    if (mesh.is_boundary(v)) continue;
    const auto nbrs = mesh.neighbors(v);
    if (nbrs.empty()) continue;
    const bool strict_max = std::all_of(nbrs.begin(), nbrs.end(), [&](int n) {
      return field.values[v] > field.values[n];
    });
    if (strict_max) out.push_back(v);
  }
  return out;
}

CriticalAnalysis find_critical_points(const ScalarField& field, double H,
                                      const CriticalOptions& options) {
  const TriMesh& mesh = *field.mesh;
  const double h = mesh.h();
  const std::vector<Point> grad = recover_gradient(field);
  double gmax = 0.0;
  for (const Point& g : grad) gmax = std::max(gmax, g.norm());

  CriticalAnalysis out;
  out.grad_tol = options.grad_tol_factor * gmax;

  std::vector<int> cand;
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c) {
    const auto& t = mesh.cell(c);
    if (hull_contains_origin(grad[t[0]], grad[t[1]], grad[t[2]])) cand.push_back(c);
  }
  out.candidate_cells = static_cast<int>(cand.size());

  // Union-find clustering of candidate cells within the merge radius.
  const double radius = options.cluster_radius_factor * h;
  std::vector<int> parent(cand.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = i + 1; j < cand.size(); ++j)
      if ((mesh.centroid(cand[i]) - mesh.centroid(cand[j])).norm() <= radius)
        parent[find_root(parent, static_cast<int>(i))] = find_root(parent, static_cast<int>(j));
  std::vector<std::vector<int>> clusters;
  std::vector<int> cluster_of(cand.size(), -1);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const int root = find_root(parent, static_cast<int>(i));
    if (cluster_of[root] < 0) {
      cluster_of[root] = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    clusters[cluster_of[root]].push_back(cand[i]);
  }

  const PointLocator locator(mesh);
  for (const auto& cluster : clusters) {
    Point loc = Point::Zero();
    for (int c : cluster) loc += mesh.centroid(c);
    loc /= static_cast<double>(cluster.size());

    // Newton on the local quadratic model, re-centering the patch when the
    // step leaves it.
    QuadraticFit fit;
    for (int it = 0; it < 6; ++it) {
      const int v0 = nearest_vertex(mesh, loc);
      const auto patch = two_ring(mesh, v0);
      fit = fit_quadratic(field, loc, patch);
      const double det = fit.hessian.determinant();
      if (!(std::abs(det) > 1e-14 * std::max(1.0, fit.hessian.squaredNorm()))) break;
      const Point next = loc - fit.hessian.inverse() * fit.gradient;
      if (!locator.locate(next)) break;
      const double moved = (next - loc).norm();
      loc = next;
      if (moved < 1e-3 * h) break;
    }
    fit = fit_quadratic(field, loc, two_ring(mesh, nearest_vertex(mesh, loc)));

    const bool duplicate = std::any_of(out.records.begin(), out.records.end(), [&](const auto& r) {
      return (r.location - loc).norm() < 0.5 * h;
    });
    if (duplicate) continue;

    CriticalPointRecord rec;
    rec.location = loc;
    rec.value = fit.value;
    rec.hessian = 0.5 * (fit.hessian + fit.hessian.transpose());
    rec.gauss_curvature = rec.hessian.determinant();
    rec.scale = classification_scale(rec.hessian, H);
    rec.classification = classify(rec.hessian, rec.scale, options.degeneracy_tol);
    rec.grad_norm = locator.interpolate(std::span<const Point>(grad), loc).norm();

    const double r_index = std::min(options.index_radius_factor * h,
                                    0.8 * distance_to_boundary(mesh, loc));
    try {
      const auto loop = circle(loc, r_index, 96);
      rec.index = gradient_index(field, loop, out.grad_tol);
      rec.index_valid = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditionedLoop) throw;
      out.anomalies.push_back(std::string("index loop failed: ") + e.what());
    }
    out.records.push_back(rec);
  }

  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    if (a.location.x() != b.location.x()) return a.location.x() < b.location.x();
    return a.location.y() < b.location.y();
  });

  if (out.records.empty())
    out.anomalies.emplace_back("no interior critical point found on a converged field");
  for (const auto& r : out.records) {
    std::ostringstream where;
    where << "(" << r.location.x() << ", " << r.location.y() << ")";
    if (r.classification == CriticalKind::Degenerate)
      out.anomalies.push_back("degenerate critical point at " + where.str());
    if (r.index_valid) {
      const int expected = r.classification == CriticalKind::Saddle ? -1
                           : r.classification == CriticalKind::Degenerate ? r.index
                                                                          : 1;
      if (r.index != expected)
        out.anomalies.push_back("winding index " + std::to_string(r.index) +
                                " disagrees with classification at " + where.str());
    }
  }
  return out;
}

}  // namespace cmc
