#include "cmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cmc/error.hpp"
#include "delaunay.hpp"

namespace cmc {
namespace {

double cell_min_angle(const Point& a, const Point& b, const Point& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  auto angle = [](double opp, double s1, double s2) {
    return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2), -1.0, 1.0));
  };
  return std::min({angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)}) *
         180.0 / std::numbers::pi;
}

double min_angle(std::span<const Point> pts, std::span<const std::array<int, 3>> cells) {
  double best = 180.0;
  for (const auto& c : cells)
    best = std::min(best, cell_min_angle(pts[c[0]], pts[c[1]], pts[c[2]]));
  return best;
}

void build_csr(std::size_t n, const std::vector<std::vector<int>>& lists,
               std::vector<int>& offsets, std::vector<int>& flat) {
  offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    offsets[i + 1] = offsets[i] + static_cast<int>(lists[i].size());
  flat.clear();
  flat.reserve(static_cast<std::size_t>(offsets[n]));
  for (const auto& l : lists) flat.insert(flat.end(), l.begin(), l.end());
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

}  // namespace

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
                 std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      boundary_edges_(std::move(boundary_edges)) {
  const std::size_t n = vertices_.size();
  std::vector<std::vector<int>> nbrs(n), vcells(n);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& t = cells_[c];
    for (int i = 0; i < 3; ++i) {
      if (t[i] < 0 || static_cast<std::size_t>(t[i]) >= n)
        fail(ErrorKind::MeshQualityFailure, "cell references a missing vertex");
      vcells[t[i]].push_back(static_cast<int>(c));
      for (int j = 0; j < 3; ++j)
        if (j != i) nbrs[t[i]].push_back(t[j]);
      h_ = std::max(h_, (vertices_[t[i]] - vertices_[t[(i + 1) % 3]]).norm());
    }
  }
  for (auto& l : nbrs) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  build_csr(n, nbrs, nbr_offsets_, nbr_list_);
  build_csr(n, vcells, cell_offsets_, cell_list_);
  on_boundary_.assign(n, 0);
  for (const auto& e : boundary_edges_) on_boundary_[e.a] = on_boundary_[e.b] = 1;
}

std::span<const int> TriMesh::neighbors(int v) const {
  return {nbr_list_.data() + nbr_offsets_[v],
          static_cast<std::size_t>(nbr_offsets_[v + 1] - nbr_offsets_[v])};
}

std::span<const int> TriMesh::cells_of(int v) const {
  return {cell_list_.data() + cell_offsets_[v],
          static_cast<std::size_t>(cell_offsets_[v + 1] - cell_offsets_[v])};
}

double TriMesh::signed_area(int c) const {
  const auto& t = cell(c);
  return 0.5 * detail::orient(vertex(t[0]), vertex(t[1]), vertex(t[2]));
}

Point TriMesh::centroid(int c) const {
  const auto& t = cell(c);
  return (vertex(t[0]) + vertex(t[1]) + vertex(t[2])) / 3.0;
}

double TriMesh::min_angle_deg() const { return min_angle(vertices_, cells_); }

double TriMesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c) a += signed_area(c);
  return a;
}

double TriMesh::boundary_length() const {
  double l = 0.0;
  for (const auto& e : boundary_edges_) l += e.length;
  return l;
}

std::uint64_t TriMesh::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Point& p : vertices_) {
    const double xy[2] = {p.x(), p.y()};
    mix(xy, sizeof xy);
  }
  for (const auto& c : cells_) mix(c.data(), sizeof(int) * 3);
  return h;
}

namespace {

// Cells of the hull triangulation lying outside the boundary loop (the first
// nb points, counterclockwise). Nearly collinear boundary samples leave
// slivers between the loop and the convex hull; they are reached from the
// hull without crossing a loop edge.
std::vector<std::array<int, 3>> drop_exterior(const std::vector<std::array<int, 3>>& cells,
                                              std::size_t nb) {
  const int n = static_cast<int>(nb);
  auto loop_dir = [n](int a, int b) {
    if (a >= n || b >= n) return 0;
    if ((a + 1) % n == b) return 1;
    if ((b + 1) % n == a) return -1;
    return 0;
  };
  std::map<std::pair<int, int>, std::vector<int>> owners;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int i = 0; i < 3; ++i) owners[std::minmax(cells[c][i], cells[c][(i + 1) % 3])].push_back(c);

  std::vector<char> outside(cells.size(), 0);
  std::vector<int> queue;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int i = 0; i < 3; ++i) {
      const int a = cells[c][i], b = cells[c][(i + 1) % 3];
      const int dir = loop_dir(a, b);
      const bool hull = owners[std::minmax(a, b)].size() == 1;
      if (!outside[c] && (dir == -1 || (hull && dir != 1))) {
        outside[c] = 1;
        queue.push_back(c);
      }
    }
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const auto t = cells[static_cast<std::size_t>(queue[k])];
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      if (loop_dir(a, b) != 0) continue;
      for (int o : owners[std::minmax(a, b)])
        if (!outside[o]) {
          outside[o] = 1;
          queue.push_back(o);
        }
    }
  }
  std::vector<std::array<int, 3>> kept;
  kept.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!outside[c]) kept.push_back(cells[c]);
  return kept;
}

}  // namespace

TriMesh triangulate_loop(const BoundaryLoop& loop, double h_target,
                         const Point& lattice_origin, const MeshOptions& options) {
  const std::size_t nb = loop.points.size();
  if (nb < 3 || loop.kinds.size() != nb)
    fail(ErrorKind::InvalidParameter, "boundary loop needs >= 3 points and one kind per edge");
  if (!(h_target > 0)) fail(ErrorKind::InvalidParameter, "h_target must be positive");

  Point lo = loop.points[0], hi = loop.points[0];
  for (const Point& p : loop.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  std::vector<Point> pts(loop.points);
  const double dy = 0.5 * std::sqrt(3.0) * h_target;
  const long j0 = static_cast<long>(std::floor((lo.y() - lattice_origin.y()) / dy)) - 1;
  const long j1 = static_cast<long>(std::ceil((hi.y() - lattice_origin.y()) / dy)) + 1;
  const long i0 = static_cast<long>(std::floor((lo.x() - lattice_origin.x()) / h_target)) - 2;
  const long i1 = static_cast<long>(std::ceil((hi.x() - lattice_origin.x()) / h_target)) + 2;
  const double clearance = options.boundary_clearance * h_target;
  for (long j = j0; j <= j1; ++j) {
    const double shift = (j % 2 != 0) ? 0.5 : 0.0;
    for (long i = i0; i <= i1; ++i) {
      const Point p(lattice_origin.x() + (static_cast<double>(i) + shift) * h_target,
                    lattice_origin.y() + static_cast<double>(j) * dy);
      bool keep = true;
      for (std::size_t k = 0; k < nb && keep; ++k) {
        const Point& a = loop.points[k];
        const Point& b = loop.points[(k + 1) % nb];
        keep = detail::orient(a, b, p) > 0 && segment_distance(p, a, b) >= clearance;
      }
      if (keep) pts.push_back(p);
    }
  }

  // Passes alternate between splitting over-long edges and Laplacian
  // smoothing of interior vertices until both quality targets hold.
  const double max_edge = options.max_edge_factor * h_target;
  std::vector<std::array<int, 3>> best_cells;
  std::vector<Point> best_pts;
  double best_angle = -1.0, best_edge = 0.0;
  bool done = false;
  for (int pass = 0; pass <= options.max_smoothing_passes && !done; ++pass) {
    auto cells = drop_exterior(detail::delaunay(pts), nb);
    const double angle = min_angle(pts, cells);
    std::map<std::pair<int, int>, double> long_edges;
    double longest = 0.0;
    for (const auto& c : cells)
      for (int i = 0; i < 3; ++i) {
        const double len = (pts[c[i]] - pts[c[(i + 1) % 3]]).norm();
        longest = std::max(longest, len);
        if (len > options.split_factor * h_target)
          long_edges.emplace(std::minmax(c[i], c[(i + 1) % 3]), len);
      }
    const bool edges_ok = longest <= max_edge;
    if (best_angle < 0 || (edges_ok && best_edge > max_edge) ||
        (edges_ok == (best_edge <= max_edge) && angle > best_angle)) {
      best_angle = angle;
      best_edge = longest;
      best_cells = cells;
      best_pts = pts;
    }
    if (angle >= options.min_angle_deg && edges_ok) {
      done = true;
      break;
    }

    if (!long_edges.empty() && pass < options.max_smoothing_passes / 2) {
      for (const auto& [e, len] : long_edges) pts.push_back(0.5 * (pts[e.first] + pts[e.second]));
      continue;
    }
    std::vector<Point> sum(pts.size(), Point::Zero());
    std::vector<int> count(pts.size(), 0);
    for (const auto& c : cells)
      for (int i = 0; i < 3; ++i)
        for (int k = 1; k < 3; ++k) {
          sum[c[i]] += pts[c[(i + k) % 3]];
          ++count[c[i]];
        }
    for (std::size_t v = nb; v < pts.size(); ++v)
      if (count[v] > 0) pts[v] = sum[v] / count[v];
  }
  if (best_angle < options.min_angle_deg || best_edge > max_edge) {
    std::ostringstream msg;
    msg << "triangulation reached minimum angle " << best_angle << " deg (target "
        << options.min_angle_deg << ") and longest edge " << best_edge << " (limit "
        << max_edge << ") with " << best_pts.size() << " vertices";
    fail(ErrorKind::MeshQualityFailure, msg.str());
  }

  // Boundary edges of the triangulation must be exactly the loop edges.
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& c : best_cells)
    for (int i = 0; i < 3; ++i) ++edge_use[std::minmax(c[i], c[(i + 1) % 3])];
  std::size_t single = 0;
  for (const auto& [e, n] : edge_use) single += (n == 1);
  std::vector<BoundaryEdge> edges;
  edges.reserve(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const int a = static_cast<int>(k), b = static_cast<int>((k + 1) % nb);
    auto it = edge_use.find(std::minmax(a, b));
    if (it == edge_use.end() || it->second != 1)
      fail(ErrorKind::MeshQualityFailure, "triangulation lost a boundary loop edge");
    const Point d = best_pts[b] - best_pts[a];
    const double len = d.norm();
    edges.push_back({a, b, Point(d.y(), -d.x()) / len, len, loop.kinds[k]});
  }
  if (single != nb)
    fail(ErrorKind::MeshQualityFailure, "triangulation boundary is not a single closed loop");

  TriMesh mesh(std::move(best_pts), std::move(best_cells), std::move(edges));
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c)
    if (!(mesh.signed_area(c) > 0))
      fail(ErrorKind::MeshQualityFailure, "triangulation produced a non-positive cell");
  return mesh;
}

double distance_to_boundary(const TriMesh& mesh, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.boundary_edges()) {
    const Point& a = mesh.vertex(e.a);
    const Point ab = mesh.vertex(e.b) - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (a + t * ab - p).norm());
  }
  return d;
}

double boundary_diameter(const TriMesh& mesh) {
  double d = 0.0;
  const auto& e = mesh.boundary_edges();
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j)
      d = std::max(d, (mesh.vertex(e[i].a) - mesh.vertex(e[j].a)).norm());
  return d;
}

SubMesh submesh(const TriMesh& mesh, std::span<const int> cells) {
  std::vector<int> keep(cells.begin(), cells.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) fail(ErrorKind::InvalidParameter, "submesh needs at least one cell");

  std::vector<int> renum(mesh.vertex_count(), -1);
  for (int c : keep)
    for (int v : mesh.cell(c)) renum[v] = 0;
  SubMesh out{TriMesh({}, {}, {}), {}};
  std::vector<Point> verts;
  for (std::size_t v = 0; v < renum.size(); ++v)
    if (renum[v] == 0) {
      renum[v] = static_cast<int>(out.vertex_map.size());
      out.vertex_map.push_back(static_cast<int>(v));
      verts.push_back(mesh.vertices()[v]);
    }
  std::vector<std::array<int, 3>> tris;
  std::map<std::pair<int, int>, int> use;
  for (int c : keep) {
    const auto& t = mesh.cell(c);
    tris.push_back({renum[t[0]], renum[t[1]], renum[t[2]]});
    for (int i = 0; i < 3; ++i) {
      const int a = tris.back()[i], b = tris.back()[(i + 1) % 3];
      ++use[{std::min(a, b), std::max(a, b)}];
    }
  }
  // Directed single-use edges, cell on the left.
  std::map<int, int> next;
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      if (use[{std::min(a, b), std::max(a, b)}] == 1) next[a] = b;
    }
  std::vector<BoundaryEdge> edges;
  std::set<int> done;
  for (const auto& [start, unused] : next) {
    if (done.count(start)) continue;
    int a = start;
    while (!done.count(a)) {
      done.insert(a);
      const int b = next.at(a);
      BoundaryEdge e;
      e.a = a;
      e.b = b;
      const Point d = verts[b] - verts[a];
      e.length = d.norm();
      e.normal = Point(d.y(), -d.x()) / e.length;
      edges.push_back(e);
      a = b;
    }
  }
  out.mesh = TriMesh(std::move(verts), std::move(tris), std::move(edges));
  return out;
}

TriMesh triangulate(const ConvexDomain& domain, double h_target, const MeshOptions& options) {
  if (!(h_target > 0) || !(h_target < domain.length() / 8))
    fail(ErrorKind::InvalidParameter, "h_target must satisfy 0 < h_target < L/8");
  // Boundary spacing strictly below h_target; the extra point keeps the
  // chord area deficit of coarse meshes down.
  const auto n = static_cast<std::size_t>(std::ceil(domain.length() / h_target)) + 1;
  BoundaryLoop loop;
  loop.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    loop.points.push_back(domain.position(domain.length() * static_cast<double>(k) /
                                          static_cast<double>(n)));
  loop.kinds.assign(n, EdgeKind::Outer);
  return triangulate_loop(loop, h_target, domain.centroid(), options);
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  Point lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const Point& p : mesh.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  cell_size_ = std::max(2.0 * mesh.h(), 1e-12);
  lo_ = lo - Point::Constant(1e-9 * cell_size_);
  nx_ = static_cast<int>((hi.x() - lo_.x()) / cell_size_) + 1;
  ny_ = static_cast<int>((hi.y() - lo_.y()) / cell_size_) + 1;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  for (int c = 0; c < static_cast<int>(mesh.cell_count()); ++c) {
    const auto& t = mesh.cell(c);
    Point clo = mesh.vertex(t[0]), chi = clo;
    for (int v : t) {
      clo = clo.cwiseMin(mesh.vertex(v));
      chi = chi.cwiseMax(mesh.vertex(v));
    }
    const int ix0 = std::clamp(static_cast<int>((clo.x() - lo_.x()) / cell_size_), 0, nx_ - 1);
    const int ix1 = std::clamp(static_cast<int>((chi.x() - lo_.x()) / cell_size_), 0, nx_ - 1);
    const int iy0 = std::clamp(static_cast<int>((clo.y() - lo_.y()) / cell_size_), 0, ny_ - 1);
    const int iy1 = std::clamp(static_cast<int>((chi.y() - lo_.y()) / cell_size_), 0, ny_ - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) buckets_[static_cast<std::size_t>(iy * nx_ + ix)].push_back(c);
  }
}

std::array<double, 3> PointLocator::barycentric(int c, const Point& p) const {
  const auto& t = mesh_->cell(c);
  const Point& a = mesh_->vertex(t[0]);
  const Point& b = mesh_->vertex(t[1]);
  const Point& d = mesh_->vertex(t[2]);
  const double area2 = detail::orient(a, b, d);
  const double l0 = detail::orient(p, b, d) / area2;
  const double l1 = detail::orient(a, p, d) / area2;
  return {l0, l1, 1.0 - l0 - l1};
}

std::optional<PointLocator::Hit> PointLocator::locate(const Point& p) const {
  const int ix = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_size_));
  const int iy = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_size_));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return std::nullopt;
  constexpr double kTol = 1e-10;
  for (int c : buckets_[static_cast<std::size_t>(iy * nx_ + ix)]) {
    auto l = barycentric(c, p);
    if (l[0] >= -kTol && l[1] >= -kTol && l[2] >= -kTol) {
      for (double& x : l) x = std::max(x, 0.0);
      const double s = l[0] + l[1] + l[2];
      for (double& x : l) x /= s;
      return Hit{c, l};
    }
  }
  return std::nullopt;
}

PointLocator::Hit PointLocator::locate_clamped(const Point& p) const {
  if (auto hit = locate(p)) return *hit;
  // Project onto the nearest boundary edge and step slightly inward.
  const BoundaryEdge* best = nullptr;
  double best_d = 0.0;
  Point best_q;
  for (const auto& e : mesh_->boundary_edges()) {
    const Point& a = mesh_->vertex(e.a);
    const Point& b = mesh_->vertex(e.b);
    const Point ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 1e-9, 1.0 - 1e-9);
    const Point q = a + t * ab;
    const double d = (q - p).norm();
    if (!best || d < best_d) {
      best = &e;
      best_d = d;
      best_q = q;
    }
  }
  const Point inner = best_q - 1e-9 * mesh_->h() * best->normal;
  if (auto hit = locate(inner)) return *hit;
  fail(ErrorKind::OutOfDomain, "point location failed near the mesh boundary");
}

double PointLocator::interpolate(std::span<const double> values, const Point& p) const {
  const Hit hit = locate_clamped(p);
  const auto& t = mesh_->cell(hit.cell);
  return hit.bary[0] * values[t[0]] + hit.bary[1] * values[t[1]] + hit.bary[2] * values[t[2]];
}

Point PointLocator::interpolate(std::span<const Point> values, const Point& p) const {
  const Hit hit = locate_clamped(p);
  const auto& t = mesh_->cell(hit.cell);
  return hit.bary[0] * values[t[0]] + hit.bary[1] * values[t[1]] + hit.bary[2] * values[t[2]];
}

}  // namespace cmc
