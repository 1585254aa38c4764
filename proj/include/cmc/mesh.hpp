#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmc/geometry.hpp"

namespace cmc {

// Outer edges carry the boundary condition; axis edges are the symmetry line
// of a meridian half-domain and carry no flux.
enum class EdgeKind : std::uint8_t { Outer, Axis };

struct BoundaryEdge {
  int a = 0;  // loop order: the cell lies to the left of a -> b
  int b = 0;
  Point normal;  // outward unit normal
  double length = 0.0;
  EdgeKind kind = EdgeKind::Outer;
};

// Closed counterclockwise boundary polyline; kinds[i] labels the edge from
// points[i] to points[i+1].
struct BoundaryLoop {
  std::vector<Point> points;
  std::vector<EdgeKind> kinds;
};

class TriMesh {
 public:
  TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
          std::vector<BoundaryEdge> boundary_edges);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t cell_count() const { return cells_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::array<int, 3>& cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  std::span<const int> neighbors(int v) const;
  std::span<const int> cells_of(int v) const;
  bool is_boundary(int v) const { return on_boundary_[static_cast<std::size_t>(v)] != 0; }

  double signed_area(int c) const;
  Point centroid(int c) const;

  double h() const { return h_; }
  double min_angle_deg() const;
  double total_area() const;
  double boundary_length() const;
  std::uint64_t hash() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<char> on_boundary_;
  std::vector<int> nbr_offsets_, nbr_list_;
  std::vector<int> cell_offsets_, cell_list_;
  double h_ = 0.0;
};

// Euclidean distance from p to the nearest boundary edge.
double distance_to_boundary(const TriMesh& mesh, const Point& p);
// Largest distance between two boundary vertices.
double boundary_diameter(const TriMesh& mesh);

// The mesh restricted to the given cells. Vertices are renumbered in
// ascending original order; vertex_map[new] = old. Boundary edges are the
// single-use edges of the kept cells, chained into loops.
struct SubMesh {
  TriMesh mesh;
  std::vector<int> vertex_map;
};
SubMesh submesh(const TriMesh& mesh, std::span<const int> cells);

struct MeshOptions {
  double min_angle_deg = 20.0;
  int max_smoothing_passes = 40;
  // Interior lattice points closer than this fraction of h_target to the
  // boundary are discarded before triangulation.
  double boundary_clearance = 0.55;
  double max_edge_factor = 1.5;
  // Interior edges longer than this multiple of h_target get a midpoint.
  double split_factor = 1.4;
};

TriMesh triangulate(const ConvexDomain& domain, double h_target,
                    const MeshOptions& options = {});

// Triangulates the convex region bounded by `loop`. Interior vertices come
// from a hexagonal lattice of spacing h_target anchored at `lattice_origin`,
// followed by Laplacian smoothing with re-triangulation until the minimum
// angle target is met.
TriMesh triangulate_loop(const BoundaryLoop& loop, double h_target,
                         const Point& lattice_origin,
                         const MeshOptions& options = {});

// Barycentric point location on a mesh, bucketed on a uniform grid.
class PointLocator {
 public:
  struct Hit {
    int cell = -1;
    std::array<double, 3> bary{};
  };

  explicit PointLocator(const TriMesh& mesh);

  // Cell containing p, within a small tolerance of the mesh boundary.
  std::optional<Hit> locate(const Point& p) const;
  // As locate, but points outside the mesh snap to the nearest cell with
  // clamped barycentric weights.
  Hit locate_clamped(const Point& p) const;

  double interpolate(std::span<const double> values, const Point& p) const;
  Point interpolate(std::span<const Point> values, const Point& p) const;

 private:
  std::array<double, 3> barycentric(int c, const Point& p) const;

  const TriMesh* mesh_;
  Point lo_;
  double cell_size_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace cmc
