#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmc/mc_operator.hpp"

namespace cmc {

enum class CriticalKind { Minimum, Maximum, Saddle, Degenerate };
const char* to_string(CriticalKind kind);

struct CriticalPointRecord {
  Point location;
  double value = 0.0;
  double grad_norm = 0.0;  // recovered gradient magnitude at location
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  double gauss_curvature = 0.0;  // det(hessian)
  double scale = 0.0;            // max(|eigenvalues|, H)
  CriticalKind classification = CriticalKind::Degenerate;
  int index = 0;  // winding number of the gradient on a small circle
  bool index_valid = false;
};

struct CriticalOptions {
  double grad_tol_factor = 1e-3;  // grad_tol = factor * max |recovered gradient|
  double degeneracy_tol = 1e-2;
  double cluster_radius_factor = 2.0;  // times mesh h
  double index_radius_factor = 3.0;    // times mesh h
};

struct CriticalAnalysis {
  std::vector<CriticalPointRecord> records;
  std::vector<std::string> anomalies;
  double grad_tol = 0.0;
  int candidate_cells = 0;

  int count(CriticalKind kind) const;
};

// Area-weighted average of the adjacent cell gradients at each vertex.
std::vector<Point> recover_gradient(const ScalarField& field);

CriticalAnalysis find_critical_points(const ScalarField& field, double H,
                                      const CriticalOptions& options = {});

double classification_scale(const Eigen::Matrix2d& hessian, double H);
// Eigenvalue signs with a dead band of degeneracy_tol * scale.
CriticalKind classify(const Eigen::Matrix2d& hessian, double scale,
                      double degeneracy_tol = 1e-2);

// Winding number of the recovered gradient along the closed polyline `loop`.
// Throws IllConditionedLoop when |gradient| < 10 grad_tol somewhere on it.
int gradient_index(const ScalarField& field, std::span<const Point> loop, double grad_tol);
int gradient_index(const ScalarField& field, std::span<const Point> loop,
                   const CriticalOptions& options = {});

// The outer boundary loop moved inward by `distance` along vertex normals.
std::vector<Point> inward_offset_loop(const TriMesh& mesh, double distance);

// Interior vertices strictly greater than every mesh neighbor.
std::vector<int> interior_max_scan(const ScalarField& field);

struct QuadraticFit {
  Point center;
  double value = 0.0;
  Point gradient = Point::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  double rms = 0.0;
};

// Least-squares fit u(x) ~ value + gradient.(x-c) + (x-c)^T hessian (x-c) / 2
// over the given vertices.
QuadraticFit fit_quadratic(const ScalarField& field, const Point& center,
                           std::span<const int> vertices);
std::vector<int> two_ring(const TriMesh& mesh, int vertex);
int nearest_vertex(const TriMesh& mesh, const Point& p);

}  // namespace cmc
