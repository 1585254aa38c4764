#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmc/mc_operator.hpp"

namespace cmc {

// One-dimensional mean curvature solution X(x) = h + (1 - sqrt(1 - H^2 x^2)) / H
// on |x| < 1/H, the graph of a half cylinder of radius 1/H.
class Cylinder {
 public:
  Cylinder(double h_val, double H);

  double h_val() const { return h_; }
  double H() const { return H_; }
  double half_width() const { return 1.0 / H_; }

  // Throw OutOfDomain for |x| >= 1/H.
  double value(double x) const;
  double slope(double x) const;
  double second_derivative(double x) const;

 private:
  void check(double x) const;
  double h_;
  double H_;
};

Cylinder cylinder_solution(double h_val, double H);

// A closed-form function of the plane, with the set where it is defined.
struct AnalyticField {
  std::function<double(const Point&)> eval;
  std::function<bool(const Point&)> defined;  // empty means everywhere
  std::string description;

  double operator()(const Point& p) const { return eval(p); }
  bool is_defined(const Point& p) const { return !defined || defined(p); }
};

// X(d . (x - center)) with d = (cos angle, sin angle); the cylinder bends
// along d and is straight in the perpendicular direction.
AnalyticField cylinder_field(const Cylinder& X, const Point& center, double angle = 0.0);

// q(x) = u0 + lambda1 x1^2 / 2 + lambda2 x2^2 / 2.
AnalyticField quadratic_model(double u0, double lambda1, double lambda2);
// q(x) = u0 + (x - center)^T hessian (x - center) / 2.
AnalyticField quadratic_model(double u0, const Point& center, const Eigen::Matrix2d& hessian);

struct DifferenceField {
  ScalarField field;
  bool clipped = false;
  // Empty unless clipped; describes the cells kept.
  std::string subdomain;
  std::vector<int> vertex_map;  // new vertex -> original vertex when clipped
};

// field - analytic at every vertex. When the analytic function is undefined
// at some vertices, the mesh is restricted to the cells where it is defined
// everywhere and the working subdomain is reported.
DifferenceField difference_field(const ScalarField& field, const AnalyticField& analytic);

struct NodalArcSet {
  std::vector<std::vector<Point>> arcs;
  std::optional<Point> junction;
};

// Zero set of a P1 field by marching triangles. Zero vertex values count as
// +1e-12 max|field|. When two or more curves pass within 2h of each other
// they are treated as crossing at a junction and split there into rays.
NodalArcSet trace_nodal_set(const ScalarField& field);

// Sign changes of the field on 720 samples of the circle |x - p| = r.
// Needs r >= 4h and the circle inside the mesh.
int sector_count(const ScalarField& field, const Point& p, double r);

struct LeadingOrderFit {
  double k = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double residual = 0.0;   // RMS misfit of log max|f| against k log r + const
  double amplitude = 0.0;  // exp(const); indicative only
};

// Slope of log max_{|x-p|=r} |field| against log r over 12 radii spaced
// geometrically in [r_min, r_max].
LeadingOrderFit leading_order_fit(const ScalarField& field, const Point& p, double r_min,
                                  double r_max);
// Window [2h, min(0.3 diam, dist(p, boundary) / 2)].
LeadingOrderFit leading_order_fit(const ScalarField& field, const Point& p);

}  // namespace cmc
