#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cmc {

using Point = Eigen::Vector2d;

enum class DomainKind { Disk, Ellipse, RoundedPolygon };

// A strictly convex planar region described by its unit-speed boundary curve.
//
// The curve is stored as a dense table over arc length s in [0, L): position,
// unit tangent and signed curvature per sample. Positions are interpolated
// with periodic cubic Hermite segments (the tangent is the exact derivative),
// tangents likewise (their derivative is curvature times the inward normal),
// curvature linearly. The traversal is counterclockwise, so the outward
// normal is the tangent rotated by -90 degrees.
class ConvexDomain {
 public:
  struct Sample {
    Point position;
    Point tangent;
    double curvature = 0.0;
  };

  ConvexDomain(DomainKind kind, std::vector<Sample> table, double length,
               double area, bool smooth);

  DomainKind kind() const { return kind_; }
  double length() const { return length_; }
  double area() const { return area_; }
  const Point& centroid() const { return centroid_; }
  double diameter() const { return diameter_; }

  // False for boundaries that are only C^{1,1} (rounded polygons). Checks
  // that need a C^2 boundary are downgraded to warnings on such domains.
  bool is_smooth() const { return smooth_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  Point position(double s) const;
  Point tangent(double s) const;
  Point normal(double s) const;
  double curvature(double s) const;

  // Unsigned distance from p to the boundary curve.
  double distance_to_boundary(const Point& p) const;

  std::span<const Sample> samples() const { return table_; }

 private:
  double wrap(double s) const;

  DomainKind kind_;
  std::vector<Sample> table_;
  double length_;
  double area_;
  double ds_;
  bool smooth_;
  Point centroid_ = Point::Zero();
  double diameter_ = 0.0;
  std::vector<std::string> warnings_;
};

ConvexDomain make_disk(double radius);
ConvexDomain make_ellipse(double a, double b);
// Convex polygon (counterclockwise) with every corner replaced by a circular
// arc of radius r tangent to both adjacent edges.
ConvexDomain make_rounded_polygon(std::span<const Point> vertices, double r);

// Strict interior test against the tangent lines of the sampled boundary.
bool contains(const ConvexDomain& domain, const Point& p);

}  // namespace cmc
