#include "cmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmc/error.hpp"

namespace cmc {
namespace {

constexpr std::size_t kTableSize = 8192;
constexpr double kPi = std::numbers::pi;

Point rotate_left(const Point& v) { return {-v.y(), v.x()}; }
Point rotate_right(const Point& v) { return {v.y(), -v.x()}; }

double cross(const Point& a, const Point& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Point polygon_centroid(std::span<const ConvexDomain::Sample> table) {
  double a2 = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Point& p = table[i].position;
    const Point& q = table[(i + 1) % table.size()].position;
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
  }
  return c / (3.0 * a2);
}

double table_diameter(std::span<const ConvexDomain::Sample> table) {
  const std::size_t stride = std::max<std::size_t>(1, table.size() / 1024);
  double best = 0.0;
  for (std::size_t i = 0; i < table.size(); i += stride)
    for (std::size_t j = i + stride; j < table.size(); j += stride)
      best = std::max(best, (table[i].position - table[j].position).norm());
  return best;
}

// Piecewise description of a rounded polygon boundary, traversed at unit
// speed starting from the first straight segment.
struct Piece {
  bool arc = false;
  Point start;      // segment start
  Point direction;  // segment unit direction
  Point center;     // arc center
  double phi0 = 0;  // arc start angle
  double radius = 0;
  double length = 0;
};

ConvexDomain::Sample eval_piece(const Piece& p, double s) {
  if (!p.arc) return {p.start + s * p.direction, p.direction, 0.0};
  const double phi = p.phi0 + s / p.radius;
  const Point radial(std::cos(phi), std::sin(phi));
  return {p.center + p.radius * radial, rotate_left(radial), 1.0 / p.radius};
}

}  // namespace

ConvexDomain::ConvexDomain(DomainKind kind, std::vector<Sample> table,
                           double length, double area, bool smooth)
    : kind_(kind),
      table_(std::move(table)),
      length_(length),
      area_(area),
      ds_(length / static_cast<double>(table_.size())),
      smooth_(smooth) {
  centroid_ = polygon_centroid(table_);
  diameter_ = table_diameter(table_);
  if (!smooth_)
    warnings_.emplace_back(
        "non-smooth corner curvature: boundary is only C^{1,1}; checks that "
        "need a C^2 boundary are reported as warnings");
}

double ConvexDomain::wrap(double s) const {
  double w = std::fmod(s, length_);
  if (w < 0) w += length_;
  return w;
}

Point ConvexDomain::position(double s) const {
  const double w = wrap(s) / ds_;
  const std::size_t j = std::min(static_cast<std::size_t>(w), table_.size() - 1);
  const double u = w - static_cast<double>(j);
  const Sample& a = table_[j];
  const Sample& b = table_[(j + 1) % table_.size()];
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * a.position + (u3 - 2 * u2 + u) * ds_ * a.tangent +
         (-2 * u3 + 3 * u2) * b.position + (u3 - u2) * ds_ * b.tangent;
}

Point ConvexDomain::tangent(double s) const {
  const double w = wrap(s) / ds_;
  const std::size_t j = std::min(static_cast<std::size_t>(w), table_.size() - 1);
  const double u = w - static_cast<double>(j);
  const Sample& a = table_[j];
  const Sample& b = table_[(j + 1) % table_.size()];
  const double u2 = u * u, u3 = u2 * u;
  const Point t = (2 * u3 - 3 * u2 + 1) * a.tangent +
                  (u3 - 2 * u2 + u) * ds_ * a.curvature * rotate_left(a.tangent) +
                  (-2 * u3 + 3 * u2) * b.tangent +
                  (u3 - u2) * ds_ * b.curvature * rotate_left(b.tangent);
  return t.normalized();
}

Point ConvexDomain::normal(double s) const { return rotate_right(tangent(s)); }

double ConvexDomain::curvature(double s) const {
  const double w = wrap(s) / ds_;
  const std::size_t j = std::min(static_cast<std::size_t>(w), table_.size() - 1);
  const double u = w - static_cast<double>(j);
  return (1 - u) * table_[j].curvature +
         u * table_[(j + 1) % table_.size()].curvature;
}

double ConvexDomain::distance_to_boundary(const Point& p) const {
  std::size_t best = 0;
  double best_d2 = (table_[0].position - p).squaredNorm();
  for (std::size_t i = 1; i < table_.size(); ++i) {
    const double d2 = (table_[i].position - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  // Refine against the two chords adjacent to the nearest sample.
  double d = std::sqrt(best_d2);
  const std::size_t n = table_.size();
  for (std::size_t k : {(best + n - 1) % n, best}) {
    const Point& a = table_[k].position;
    const Point& b = table_[(k + 1) % n].position;
    const Point ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (a + t * ab - p).norm());
  }
  return d;
}

ConvexDomain make_disk(double radius) {
  if (!(radius > 0) || !std::isfinite(radius))
    fail(ErrorKind::InvalidParameter, "disk radius must be positive");
  const double length = 2 * kPi * radius;
  std::vector<ConvexDomain::Sample> table(kTableSize);
  for (std::size_t i = 0; i < kTableSize; ++i) {
    const double theta = 2 * kPi * static_cast<double>(i) / kTableSize;
    const Point radial(std::cos(theta), std::sin(theta));
    table[i] = {radius * radial, rotate_left(radial), 1.0 / radius};
  }
  return ConvexDomain(DomainKind::Disk, std::move(table), length,
                      kPi * radius * radius, true);
}

ConvexDomain make_ellipse(double a, double b) {
  if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
    fail(ErrorKind::InvalidParameter, "ellipse semi-axes must be positive");
  using boost::math::quadrature::gauss_kronrod;
  auto speed = [=](double th) {
    const double s = std::sin(th), c = std::cos(th);
    return std::sqrt(a * a * s * s + b * b * c * c);
  };
  const double length =
      gauss_kronrod<double, 31>::integrate(speed, 0.0, 2 * kPi, 15, 1e-15);

  // Cumulative arc length on a uniform angle grid, then Newton inversion of
  // S(theta) = s for every table abscissa.
  constexpr std::size_t kGrid = 2048;
  std::vector<double> cum(kGrid + 1, 0.0);
  for (std::size_t k = 0; k < kGrid; ++k) {
    const double t0 = 2 * kPi * static_cast<double>(k) / kGrid;
    const double t1 = 2 * kPi * static_cast<double>(k + 1) / kGrid;
    cum[k + 1] = cum[k] + gauss_kronrod<double, 15>::integrate(speed, t0, t1, 0);
  }
  // Rescale so the grid total agrees with the adaptive length exactly.
  for (double& c : cum) c *= length / cum[kGrid];

  std::vector<ConvexDomain::Sample> table(kTableSize);
  std::size_t k = 0;
  for (std::size_t i = 0; i < kTableSize; ++i) {
    const double s = length * static_cast<double>(i) / kTableSize;
    while (k + 1 < kGrid && cum[k + 1] <= s) ++k;
    const double t0 = 2 * kPi * static_cast<double>(k) / kGrid;
    double th = t0 + (s - cum[k]) / speed(t0);
    for (int it = 0; it < 8; ++it) {
      const double f =
          cum[k] + gauss_kronrod<double, 15>::integrate(speed, t0, th, 0) - s;
      th -= f / speed(th);
      if (std::abs(f) < 1e-15 * length) break;
    }
    const double sp = speed(th);
    const double st = std::sin(th), ct = std::cos(th);
    table[i] = {Point(a * ct, b * st), Point(-a * st, b * ct) / sp,
                a * b / (sp * sp * sp)};
  }
  return ConvexDomain(DomainKind::Ellipse, std::move(table), length, kPi * a * b,
                      true);
}

ConvexDomain make_rounded_polygon(std::span<const Point> vertices, double r) {
  const std::size_t n = vertices.size();
  if (n < 3) fail(ErrorKind::InvalidParameter, "rounded polygon needs >= 3 vertices");
  if (!(r > 0) || !std::isfinite(r))
    fail(ErrorKind::InvalidParameter, "rounding radius must be positive");

  std::vector<Point> dir(n);
  std::vector<double> edge_len(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = vertices[(i + 1) % n] - vertices[i];
    edge_len[i] = e.norm();
    if (!(edge_len[i] > 0))
      fail(ErrorKind::InvalidParameter, "rounded polygon has a repeated vertex");
    dir[i] = e / edge_len[i];
  }
  // Exterior (turning) angle at vertex i, between edge i-1 and edge i.
  std::vector<double> turn(n);
  double total_turn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& d0 = dir[(i + n - 1) % n];
    const Point& d1 = dir[i];
    turn[i] = std::atan2(cross(d0, d1), d0.dot(d1));
    if (!(turn[i] > 1e-12))
      fail(ErrorKind::InvalidParameter,
           "rounded polygon vertices must be strictly convex and counterclockwise");
    total_turn += turn[i];
  }
  if (std::abs(total_turn - 2 * kPi) > 1e-9)
    fail(ErrorKind::InvalidParameter, "rounded polygon vertex list is not a simple convex loop");

  const double shortest = *std::min_element(edge_len.begin(), edge_len.end());
  if (!(r < 0.5 * shortest))
    fail(ErrorKind::InvalidParameter, "rounding radius must be below half the shortest edge");
  std::vector<double> cut(n);
  for (std::size_t i = 0; i < n; ++i) cut[i] = r * std::tan(0.5 * turn[i]);
  for (std::size_t i = 0; i < n; ++i)
    if (cut[i] + cut[(i + 1) % n] > edge_len[i])
      fail(ErrorKind::InvalidParameter, "rounding radius too large for a corner");

  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    Piece seg;
    seg.start = vertices[i] + cut[i] * dir[i];
    seg.direction = dir[i];
    seg.length = edge_len[i] - cut[i] - cut[j];
    const Point end = vertices[j] - cut[j] * dir[i];
    if (seg.length > 0) pieces.push_back(seg);
    Piece arc;
    arc.arc = true;
    arc.radius = r;
    arc.center = end + r * rotate_left(dir[i]);
    const Point rel = end - arc.center;
    arc.phi0 = std::atan2(rel.y(), rel.x());
    arc.length = r * turn[j];
    pieces.push_back(arc);
  }

  double length = 0.0;
  double area2 = 0.0;  // twice the area, by Green's theorem piece by piece
  for (const Piece& p : pieces) {
    length += p.length;
    if (!p.arc) {
      const Point q = p.start + p.length * p.direction;
      area2 += cross(p.start, q);
    } else {
      const double phi1 = p.phi0 + p.length / p.radius;
      area2 += p.radius * p.radius * (phi1 - p.phi0) +
               p.radius * (p.center.x() * (std::sin(phi1) - std::sin(p.phi0)) -
                           p.center.y() * (std::cos(phi1) - std::cos(p.phi0)));
    }
  }

  std::vector<ConvexDomain::Sample> table(kTableSize);
  std::size_t piece = 0;
  double piece_start = 0.0;
  for (std::size_t i = 0; i < kTableSize; ++i) {
    const double s = length * static_cast<double>(i) / kTableSize;
    while (piece + 1 < pieces.size() && s >= piece_start + pieces[piece].length) {
      piece_start += pieces[piece].length;
      ++piece;
    }
    table[i] = eval_piece(pieces[piece], s - piece_start);
  }
  return ConvexDomain(DomainKind::RoundedPolygon, std::move(table), length,
                      0.5 * area2, false);
}

bool contains(const ConvexDomain& domain, const Point& p) {
  for (const auto& sample : domain.samples()) {
    const Point outward = rotate_right(sample.tangent);
    if ((p - sample.position).dot(outward) >= 0) return false;
  }
  return true;
}

}  // namespace cmc
