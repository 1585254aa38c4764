#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/LU>

#include "cmc/error.hpp"
#include "cmc/geometry.hpp"
#include "cmc/mesh.hpp"

using namespace cmc;
using std::numbers::pi;

namespace {

double polyline_length_ellipse(double a, double b, int n) {
  double L = 0.0;
  Point prev(a, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double th = 2.0 * pi * i / n;
    const Point p(a * std::cos(th), b * std::sin(th));
    L += (p - prev).norm();
    prev = p;
  }
  return L;
}

// Steiner formula: a rounded polygon is the inset polygon grown by r, so
// area = A_in + r P_in + pi r^2 and length = P_in + 2 pi r.
struct Steiner {
  double area, length;
};
Steiner rounded_polygon_oracle(const std::vector<Point>& v, double r) {
  const std::size_t n = v.size();
  std::vector<Point> inset(n);
  auto offset_line = [&](std::size_t i) {
    const Point d = (v[(i + 1) % n] - v[i]).normalized();
    const Point inward(-d.y(), d.x());
    return std::pair<Point, Point>{v[i] + r * inward, d};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto [p0, d0] = offset_line((i + n - 1) % n);
    const auto [p1, d1] = offset_line(i);
    // p0 + s d0 = p1 + u d1
    Eigen::Matrix2d M;
    M << d0, -d1;
    const Eigen::Vector2d su = M.inverse() * (p1 - p0);
    inset[i] = p0 + su[0] * d0;
  }
  double A = 0.0, P = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = inset[i];
    const Point& b = inset[(i + 1) % n];
    A += 0.5 * (a.x() * b.y() - a.y() * b.x());
    P += (b - a).norm();
  }
  return {A + r * P + pi * r * r, P + 2.0 * pi * r};
}

void check_mesh_invariants(const TriMesh& m, const ConvexDomain& d, double h_target) {
  for (std::size_t c = 0; c < m.cell_count(); ++c) CHECK(m.signed_area(static_cast<int>(c)) > 0.0);
  CHECK(m.min_angle_deg() >= 20.0);
  CHECK(m.h() <= 1.5 * h_target);
  const auto& e = m.boundary_edges();
  REQUIRE(!e.empty());
  std::set<int> seen;
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e[i].b == e[(i + 1) % e.size()].a);
    seen.insert(e[i].a);
    CHECK(e[i].normal.norm() == doctest::Approx(1.0));
  }
  CHECK(seen.size() == e.size());
  CHECK(std::abs(m.boundary_length() - d.length()) <= 2.0 * m.h());
  CHECK(std::abs(m.total_area() - d.area()) <= 2.0 * m.h() * m.h() * d.length());
}

}  // namespace

TEST_CASE("make_disk") {
  const auto d = make_disk(1.0);
  CHECK(d.kind() == DomainKind::Disk);
  CHECK(d.length() == doctest::Approx(2 * pi).epsilon(1e-12));
  CHECK(d.area() == doctest::Approx(pi).epsilon(1e-12));
  CHECK(d.centroid().norm() < 1e-12);
  CHECK(d.is_smooth());
  for (int i = 0; i < 1000; ++i) {
    const double s = d.length() * i / 1000.0 + 0.37e-3;
    CHECK(d.curvature(s) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(d.position(s).norm() == doctest::Approx(1.0).epsilon(1e-10));
    // Outward normal is radial.
    CHECK((d.normal(s) - d.position(s)).norm() < 1e-8);
  }
  CHECK(make_disk(2.0).curvature(0.3) == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_disk(0.0), Error);
  CHECK_THROWS_AS(make_disk(-1.0), Error);
  CHECK((d.position(0.0) - d.position(d.length() - 1e-14)).norm() < 1e-10 * d.length());
}

TEST_CASE("make_ellipse") {
  const double a = 1.3, b = 0.7;
  const auto e = make_ellipse(a, b);
  CHECK(e.area() == doctest::Approx(pi * a * b).epsilon(1e-12));
  CHECK(e.length() == doctest::Approx(polyline_length_ellipse(a, b, 1 << 21)).epsilon(1e-9));
  CHECK(std::abs(e.length() - polyline_length_ellipse(a, b, 1 << 21)) < 1e-6);
  // s = 0 sits at (a, 0) where the curvature is a / b^2.
  CHECK((e.position(0.0) - Point(a, 0)).norm() < 1e-12);
  CHECK(e.curvature(0.0) == doctest::Approx(a / (b * b)).epsilon(1e-8));
  CHECK(a / (b * b) == doctest::Approx(2.65306).epsilon(1e-5));
  // At (0, b) the curvature is b / a^2.
  CHECK(e.curvature(e.length() / 4) == doctest::Approx(b / (a * a)).epsilon(1e-6));
  for (int i = 0; i < 1000; ++i) {
    const double s = e.length() * i / 1000.0;
    const Point p = e.position(s);
    CHECK(p.x() * p.x() / (a * a) + p.y() * p.y() / (b * b) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.curvature(s) > 0.0);
    CHECK(e.normal(s).dot(e.centroid() - p) < 0.0);
  }
  const auto circ = make_ellipse(1.0, 1.0);
  const auto disk = make_disk(1.0);
  for (int i = 0; i < 200; ++i) {
    const double s = 2 * pi * i / 200.0;
    CHECK((circ.position(s) - disk.position(s)).norm() < 1e-10);
  }
  CHECK_THROWS_AS(make_ellipse(1.0, 0.0), Error);
  CHECK_THROWS_AS(make_ellipse(-1.0, 1.0), Error);
}

TEST_CASE("make_rounded_polygon") {
  SUBCASE("square") {
    const std::vector<Point> sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto d = make_rounded_polygon(sq, 0.5);
    CHECK(d.kind() == DomainKind::RoundedPolygon);
    CHECK_FALSE(d.is_smooth());
    CHECK_FALSE(d.warnings().empty());
    CHECK(d.length() == doctest::Approx(4.0 + pi).epsilon(1e-12));
    const auto o = rounded_polygon_oracle(sq, 0.5);
    CHECK(d.area() == doctest::Approx(o.area).epsilon(1e-12));
    CHECK(d.length() == doctest::Approx(o.length).epsilon(1e-12));
    for (const auto& smp : d.samples())
      CHECK((std::abs(smp.curvature) < 1e-12 || std::abs(smp.curvature - 2.0) < 1e-12));
  }
  SUBCASE("triangle: turning carried by the arcs") {
    const std::vector<Point> tri{{0, 0}, {2, 0}, {1, std::sqrt(3.0)}};
    const auto d = make_rounded_polygon(tri, 0.3);
    double turning = 0.0;
    const auto s = d.samples();
    const double ds = d.length() / static_cast<double>(s.size());
    for (const auto& smp : s) turning += smp.curvature * ds;
    CHECK(turning == doctest::Approx(2 * pi).epsilon(1e-3));
    const auto o = rounded_polygon_oracle(tri, 0.3);
    CHECK(d.area() == doctest::Approx(o.area).epsilon(1e-12));
    CHECK(d.length() == doctest::Approx(o.length).epsilon(1e-12));
  }
  SUBCASE("invalid input") {
    const std::vector<Point> cw{{-1, -1}, {-1, 1}, {1, 1}, {1, -1}};
    CHECK_THROWS_AS(make_rounded_polygon(cw, 0.2), Error);
    const std::vector<Point> dent{{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}};
    CHECK_THROWS_AS(make_rounded_polygon(dent, 0.1), Error);
    const std::vector<Point> sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    CHECK_THROWS_AS(make_rounded_polygon(sq, 1.0), Error);
    CHECK_THROWS_AS(make_rounded_polygon(sq, 0.0), Error);
  }
}

TEST_CASE("contains") {
  const auto d = make_disk(1.0);
  CHECK(contains(d, Point(0, 0)));
  CHECK_FALSE(contains(d, Point(2, 0)));
  const auto e = make_ellipse(1.3, 0.7);
  CHECK(contains(e, Point(1.29, 0)));
  CHECK_FALSE(contains(e, Point(0, 0.71)));
}

TEST_CASE("triangulate: invariants") {
  SUBCASE("disk") {
    const auto d = make_disk(1.0);
    const auto m = triangulate(d, 0.2);
    check_mesh_invariants(m, d, 0.2);
    CHECK(std::abs(m.total_area() - pi) <= 0.02);
    const auto fine = triangulate(d, 0.1);
    const double ratio = static_cast<double>(fine.vertex_count()) / m.vertex_count();
    CHECK(ratio >= 2.5);
    CHECK(ratio <= 6.0);
  }
  SUBCASE("ellipse") {
    const auto d = make_ellipse(1.3, 0.7);
    const auto m = triangulate(d, 0.1);
    check_mesh_invariants(m, d, 0.1);
    CHECK(std::abs(m.boundary_length() - d.length()) <= 0.2);
  }
  SUBCASE("rounded square") {
    const std::vector<Point> sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto d = make_rounded_polygon(sq, 0.5);
    check_mesh_invariants(triangulate(d, 0.1), d, 0.1);
  }
  SUBCASE("rounded triangle with slanted sides") {
    // Samples on slanted segments are collinear only up to round-off.
    const std::vector<Point> tri{{-0.8, -0.6}, {0.9, -0.5}, {0.4, 0.8}};
    const auto d = make_rounded_polygon(tri, 0.2);
    for (double h : {0.05, 0.08, 0.12}) {
      CAPTURE(h);
      const auto m = triangulate(d, h);
      check_mesh_invariants(m, d, h);
      CHECK(m.min_angle_deg() >= 20.0);
    }
  }
}

TEST_CASE("triangulate: determinism and convexity") {
  const auto d = make_ellipse(1.3, 0.7);
  const auto a = triangulate(d, 0.08);
  const auto b = triangulate(d, 0.08);
  CHECK(a.vertices() == b.vertices());
  CHECK(a.cells() == b.cells());
  CHECK(a.hash() == b.hash());

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(a.vertex_count()) - 1);
  int pairs = 0;
  while (pairs < 100) {
    const int i = pick(rng), j = pick(rng);
    if (a.is_boundary(i) || a.is_boundary(j)) continue;
    ++pairs;
    for (int k = 1; k < 10; ++k) CHECK(contains(d, a.vertex(i) + (a.vertex(j) - a.vertex(i)) * (k / 10.0)));
  }
}

TEST_CASE("triangulate: errors") {
  const auto d = make_disk(1.0);
  CHECK_THROWS_AS(triangulate(d, 0.0), Error);
  CHECK_THROWS_AS(triangulate(d, d.length() / 8), Error);
  MeshOptions impossible;
  impossible.min_angle_deg = 59.5;
  impossible.max_smoothing_passes = 4;
  try {
    triangulate(d, 0.2, impossible);
    FAIL("expected mesh-quality-failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MeshQualityFailure);
  }
}

TEST_CASE("PointLocator reproduces linear functions") {
  const auto m = triangulate(make_ellipse(1.3, 0.7), 0.1);
  std::vector<double> f(m.vertex_count());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 2.0 * m.vertices()[i].x() - 0.5 * m.vertices()[i].y() + 1.0;
  PointLocator loc(m);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(-1.3, 1.3), uy(-0.7, 0.7);
  int inside = 0;
  for (int k = 0; k < 500; ++k) {
    const Point p(ux(rng), uy(rng));
    const auto hit = loc.locate(p);
    if (!hit) continue;
    ++inside;
    CHECK(loc.interpolate(f, p) == doctest::Approx(2.0 * p.x() - 0.5 * p.y() + 1.0).epsilon(1e-10));
    double s = 0;
    for (double w : hit->bary) {
      CHECK(w >= -1e-9);
      s += w;
    }
    CHECK(s == doctest::Approx(1.0));
  }
  CHECK(inside > 300);
  CHECK_FALSE(loc.locate(Point(3, 3)).has_value());
  const auto c = loc.locate_clamped(Point(3, 0));
  CHECK(c.cell >= 0);
}
