#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <memory>

#include "cmc/critical.hpp"
#include "cmc/error.hpp"
#include "cmc/nodal.hpp"
#include "cmc/solver.hpp"

using namespace cmc;

namespace {

std::shared_ptr<const TriMesh> disk_mesh(double h) {
  return std::make_shared<const TriMesh>(triangulate(make_disk(1.0), h));
}

ScalarField sample(std::shared_ptr<const TriMesh> m, const std::function<double(const Point&)>& f) {
  Vector v(static_cast<Eigen::Index>(m->vertex_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(m->vertex(static_cast<int>(i)));
  return ScalarField(std::move(m), std::move(v));
}

double re_zk(const Point& p, int k) { return std::pow(std::complex<double>(p.x(), p.y()), k).real(); }

// Largest distance from any polyline vertex to the segment x = 0.
double distance_to_vertical_axis(const NodalArcSet& s) {
  double d = 0.0;
  for (const auto& arc : s.arcs)
    for (const Point& p : arc) d = std::max(d, std::abs(p.x()));
  return d;
}

}  // namespace

TEST_CASE("cylinder_solution") {
  const auto X = cylinder_solution(0.0, 1.0);
  CHECK(X.value(0.0) == 0.0);
  CHECK(X.slope(0.0) == 0.0);
  CHECK(X.second_derivative(0.0) == doctest::Approx(1.0));
  CHECK(X.value(0.6) == doctest::Approx(0.2));
  // X'' = H (1 + X'^2)^{3/2} and the symmetry and monotonicity properties.
  const auto Y = cylinder_solution(2.0, 0.5);
  for (double x : {0.0, 0.3, 1.1, 1.9}) {
    const double s = Y.slope(x);
    CHECK(Y.second_derivative(x) == doctest::Approx(0.5 * std::pow(1 + s * s, 1.5)));
    CHECK(Y.value(-x) == Y.value(x));
    CHECK(Y.value(x) >= 2.0);
    CHECK(s >= 0.0);
    CHECK(Y.value(x) - 2.0 == doctest::Approx(cylinder_solution(0.0, 0.5).value(x)));
  }
  try {
    X.value(1.0);
    FAIL("expected out-of-domain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
  CHECK_THROWS_AS(cylinder_solution(0.0, 0.0), Error);
}

TEST_CASE("quadratic_model") {
  CHECK(quadratic_model(0.0, 1.0, 1.0)(Point(1, 1)) == doctest::Approx(1.0));
  // Second differences recover the Laplacian exactly for a quadratic.
  const double H = 0.8, d = 0.1;
  const auto q = quadratic_model(0.3, H, 0.0);
  const Point p(0.2, -0.4);
  const double lap = (q(p + Point(d, 0)) + q(p - Point(d, 0)) + q(p + Point(0, d)) +
                      q(p - Point(0, d)) - 4 * q(p)) / (d * d);
  CHECK(lap == doctest::Approx(H));
  // The radial Poisson form 0.2 r^2 + u0 with u0 = -0.4.
  const auto disk = quadratic_model(-0.4, H / 2, H / 2);
  for (double r : {0.0, 0.5, 1.0}) CHECK(disk(Point(r, 0)) == doctest::Approx(0.2 * r * r - 0.4));
  Eigen::Matrix2d A;
  A << 2, 1, 1, 3;
  const auto g = quadratic_model(1.0, Point(1, 1), A);
  CHECK(g(Point(2, 1)) == doctest::Approx(2.0));
  CHECK(g(Point(2, 2)) == doctest::Approx(1.0 + 0.5 * 7));
}

TEST_CASE("difference_field") {
  auto m = disk_mesh(0.1);
  const auto f = sample(m, [](const Point& p) { return p.x() + p.y() * p.y(); });
  AnalyticField same{[](const Point& p) { return p.x() + p.y() * p.y(); }, {}, "same"};
  const auto d = difference_field(f, same);
  CHECK_FALSE(d.clipped);
  CHECK(d.field.values.cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("strip clipping") {
    const auto X = cylinder_solution(0.0, 2.0);  // defined for |x| < 0.5
    const auto c = difference_field(f, cylinder_field(X, Point::Zero()));
    CHECK(c.clipped);
    CHECK_FALSE(c.subdomain.empty());
    CHECK(c.field.mesh->vertex_count() == c.vertex_map.size());
    for (std::size_t v = 0; v < c.vertex_map.size(); ++v) {
      const Point& q = c.field.mesh->vertices()[v];
      CHECK(std::abs(q.x()) < 0.5);
      CHECK(q == m->vertex(c.vertex_map[v]));
      CHECK(c.field.values[static_cast<Eigen::Index>(v)] ==
            doctest::Approx(f.values[c.vertex_map[v]] - X.value(q.x())));
    }
    CHECK(c.field.mesh->total_area() < m->total_area());
    for (std::size_t k = 0; k < c.field.mesh->cell_count(); ++k)
      CHECK(c.field.mesh->signed_area(static_cast<int>(k)) > 0);
    // The clipped boundary is a closed loop.
    const auto& e = c.field.mesh->boundary_edges();
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(e[k].b == e[(k + 1) % e.size()].a);
  }
}

TEST_CASE("trace_nodal_set") {
  auto m = disk_mesh(0.05);
  SUBCASE("linear field: one diameter") {
    const auto s = trace_nodal_set(sample(m, [](const Point& p) { return p.x(); }));
    CHECK(s.arcs.size() == 1);
    CHECK_FALSE(s.junction.has_value());
    CHECK(distance_to_vertical_axis(s) <= m->h());
    // Every polyline vertex is an interpolated zero on a sign-changing edge:
    // here that means x = 0 exactly up to rounding.
    CHECK(distance_to_vertical_axis(s) < 1e-12);
  }
  SUBCASE("harmonic cubic: six rays from the origin") {
    const auto s = trace_nodal_set(sample(m, [](const Point& p) { return re_zk(p, 3); }));
    CHECK(s.arcs.size() == 6);
    REQUIRE(s.junction.has_value());
    CHECK(s.junction->norm() <= m->h());
    for (const auto& arc : s.arcs) {
      CHECK(arc.front().norm() <= 2 * m->h());
      CHECK(arc.back().norm() == doctest::Approx(1.0).epsilon(0.01));
    }
  }
  SUBCASE("saddle: four rays") {
    const auto s = trace_nodal_set(sample(m, [](const Point& p) { return p.x() * p.x() - p.y() * p.y(); }));
    CHECK(s.arcs.size() == 4);
    CHECK(s.junction.has_value());
  }
  SUBCASE("closed curve") {
    const auto s = trace_nodal_set(sample(m, [](const Point& p) { return p.squaredNorm() - 0.25; }));
    REQUIRE(s.arcs.size() == 1);
    CHECK(s.arcs[0].front() == s.arcs[0].back());
    for (const Point& p : s.arcs[0]) CHECK(p.norm() == doctest::Approx(0.5).epsilon(0.02));
  }
  SUBCASE("zero field is rejected") {
    CHECK_THROWS_AS(trace_nodal_set(ScalarField::constant(m, 0.0)), Error);
  }
}

TEST_CASE("sector_count and leading_order_fit on harmonic polynomials") {
  auto m = disk_mesh(0.05);
  for (int k : {2, 3, 4}) {
    const auto f = sample(m, [k](const Point& p) { return re_zk(p, k); });
    CHECK(sector_count(f, Point::Zero(), 0.5) == 2 * k);
    const auto fit = leading_order_fit(f, Point::Zero());
    CHECK(fit.k == doctest::Approx(k).epsilon(0.15 / k));
    CHECK(fit.r_min == doctest::Approx(2 * m->h()));
    CHECK(fit.amplitude > 0);
  }
  const auto bowl = sample(m, [](const Point& p) { return p.squaredNorm(); });
  CHECK(leading_order_fit(bowl, Point::Zero()).k == doctest::Approx(2.0).epsilon(0.05));
  CHECK(sector_count(bowl, Point::Zero(), 0.5) == 0);

  CHECK_THROWS_AS(sector_count(bowl, Point::Zero(), m->h()), Error);
  try {
    sector_count(bowl, Point(0.8, 0), 0.5);
    FAIL("expected out-of-domain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
  try {
    leading_order_fit(sample(m, [](const Point& p) { return p.x() > 0.9 ? 1.0 : 0.0; }), Point::Zero(), 2 * m->h(), 0.4);
    FAIL("expected underflow-fit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderflowFit);
  }
}

TEST_CASE("comparison with the Robin disk solution") {
  const double H = 0.8;
  auto m = disk_mesh(0.05);
  const auto sol = newton_solve(m, {H, Robin{1.0}}, ScalarField::constant(m, 0.0));
  const auto cp = find_critical_points(sol.field, H);
  REQUIRE(cp.records.size() == 1);
  const auto& p = cp.records[0];

  SUBCASE("minus the cylinder: non-degenerate saddle contact") {
    const auto d = difference_field(sol.field, cylinder_field(cylinder_solution(p.value, H), p.location));
    CHECK(sector_count(d.field, p.location, 0.3) == 4);
    CHECK(leading_order_fit(d.field, p.location).k <= 2.5);
    const auto arcs = trace_nodal_set(d.field);
    CHECK(arcs.junction.has_value());
  }
  SUBCASE("minus its own quadratic model: higher order contact") {
    const auto d = difference_field(sol.field, quadratic_model(p.value, p.location, p.hessian));
    const auto fit = leading_order_fit(d.field, p.location);
    CHECK(fit.k >= 2.5);
    CHECK(fit.residual >= 0.0);
  }
}
