#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include "cmc/critical.hpp"
#include "cmc/error.hpp"
#include "cmc/geometry.hpp"
#include "cmc/solver.hpp"
#include "oracles.hpp"

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

std::vector<Point> circle(double r, int n = 128) {
  std::vector<Point> pts;
  for (int k = 0; k < n; ++k) {
    const double a = 2 * std::numbers::pi * k / n;
    pts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return pts;
}

}  // namespace

TEST_CASE("recover_gradient") {
  auto m = disk_mesh(0.1);
  SUBCASE("linear functions are reproduced") {
    const auto g = recover_gradient(sample(m, [](const Point& p) { return 0.3 * p.x() - 1.2 * p.y() + 4; }));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK((g[i] - Point(0.3, -1.2)).norm() < 1e-12);
  }
  SUBCASE("x^2 near (0.5, 0)") {
    const auto g = recover_gradient(sample(m, [](const Point& p) { return p.x() * p.x(); }));
    const int v = nearest_vertex(*m, Point(0.5, 0));
    const Point exact(2 * m->vertex(v).x(), 0.0);
    CHECK((g[static_cast<std::size_t>(v)] - exact).norm() < 0.05);
  }
  SUBCASE("radial oracle is nearly flat at the center") {
    const auto g = recover_gradient(
        sample(m, [](const Point& p) { return oracle::robin_value(0.8, 2, 1.0, p.norm()); }));
    CHECK(g[static_cast<std::size_t>(nearest_vertex(*m, Point(0, 0)))].norm() <= m->h());
  }
}

TEST_CASE("classify") {
  const double H = 0.8;
  auto kind = [&](Eigen::Matrix2d A) { return classify(A, classification_scale(A, H)); };
  CHECK(kind(Eigen::Vector2d(H / 2, H / 2).asDiagonal()) == CriticalKind::Minimum);
  CHECK(kind(Eigen::Vector2d(H, 0).asDiagonal()) == CriticalKind::Degenerate);
  CHECK(kind(Eigen::Vector2d(1, -1).asDiagonal()) == CriticalKind::Saddle);
  CHECK(kind(Eigen::Vector2d(-0.5, -0.3).asDiagonal()) == CriticalKind::Maximum);
  CHECK(kind(Eigen::Vector2d(H, 1e-3).asDiagonal()) == CriticalKind::Degenerate);
  CHECK(classification_scale(Eigen::Vector2d(0.1, -0.2).asDiagonal(), H) == doctest::Approx(H));
  CHECK(classification_scale(Eigen::Vector2d(0.1, -2.0).asDiagonal(), H) == doctest::Approx(2.0));
}

TEST_CASE("find_critical_points on synthetic fields") {
  auto m = disk_mesh(0.1);
  SUBCASE("bowl") {
    const auto cp = find_critical_points(sample(m, [](const Point& p) { return p.squaredNorm(); }), 0.8);
    REQUIRE(cp.records.size() == 1);
    const auto& r = cp.records[0];
    CHECK(r.location.norm() < 1e-8);
    CHECK(r.classification == CriticalKind::Minimum);
    CHECK((r.hessian - 2 * Eigen::Matrix2d::Identity()).norm() < 0.2);
    CHECK(r.index_valid);
    CHECK(r.index == 1);
    CHECK(cp.anomalies.empty());
  }
  SUBCASE("saddle") {
    const auto cp = find_critical_points(
        sample(m, [](const Point& p) { return p.x() * p.x() - p.y() * p.y(); }), 0.8);
    REQUIRE(cp.records.size() == 1);
    CHECK(cp.records[0].classification == CriticalKind::Saddle);
    CHECK(cp.records[0].gauss_curvature < 0);
    CHECK(cp.records[0].index == -1);
  }
  SUBCASE("two minima and a saddle, sorted by location") {
    const auto cp = find_critical_points(sample(m, [](const Point& p) {
      const double a = p.x() * p.x() - 0.25;
      return a * a + p.y() * p.y();
    }), 0.8);
    REQUIRE(cp.records.size() == 3);
    CHECK(cp.count(CriticalKind::Minimum) == 2);
    CHECK(cp.count(CriticalKind::Saddle) == 1);
    CHECK(cp.records[0].location.x() < cp.records[1].location.x());
    CHECK(cp.records[1].location.x() < cp.records[2].location.x());
    CHECK(cp.records[0].location.x() == doctest::Approx(-0.5).epsilon(0.02));
    int sum = 0;
    for (const auto& r : cp.records) sum += r.index;
    CHECK(sum == 1);
  }
  SUBCASE("no critical point is an anomaly") {
    const auto cp = find_critical_points(sample(m, [](const Point& p) { return p.x(); }), 0.8);
    CHECK(cp.records.empty());
    CHECK_FALSE(cp.anomalies.empty());
  }
  SUBCASE("a degenerate contact is flagged") {
    const auto cp = find_critical_points(
        sample(m, [](const Point& p) { return 0.4 * p.x() * p.x() + 0.002 * p.y() * p.y(); }), 0.8);
    REQUIRE_FALSE(cp.records.empty());
    CHECK(cp.count(CriticalKind::Degenerate) >= 1);
    CHECK_FALSE(cp.anomalies.empty());
  }
}

TEST_CASE("gradient_index") {
  auto m = disk_mesh(0.05);
  const auto bowl = sample(m, [](const Point& p) { return p.squaredNorm(); });
  const auto saddle = sample(m, [](const Point& p) { return p.x() * p.x() - p.y() * p.y(); });
  const auto loop = inward_offset_loop(*m, 1e-9);
  CHECK(gradient_index(bowl, loop, 1e-6) == 1);
  CHECK(gradient_index(saddle, loop, 1e-6) == -1);
  CHECK(gradient_index(bowl, circle(0.5), 1e-6) == 1);
  CHECK(gradient_index(bowl, circle(0.5), CriticalOptions{}) == 1);
  // A loop through the critical point is ill-conditioned.
  std::vector<Point> through{{-0.3, 0.0}, {0.3, 0.0}, {0.3, 0.3}, {-0.3, 0.3}};
  try {
    gradient_index(bowl, through, 1e-3);
    FAIL("expected ill-conditioned-loop");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditionedLoop);
  }
}

TEST_CASE("interior_max_scan") {
  auto m = disk_mesh(0.1);
  const auto cap = interior_max_scan(sample(m, [](const Point& p) { return -p.squaredNorm(); }));
  REQUIRE(cap.size() == 1);
  CHECK(cap[0] == nearest_vertex(*m, Point(0, 0)));
  CHECK(interior_max_scan(ScalarField::constant(m, 1.0)).empty());
}

TEST_CASE("critical points of computed solutions") {
  SUBCASE("Robin disk: one minimum at the center") {
    auto m = disk_mesh(0.1);
    const double H = 0.8;
    const auto sol = newton_solve(m, {H, Robin{1.0}}, ScalarField::constant(m, 0.0));
    const auto cp = find_critical_points(sol.field, H);
    REQUIRE(cp.records.size() == 1);
    const auto& r = cp.records[0];
    CHECK(r.location.norm() <= m->h());
    CHECK(r.classification == CriticalKind::Minimum);
    CHECK(r.index == 1);
    CHECK(std::abs(r.hessian.trace() - H) <= 0.1 * H);
    CHECK(interior_max_scan(sol.field).empty());
  }
  SUBCASE("Robin ellipse: index on the inward-offset boundary loop") {
    auto m = std::make_shared<const TriMesh>(triangulate(make_ellipse(1.3, 0.7), 0.1));
    const auto sol = newton_solve(m, {0.5, Robin{1.0}}, ScalarField::constant(m, 0.0));
    const auto cp = find_critical_points(sol.field, 0.5);
    REQUIRE(cp.records.size() == 1);
    CHECK(gradient_index(sol.field, inward_offset_loop(*m, 2 * m->h())) == cp.records[0].index);
    CHECK(cp.records[0].index == 1);
  }
}
