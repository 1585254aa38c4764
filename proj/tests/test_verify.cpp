#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>

#include "cmc/error.hpp"
#include "cmc/verify.hpp"

using namespace cmc;

namespace {

ScalarField sample(std::shared_ptr<const TriMesh> m, const std::function<double(const Point&)>& f) {
  Vector v(static_cast<Eigen::Index>(m->vertex_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(m->vertex(static_cast<int>(i)));
  return ScalarField(std::move(m), std::move(v));
}

const PropertyRecord& find(const std::vector<PropertyRecord>& v, const std::string& name) {
  for (const auto& r : v)
    if (r.name == name) return r;
  FAIL("missing property " << name);
  return v.front();
}

double measured(const PropertyRecord& r, const std::string& key) {
  for (const auto& [k, v] : r.measured)
    if (k == key) return v;
  FAIL("missing measurement " << key);
  return 0.0;
}

}  // namespace

TEST_CASE("registry") {
  CHECK(property_names().size() >= 11);
  for (const auto& n : property_names()) CHECK_FALSE(property_anchor(n).empty());
  try {
    check_property_names({"sign_conditions", "made_up"});
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
}

TEST_CASE("sign conditions") {
  auto m = std::make_shared<const TriMesh>(triangulate(make_disk(1.0), 0.1));
  const ProblemSpec spec{0.8, Robin{1.0}};
  const auto sol = newton_solve(m, spec, ScalarField::constant(m, 0.0));
  const auto r = verify_sign_conditions(sol.field, spec);
  CHECK(r.status == PropertyStatus::Pass);
  CHECK(measured(r, "max_u") == doctest::Approx(-0.43644).epsilon(2e-3));

  const auto pos = verify_sign_conditions(ScalarField::constant(m, 1.0), spec);
  CHECK(pos.status == PropertyStatus::Fail);
  CHECK(pos.note.find("u >= 0 at") != std::string::npos);

  CHECK(verify_sign_conditions(sol.field, {0.6, Neumann{0.3}}).status == PropertyStatus::Skip);
}

TEST_CASE("critical structure and saddle equivalence") {
  SUBCASE("Robin ellipse passes every check") {
    auto m = std::make_shared<const TriMesh>(triangulate(make_ellipse(1.3, 0.7), 0.1));
    const auto sol = newton_solve(m, {0.5, Robin{1.0}}, ScalarField::constant(m, 0.0));
    const auto cp = find_critical_points(sol.field, 0.5);
    const auto recs = verify_critical_structure(sol.field, 0.5, cp);
    CHECK(recs.size() == 6);
    for (const auto& r : recs) CHECK_MESSAGE(r.status == PropertyStatus::Pass, r.name << " " << r.note);
    const auto eq = verify_saddle_equivalence(cp);
    CHECK(eq.status == PropertyStatus::Pass);
    CHECK(measured(eq, "two_minima") == 0.0);
    CHECK(measured(eq, "negative_K_point") == 0.0);
    CHECK(verify_degenerate_contact(sol.field, 0.5, cp).status == PropertyStatus::Pass);
  }
  SUBCASE("compatible Neumann disk") {
    auto m = std::make_shared<const TriMesh>(triangulate(make_disk(1.0), 0.1));
    const double H = 0.6, c = 0.3 / std::sqrt(1 - 0.09);
    const auto sol = newton_solve(m, {H, Neumann{c}}, ScalarField::constant(m, 0.0));
    const auto cp = find_critical_points(sol.field, H);
    for (const auto& r : verify_critical_structure(sol.field, H, cp))
      CHECK_MESSAGE(r.status == PropertyStatus::Pass, r.name << " " << r.note);
    REQUIRE(cp.records.size() == 1);
    CHECK(cp.records[0].location.norm() <= m->h());
  }
  SUBCASE("double well fails the count and satisfies the equivalence with both sides true") {
    auto m = std::make_shared<const TriMesh>(triangulate(make_disk(1.0), 0.05));
    const auto f = sample(m, [](const Point& p) {
      const double a = 4 * p.x() * p.x() - 1;
      return a * a + p.y() * p.y();
    });
    const auto cp = find_critical_points(f, 0.8);
    const auto recs = verify_critical_structure(f, 0.8, cp);
    CHECK(find(recs, "critical_count").status == PropertyStatus::Fail);
    CHECK(find(recs, "critical_minimum").status == PropertyStatus::Fail);
    const auto eq = verify_saddle_equivalence(cp);
    CHECK(eq.status == PropertyStatus::Pass);
    CHECK(measured(eq, "two_minima") == 1.0);
    CHECK(measured(eq, "negative_K_point") == 1.0);
  }
  SUBCASE("bowl: both sides false") {
    auto m = std::make_shared<const TriMesh>(triangulate(make_disk(1.0), 0.1));
    const auto eq = verify_saddle_equivalence(
        find_critical_points(sample(m, [](const Point& p) { return p.squaredNorm(); }), 0.8));
    CHECK(eq.status == PropertyStatus::Pass);
    CHECK(measured(eq, "two_minima") == 0.0);
  }
  SUBCASE("a saddle without a second minimum breaks the equivalence") {
    CriticalAnalysis cp;
    CriticalPointRecord a, b;
    a.classification = CriticalKind::Minimum;
    b.classification = CriticalKind::Saddle;
    cp.records = {a, b};
    CHECK(verify_saddle_equivalence(cp).status == PropertyStatus::Fail);
  }
}

TEST_CASE("feasibility record") {
  const auto d = make_disk(1.0);
  CHECK(verify_feasibility(neumann_feasibility(d, {0.5, Neumann{0.5}})).status == PropertyStatus::Pass);
  CHECK(verify_feasibility(neumann_feasibility(d, {1.0, Neumann{0.5}})).status == PropertyStatus::Fail);
  CHECK(verify_feasibility(neumann_feasibility(d, {2 * 0.5 / std::sqrt(1.25), Neumann{0.5}})).status ==
        PropertyStatus::Warn);
}

TEST_CASE("homotopy stability") {
  auto m = std::make_shared<const TriMesh>(triangulate(make_disk(1.0), 0.1));
  MeanCurvatureOperator op(m);
  const ProblemSpec spec{0.8, Robin{1.0}};
  const auto res = homotopy_solve(op, spec, uniform_schedule(11));
  const auto r = verify_homotopy_stability(res.trace, spec);
  CHECK(r.status == PropertyStatus::Pass);
  // Poisson disk solution: Hessian (H/2) I at the center.
  CHECK(measured(r, "K0") == doctest::Approx(0.16).epsilon(0.1));

  HomotopyTrace partial = res.trace;
  partial.steps.resize(4);
  partial.complete = false;
  CHECK(verify_homotopy_stability(partial, spec).status == PropertyStatus::Warn);
  HomotopyTrace bad = res.trace;
  bad.steps[3].saddle_count = 1;
  CHECK(verify_homotopy_stability(bad, spec).status == PropertyStatus::Fail);
}

TEST_CASE("axisymmetric properties on the Robin ball") {
  MeridianProblem pr{ball_profile(1.0), {0.8, Robin{1.0}, 1.0, 3}};
  auto m = std::make_shared<const TriMesh>(meridian_mesh(pr, 0.05));
  const auto sol = solve_meridian(pr, m, ScalarField::constant(m, 0.0));
  const auto recs = verify_axisymmetric(sol.field, pr);
  CHECK(recs.size() == 5);
  for (const auto& r : recs) CHECK_MESSAGE(r.status == PropertyStatus::Pass, r.name << " " << r.note);
  CHECK(verify_sign_conditions(sol.field, pr.spec).status == PropertyStatus::Pass);
}

TEST_CASE("aggregate") {
  PropertyRecord a;
  a.name = "sign_conditions";
  a.status = PropertyStatus::Pass;
  PropertyRecord w;
  w.name = "feasibility";
  w.status = PropertyStatus::Warn;
  auto rep = aggregate({a, w});
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.properties.front().name == "feasibility");
  PropertyRecord f = a;
  f.name = "critical_count";
  f.status = PropertyStatus::Fail;
  CHECK(aggregate({a, w, f}).verdict == Verdict::Fail);
  PropertyRecord u = a;
  u.name = "nonsense";
  CHECK_THROWS_AS(aggregate({u}), Error);
}
