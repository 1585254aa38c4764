#include <doctest.h>

#include <string>

#include "cmc/config.hpp"
#include "cmc/error.hpp"

using namespace cmc;

namespace {

const char* kMinimal = R"({"domain": {"type": "disk"}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1}})";

std::string config_error(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  FAIL("accepted: " << text);
  return {};
}

}  // namespace

TEST_CASE("minimal Robin disk gets the documented defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.h_target == 0.1);
  CHECK(c.solver.newton_tol == 1e-10);
  CHECK(c.schedule.size() == 11);
  CHECK(c.schedule.front() == 0.0);
  CHECK(c.schedule.back() == 1.0);
  CHECK(c.spec.t == 1.0);
  CHECK(c.spec.n_dim == 2);
  CHECK(c.seed == 0);
  CHECK(c.tolerances.sign_deadband == 1e-10);
  CHECK(c.tolerances.trace_rel == 0.1);
  CHECK(std::get<Robin>(c.spec.bc).alpha == 1.0);
  CHECK(c.hash.size() == 16);
}

TEST_CASE("cross-field and range validation name the field path") {
  CHECK(config_error(R"({"domain": {"type": "disk"}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1, "c": 0.5}})")
            .find("problem.c") == 0);
  CHECK(config_error(R"({"domain": {"type": "disk"}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1, "t": 1.5}})")
            .find("problem.t") == 0);
  CHECK(config_error(R"({"domain": {"type": "disk"}, "problem": {"H": 0.8, "bc": "neumann"}})")
            .find("problem.c") == 0);
  CHECK(config_error(R"({"domain": {"type": "disk", "a": 2}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1}})")
            .find("domain.a") == 0);
  CHECK(config_error(R"({"domain": {"type": "torus"}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1}})")
            .find("domain.type") == 0);
  CHECK(config_error(kMinimal, {"mesh.h_target=-1"}).find("mesh.h_target") == 0);
  CHECK(config_error(kMinimal, {"solver.bogus=1"}).find("solver.bogus") == 0);
  CHECK(config_error(kMinimal, {"extra=1"}).find("extra") == 0);
  CHECK(config_error(kMinimal, {"properties=[\"no_such_property\"]"}).find("properties") == 0);
  CHECK(config_error(kMinimal, {"problem.schedule=[0, 0.5, 0.4, 1]"}).find("problem.schedule[2]") == 0);
  CHECK(config_error(kMinimal, {"problem.schedule=[0, 0.5]"}).find("problem.schedule") == 0);
  CHECK(config_error(kMinimal, {"problem.n_dim=3"}).find("problem.n_dim") == 0);
  CHECK(config_error("{not json").find("<document>") == 0);
  CHECK(config_error(kMinimal, {"novalue"}).find("--override") == 0);
}

TEST_CASE("overrides take dotted paths with JSON or bare string values") {
  const auto c = parse_config(kMinimal, {"mesh.h_target=0.05", "problem.schedule_steps=5",
                                         "output.dir=some/where", "compare.reference=quadratic"});
  CHECK(c.h_target == 0.05);
  CHECK(c.schedule.size() == 5);
  CHECK(c.output_dir == "some/where");
  CHECK(c.compare.reference == "quadratic");
}

TEST_CASE("switching the condition by override keeps the stale parameter an error") {
  CHECK(config_error(kMinimal, {"problem.bc=neumann", "problem.c=0.5"}).find("problem.alpha") == 0);
}

TEST_CASE("canonical hash ignores output location and key order") {
  const auto a = parse_config(kMinimal);
  const auto b = parse_config(R"({"problem": {"alpha": 1.0, "bc": "robin", "H": 0.8}, "domain": {"R": 1, "type": "disk"},
                                 "output": {"dir": "x"}, "solution_file": "y.csv"})");
  CHECK(a.hash == b.hash);
  CHECK(a.canonical == b.canonical);
  const auto c = parse_config(kMinimal, {"problem.H=0.81"});
  CHECK(c.hash != a.hash);
  const auto d = parse_config(kMinimal, {"tolerances.trace_rel=0.2"});
  CHECK(d.hash != a.hash);
}

TEST_CASE("axisymmetric domains default to n = 3") {
  const auto c = parse_config(R"({"domain": {"type": "spheroid", "a": 1, "b": 0.8}, "problem": {"H": 0.5, "bc": "robin", "alpha": 1}})");
  CHECK(c.spec.n_dim == 3);
  CHECK(c.domain.axisymmetric());
  CHECK(build_profile(c.domain).b == 0.8);
  CHECK_THROWS_AS(build_domain(c.domain), Error);
}

TEST_CASE("commands") {
  CHECK(parse_command("mesh-report") == Command::MeshReport);
  CHECK(std::string(to_string(parse_command("compare"))) == "compare");
  CHECK_THROWS_AS(parse_command("plot"), Error);
}
