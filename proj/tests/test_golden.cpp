// Golden reports and determinism. Set CMC_UPDATE_GOLDEN=1 to rewrite the
// expected files from the current build.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cmc/pipeline.hpp"
#include "golden_support.hpp"

using namespace cmc;
using nlohmann::json;
namespace fs = std::filesystem;

using golden::compare;
using golden::slurp;

namespace {

std::vector<golden::Case> cases() { return golden::cases(CMC_GOLDEN_DIR); }

fs::path scratch(const std::string& name) { return golden::scratch("cmc_golden", name); }

}  // namespace

TEST_CASE("golden configurations: byte-identical re-runs and reports within 1e-9") {
  const bool update = std::getenv("CMC_UPDATE_GOLDEN") != nullptr;
  const auto all = cases();
  REQUIRE(all.size() >= 3);
  for (const auto& c : all) {
    CAPTURE(c.name);
    const std::string text = slurp(fs::path(CMC_GOLDEN_DIR) / (c.name + ".json"));
    const auto a = scratch(c.name + "_a"), b = scratch(c.name + "_b");
    const auto ra = run_document(c.command, text, {}, a.string());
    const auto rb = run_document(c.command, text, {}, b.string());
    CHECK(ra.exit_code == rb.exit_code);
    CHECK(ra.report == rb.report);
    for (const auto& d : golden::directory_differences(a, b)) FAIL_CHECK(d);
    const auto report = json::parse(slurp(a / "report.json"));
    CHECK(report.at("config_hash").get<std::string>().size() == 16);

    const fs::path expected = fs::path(CMC_GOLDEN_DIR) / (c.name + ".expected.json");
    if (update) {
      std::ofstream(expected, std::ios::binary | std::ios::trunc) << ra.report;
      continue;
    }
    REQUIRE_MESSAGE(fs::exists(expected), "missing " << expected.string());
    std::vector<std::string> diffs;
    compare(report, json::parse(slurp(expected)), "$", diffs);
    for (const auto& d : diffs) MESSAGE(d);
    CHECK(diffs.empty());
  }
}

TEST_CASE("golden suite outcomes") {
  auto status = [](const std::string& name) {
    return json::parse(slurp(fs::path(CMC_GOLDEN_DIR) / (name + ".expected.json")));
  };
  const auto ell = status("robin_ellipse");
  CHECK(ell["exit_code"] == 0);
  CHECK(ell["verification"]["verdict"] == "pass");
  int evaluated = 0;
  for (const auto& p : ell["verification"]["properties"])
    if (p["status"] != "skip") ++evaluated;
  CHECK(evaluated >= 9);

  const auto inf = status("neumann_infeasible");
  CHECK(inf["exit_code"] == 4);
  CHECK(inf["status"] == "infeasible");
  CHECK(inf["verification"]["verdict"] == "error");
  CHECK(inf["feasibility"]["status"] == "infeasible");
  CHECK(!inf.contains("solver"));

  const auto ball = status("ball3d_robin");
  CHECK(ball["exit_code"] == 0);
  CHECK(ball["verification"]["verdict"] == "pass");
  std::vector<std::string> names;
  for (const auto& p : ball["verification"]["properties"]) names.push_back(p["name"]);
  for (const char* n : {"axis_critical_point", "axis_hessian_positive", "radial_monotone", "axial_nodal_curve",
                        "revolution_measure"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("verifying the stored solution reproduces the report") {
  const std::string text = slurp(fs::path(CMC_GOLDEN_DIR) / "robin_ellipse.json");
  const auto a = scratch("stored_a"), b = scratch("stored_b");
  const auto first = run_document("verify", text, {}, a.string());
  REQUIRE(first.exit_code == 0);
  const auto again =
      run_document("verify", text, {"solution_file=" + (a / "solution.csv").string()}, b.string());
  CHECK(again.exit_code == 0);
  const auto ra = json::parse(first.report), rb = json::parse(again.report);
  CHECK(ra["verification"] == rb["verification"]);
  CHECK(ra["critical_points"] == rb["critical_points"]);
  CHECK(ra["homotopy"] == rb["homotopy"]);
  CHECK(rb["solver"]["source"] == "solution_file");
  CHECK(slurp(a / "critical_points.csv") == slurp(b / "critical_points.csv"));

  // A stored solution from another configuration is refused.
  const auto other = run_document("verify", text,
                                  {"problem.alpha=2", "solution_file=" + (a / "solution.csv").string()},
                                  scratch("stored_c").string());
  CHECK(other.exit_code == kExitInvalid);
  CHECK(other.report.find("different configuration") != std::string::npos);
}

TEST_CASE("exit codes follow feasibility, convergence and verdict") {
  const std::string disk = R"({"domain": {"type": "disk"}, "problem": {"H": 0.8, "bc": "robin", "alpha": 1}})";
  const std::string out = scratch("codes").string();
  CHECK(run_document("solve", disk, {}, out).exit_code == kExitPass);
  CHECK(run_document("solve", disk, {"problem.t=1.5"}, out).exit_code == kExitInvalid);
  CHECK(run_document("axisym", disk, {}, out).exit_code == kExitInvalid);
  // Newton capped at one iteration cannot converge.
  CHECK(run_document("solve", disk, {"solver.max_iter=1"}, out).exit_code == kExitSolverFailure);
  // A tolerance no solution can meet turns into a verification failure.
  const auto r = run_document("solve", disk, {"tolerances.trace_rel=1e-9"}, out);
  CHECK(r.exit_code == kExitVerifyFail);
  CHECK(r.status == "verification-failed");
  // Artifacts are flushed with a status on failure too.
  const auto dir = scratch("failure");
  const auto f = run_document("homotopy", disk, {"solver.max_iter=1"}, dir.string());
  CHECK(f.exit_code == kExitSolverFailure);
  const auto rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["status"] == "solver-failure");
  CHECK(rep["verification"]["verdict"] == "error");
}

TEST_CASE("every artifact names the config hash") {
  const std::string text = slurp(fs::path(CMC_GOLDEN_DIR) / "robin_disk.json");
  const auto dir = scratch("provenance");
  const auto r = run_document("solve", text, {}, dir.string());
  const std::string hash = json::parse(r.report)["config_hash"];
  for (const char* f : {"report.json", "solution.csv", "critical_points.csv", "nodal_arcs.csv", "contours.svg"}) {
    CAPTURE(f);
    CHECK(slurp(dir / f).find(hash) != std::string::npos);
  }
}
