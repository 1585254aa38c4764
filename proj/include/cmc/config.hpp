#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmc/axisym.hpp"
#include "cmc/geometry.hpp"
#include "cmc/solver.hpp"
#include "cmc/verify.hpp"

namespace cmc {

enum class Command { Solve, Homotopy, Axisym, Compare, Verify, MeshReport };
const char* to_string(Command c);
Command parse_command(const std::string& name);

struct DomainConfig {
  std::string type = "disk";  // disk | ellipse | rounded_polygon | ball | spheroid
  double R = 1.0;
  double a = 1.0;
  double b = 1.0;
  double r = 0.0;
  std::vector<Point> vertices;

  bool axisymmetric() const { return type == "ball" || type == "spheroid"; }
};

struct CompareConfig {
  std::string field = "solution";     // solution | harmonic
  int degree = 3;                     // Re (x1 + i x2)^degree for the harmonic field
  std::string reference = "cylinder"; // cylinder | quadratic | none
  std::optional<double> angle;        // cylinder bending direction; default from the Hessian
  std::optional<double> radius;       // sector circle; default max(4h, min(0.3, dist/2))
};

struct RunConfig {
  DomainConfig domain;
  ProblemSpec spec;
  std::vector<double> schedule;
  double h_target = 0.1;
  SolverOptions solver;
  VerifyTolerances tolerances;
  CompareConfig compare;
  std::vector<std::string> properties;  // empty: all applicable
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string solution_file;

  std::string canonical;  // defaults applied, sorted keys; excludes output and solution_file
  std::string hash;       // 16 hex digits of FNV-1a over canonical
};

// Parses a JSON document, applies KEY=VALUE overrides (dotted paths; VALUE
// is read as JSON when it parses, else as a string), validates every field
// and computes the canonical hash. Throws ConfigError naming the field path.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

ConvexDomain build_domain(const DomainConfig& d);
MeridianProfile build_profile(const DomainConfig& d);

}  // namespace cmc
