#pragma once

#include <optional>
#include <vector>

#include "cmc/critical.hpp"
#include "cmc/error.hpp"
#include "cmc/mc_operator.hpp"

namespace cmc {

struct SolverOptions {
  double newton_tol = 1e-10;  // max-norm of the residual
  int max_iter = 50;
  double armijo_factor = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 20;
  // Neumann solves carry a uniform load multiplier (an effective shift of H)
  // that absorbs the discrete compatibility defect; a converged solve whose
  // |shift| / H exceeds this is reported as incompatible data.
  double neumann_compat_tol = 0.02;
  bool enforce_neumann_compat = true;
  double min_dt = 1.0 / 320.0;  // homotopy step halving floor
};

enum class Normalization { None, MeanZero };
const char* to_string(Normalization n);

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual_norm = 0.0;
  std::vector<double> residual_history;  // ||F||_2 at each accepted iterate
  std::vector<double> damping_history;   // accepted step lengths
  Normalization normalization = Normalization::None;
  double t = 1.0;
  double compatibility_shift = 0.0;  // Neumann only: H_effective - H
  std::string message;
};

struct Solution {
  ScalarField field;
  SolveReport report;
};

struct HomotopyStep {
  double t = 0.0;
  double min_value = 0.0, max_value = 0.0, mean_value = 0.0;
  int critical_count = 0;
  int min_count = 0;
  int saddle_count = 0;
  int max_count = 0;
  int degenerate_count = 0;
  bool morse = false;  // every critical point non-degenerate
  double min_gauss_curvature = 0.0;  // over minima
  int newton_iterations = 0;
  double compatibility_shift = 0.0;
};

struct HomotopyTrace {
  std::vector<HomotopyStep> steps;
  bool complete = false;
};

// Nonconvergence, carrying the last report and, for continuation runs, the
// partial trace.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, SolveReport report,
                std::optional<HomotopyTrace> trace = std::nullopt)
      : Error(ErrorKind::SolverFailure, what), report_(std::move(report)), trace_(std::move(trace)) {}
  const SolveReport& report() const { return report_; }
  const std::optional<HomotopyTrace>& trace() const { return trace_; }

 private:
  SolveReport report_;
  std::optional<HomotopyTrace> trace_;
};

enum class Constraint { None, MeanZero };

struct LinearSolveResult {
  Vector x;
  // With MeanZero: A x = b - multiplier * w, where w is the weight column
  // scaled to mean 1 (all ones when no weights are given).
  double multiplier = 0.0;
  bool incompatible = false;  // b had a component outside the range of A
};

LinearSolveResult linear_solve(const SparseMatrix& A, const Vector& b, Constraint constraint,
                               const Vector* weights = nullptr);

Solution newton_solve(const MeanCurvatureOperator& op, const ProblemSpec& spec,
                      const ScalarField& init, const SolverOptions& options = {});
// Planar problems (n_dim = 2).
Solution newton_solve(std::shared_ptr<const TriMesh> mesh, const ProblemSpec& spec,
                      const ScalarField& init, const SolverOptions& options = {});

struct PoissonInit {
  ScalarField field;
  // Neumann: boundary flux minus load, c |dOmega| - H |Omega| on the mesh
  // (subtracted uniformly before solving). Zero for Robin.
  double incompatibility = 0.0;
};
PoissonInit poisson_init(const MeanCurvatureOperator& op, const ProblemSpec& spec);

struct HomotopyResult {
  Solution solution;  // at t = 1
  HomotopyTrace trace;
};

std::vector<double> uniform_schedule(int steps);

HomotopyResult homotopy_solve(const MeanCurvatureOperator& op, const ProblemSpec& spec,
                              const std::vector<double>& schedule,
                              const SolverOptions& options = {},
                              const CriticalOptions& critical = {});

}  // namespace cmc
