#include "cmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

namespace cmc {
namespace {

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

std::string nullspace_diagnostic(const SparseMatrix& A) {
  const Vector ones = Vector::Ones(A.cols());
  const double a_norm = std::max(1e-300, (A.cwiseAbs() * ones).maxCoeff());
  std::ostringstream msg;
  msg << "||A 1||_inf / ||A||_inf = " << (A * ones).lpNorm<Eigen::Infinity>() / a_norm;
  if ((A * ones).lpNorm<Eigen::Infinity>() <= 1e-10 * a_norm)
    msg << " (constant vector in the nullspace; a mean-zero constraint is required)";
  return msg.str();
}

Vector factor_and_solve(const SparseMatrix& A, const Vector& b, const SparseMatrix& original) {
  LU lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    fail(ErrorKind::LinearFailure,
         "sparse LU factorization failed: " + lu.lastErrorMessage() + "; " +
             nullspace_diagnostic(original));
  Vector x = lu.solve(b);
  const double tol = 1e-8 * std::max(b.norm(), 1e-300);
  if (!x.allFinite() || (A * x - b).norm() > tol)
    fail(ErrorKind::LinearFailure,
         "linear solve residual check failed (singular system); " + nullspace_diagnostic(original));
  return x;
}

}  // namespace

const char* to_string(Normalization n) {
  return n == Normalization::MeanZero ? "mean-zero" : "none";
}

LinearSolveResult linear_solve(const SparseMatrix& A, const Vector& b, Constraint constraint,
                               const Vector* weights) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    fail(ErrorKind::InvalidParameter, "linear_solve: dimension mismatch");
  LinearSolveResult out;
  if (constraint == Constraint::None) {
    out.x = factor_and_solve(A, b, A);
    return out;
  }
  const Eigen::Index n = A.rows();
  Vector w = weights ? *weights : Vector::Ones(n);
  if (w.size() != n || !(w.sum() > 0))
    fail(ErrorKind::InvalidParameter, "linear_solve: weight column must be positive");
  w *= static_cast<double>(n) / w.sum();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * n));
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (Eigen::Index i = 0; i < n; ++i) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(n), w[i]);
    trip.emplace_back(static_cast<int>(n), static_cast<int>(i), 1.0);
  }
  SparseMatrix aug(n + 1, n + 1);
  aug.setFromTriplets(trip.begin(), trip.end());
  Vector rhs(n + 1);
  rhs << b, 0.0;
  const Vector sol = factor_and_solve(aug, rhs, A);
  out.x = sol.head(n);
  out.multiplier = sol[n];
  out.incompatible = std::abs(out.multiplier) * w.norm() > 1e-10 * std::max(b.norm(), 1e-300);
  return out;
}

Solution newton_solve(const MeanCurvatureOperator& op, const ProblemSpec& spec,
                      const ScalarField& init, const SolverOptions& options) {
  spec.validate();
  if (!(options.newton_tol > 0))
    fail(ErrorKind::InvalidParameter, "solver.newton_tol must be positive");
  if (!init.mesh || init.mesh->vertex_count() != op.mesh().vertex_count())
    fail(ErrorKind::InvalidParameter, "initial field is not defined on the operator mesh");
  if (!init.values.allFinite()) fail(ErrorKind::InvalidParameter, "initial field is not finite");

  const bool neumann = spec.is_neumann();
  const Vector& m = op.load_weights();
  const double shift_scale = static_cast<double>(m.size()) / m.sum();

  SolveReport report;
  report.t = spec.t;
  report.normalization = neumann ? Normalization::MeanZero : Normalization::None;

  Vector u = init.values;
  double shift = 0.0;
  if (neumann) u.array() -= u.mean();
  auto eval = [&](const Vector& v, double s) {
    Vector r = op.residual(v, spec);
    if (neumann) r += s * m;
    return r;
  };

  Vector F = eval(u, shift);
  report.residual_history.push_back(F.norm());
  int it = 0;
  for (;; ++it) {
    if (F.lpNorm<Eigen::Infinity>() <= options.newton_tol) {
      report.converged = true;
      break;
    }
    if (it >= options.max_iter) {
      report.message = "no convergence within max_iter";
      break;
    }
    const SparseMatrix J = op.jacobian(u, spec);
    Vector du;
    double dshift = 0.0;
    if (neumann) {
      const auto ls = linear_solve(J, -F, Constraint::MeanZero, &m);
      du = ls.x;
      dshift = ls.multiplier * shift_scale;
    } else {
      du = linear_solve(J, -F, Constraint::None).x;
    }

    const double f0 = F.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_backtracks; ++k) {
      Vector ut = u + alpha * du;
      const double st = shift + alpha * dshift;
      Vector Ft = eval(ut, st);
      if (Ft.allFinite() && Ft.norm() <= (1.0 - options.sufficient_decrease * alpha) * f0) {
        u = std::move(ut);
        shift = st;
        F = std::move(Ft);
        accepted = true;
        break;
      }
      alpha *= options.armijo_factor;
    }
    if (!accepted) {
      report.message = "line search failed to reduce the residual";
      break;
    }
    report.damping_history.push_back(alpha);
    report.residual_history.push_back(F.norm());
  }
  report.iterations = it;
  report.final_residual_norm = F.lpNorm<Eigen::Infinity>();
  report.compatibility_shift = shift;

  if (!report.converged) {
    std::ostringstream msg;
    msg << "Newton did not converge at t = " << spec.t << " after " << it
        << " iterations (residual " << report.final_residual_norm << "): " << report.message;
    throw SolverFailure(msg.str(), report);
  }
  if (neumann && options.enforce_neumann_compat &&
      std::abs(shift) > options.neumann_compat_tol * spec.H) {
    report.converged = false;
    std::ostringstream msg;
    msg << "incompatible Neumann data: a discrete solution exists only for H = " << spec.H + shift
        << " (shift " << shift << ", tolerance " << options.neumann_compat_tol * spec.H << ")";
    report.message = msg.str();
    throw SolverFailure(msg.str(), report);
  }
  return {ScalarField(op.mesh_ptr(), std::move(u)), report};
}

Solution newton_solve(std::shared_ptr<const TriMesh> mesh, const ProblemSpec& spec,
                      const ScalarField& init, const SolverOptions& options) {
  if (spec.n_dim != 2)
    fail(ErrorKind::InvalidParameter, "planar solve needs n_dim = 2; use solve_meridian");
  return newton_solve(MeanCurvatureOperator(std::move(mesh)), spec, init, options);
}

PoissonInit poisson_init(const MeanCurvatureOperator& op, const ProblemSpec& spec) {
  ProblemSpec linear = spec;
  linear.t = 0.0;
  linear.validate();
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(op.mesh().vertex_count()));
  const SparseMatrix J = op.jacobian(zero, linear);
  const Vector rhs = -op.residual(zero, linear);
  PoissonInit out;
  if (linear.is_neumann()) {
    const auto ls = linear_solve(J, rhs, Constraint::MeanZero, &op.load_weights());
    out.field = ScalarField(op.mesh_ptr(), ls.x);
    out.incompatibility = op.total_flux(zero, linear) - linear.H * op.measure();
  } else {
    out.field = ScalarField(op.mesh_ptr(), linear_solve(J, rhs, Constraint::None).x);
  }
  return out;
}

std::vector<double> uniform_schedule(int steps) {
  if (steps < 2) fail(ErrorKind::InvalidParameter, "homotopy schedule needs >= 2 steps");
  std::vector<double> s(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) s[static_cast<std::size_t>(i)] = static_cast<double>(i) / (steps - 1);
  return s;
}

namespace {

HomotopyStep summarize(const Solution& sol, double H, const CriticalOptions& critical) {
  HomotopyStep step;
  step.t = sol.report.t;
  const Vector& v = sol.field.values;
  step.min_value = v.minCoeff();
  step.max_value = v.maxCoeff();
  step.mean_value = v.mean();
  const CriticalAnalysis cp = find_critical_points(sol.field, H, critical);
  step.critical_count = static_cast<int>(cp.records.size());
  step.min_count = cp.count(CriticalKind::Minimum);
  step.saddle_count = cp.count(CriticalKind::Saddle);
  step.max_count = cp.count(CriticalKind::Maximum);
  step.degenerate_count = cp.count(CriticalKind::Degenerate);
  step.morse = step.degenerate_count == 0;
  double kmin = 0.0;
  bool any = false;
  for (const auto& r : cp.records)
    if (r.classification == CriticalKind::Minimum) {
      kmin = any ? std::min(kmin, r.gauss_curvature) : r.gauss_curvature;
      any = true;
    }
  step.min_gauss_curvature = kmin;
  step.newton_iterations = sol.report.iterations;
  step.compatibility_shift = sol.report.compatibility_shift;
  return step;
}

}  // namespace

HomotopyResult homotopy_solve(const MeanCurvatureOperator& op, const ProblemSpec& spec,
                              const std::vector<double>& schedule, const SolverOptions& options,
                              const CriticalOptions& critical) {
  spec.validate();
  if (schedule.empty() || schedule.back() != 1.0)
    fail(ErrorKind::InvalidParameter, "homotopy schedule must end at t = 1");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] >= 0.0 && schedule[i] <= 1.0))
      fail(ErrorKind::InvalidParameter, "homotopy schedule must lie in [0, 1]");
    if (i > 0 && !(schedule[i] > schedule[i - 1]))
      fail(ErrorKind::InvalidParameter, "homotopy schedule must be strictly increasing");
  }

  auto opts_at = [&](double t) {
    SolverOptions o = options;
    o.enforce_neumann_compat = options.enforce_neumann_compat && t == 1.0;
    return o;
  };
  ProblemSpec s = spec;
  HomotopyTrace trace;

  s.t = schedule[0];
  ScalarField start = schedule[0] == 0.0 ? poisson_init(op, s).field
                                         : ScalarField::constant(op.mesh_ptr(), 0.0);
  Solution current;
  try {
    current = newton_solve(op, s, start, opts_at(s.t));
  } catch (const SolverFailure& e) {
    throw SolverFailure(e.what(), e.report(), trace);
  }
  trace.steps.push_back(summarize(current, spec.H, critical));

  for (std::size_t i = 1; i < schedule.size(); ++i) {
    double t = schedule[i - 1];
    double dt = schedule[i] - t;
    while (t < schedule[i]) {
      const double t_try = std::min(t + dt, schedule[i]);
      s.t = t_try;
      try {
        current = newton_solve(op, s, current.field, opts_at(t_try));
        t = t_try;
      } catch (const SolverFailure& e) {
        // Incompatible Neumann data at t = 1 is not cured by smaller steps.
        if (t_try == 1.0 && e.report().converged == false && !e.report().message.empty() &&
            e.report().message.rfind("incompatible", 0) == 0)
          throw SolverFailure(e.what(), e.report(), trace);
        dt *= 0.5;
        if (dt < options.min_dt) {
          std::ostringstream msg;
          msg << "homotopy stalled before t = " << schedule[i] << " (step below " << options.min_dt
              << "): " << e.what();
          throw SolverFailure(msg.str(), e.report(), trace);
        }
      }
    }
    trace.steps.push_back(summarize(current, spec.H, critical));
  }
  trace.complete = true;
  return {current, trace};
}

}  // namespace cmc
