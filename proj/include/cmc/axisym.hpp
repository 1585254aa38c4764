#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cmc/critical.hpp"
#include "cmc/nodal.hpp"
#include "cmc/solver.hpp"

namespace cmc {

// Meridian section of a domain of revolution about the x_n axis: the half
// ellipse r^2/a^2 + x_n^2/b^2 < 1, r > 0. Mesh coordinates are (r, x_n).
struct MeridianProfile {
  double a = 1.0;  // extent along r
  double b = 1.0;  // half extent along the axis
};
MeridianProfile ball_profile(double R);
MeridianProfile spheroid_profile(double a, double b);

struct MeridianProblem {
  MeridianProfile profile;
  ProblemSpec spec;  // spec.n_dim is the dimension of the revolved domain

  void validate() const;
};

// Triangulation of the half section. The boundary loop runs over the curved
// arc from (0, -b) to (0, b) (outer edges) and back down the axis (axis
// edges, no flux).
TriMesh meridian_mesh(const MeridianProblem& problem, double h_target,
                      const MeshOptions& options = {});

// Operator with the revolution weight r^(n-2).
MeanCurvatureOperator meridian_operator(std::shared_ptr<const TriMesh> mesh, int n_dim);

Solution solve_meridian(const MeridianProblem& problem, std::shared_ptr<const TriMesh> mesh,
                        const ScalarField& init, const SolverOptions& options = {});

// Axis vertices ordered by increasing x_n.
std::vector<int> axis_chain(const TriMesh& mesh);

struct MonotoneReport {
  bool holds = true;
  bool boundary_case = false;  // min v_r within tol of 0
  double min_vr = 0.0;
  Point worst = Point::Zero();
  int checked = 0;
};

// Recovered dv/dr > -tol at every vertex with r > 2h.
MonotoneReport check_monotone(const ScalarField& v, double tol = 1e-10);

struct AxisCritical {
  bool found = false;
  Point location = Point::Zero();  // (0, x_n)
  double value = 0.0;
  int axis_extrema = 0;   // strict local extrema of v along the axis chain
  int off_axis_count = 0; // critical points with r > 2h (critical spheres of u)
  std::vector<CriticalPointRecord> off_axis;
};

AxisCritical meridian_critical_points(const ScalarField& v, double H,
                                      const CriticalOptions& options = {});

struct AxisHessian {
  Point location = Point::Zero();
  // u_{x_k x_k}, k = 1..n-1, then u_{x_n x_n}.
  std::vector<double> diagonal;
  double trace = 0.0;
  // Coefficients of r x_n and r / rho fitted to the residual of the smooth
  // model; both vanish for a smooth revolved u.
  double cross_rz = 0.0;
  double cone = 0.0;
  double rms = 0.0;
};

// Least-squares fit v = c0 + c1 z + A r^2/2 + C z^2/2 over vertices within
// 5h of p (z measured from p). Throws InvalidParameter without an axis point.
AxisHessian axis_hessian(const ScalarField& v, int n_dim, const AxisCritical& axis);

struct AxialNodalReport {
  NodalArcSet arcs;
  bool single_axis_to_boundary = false;
  std::string detail;
};

// Zero set of the recovered dv/dx_n.
AxialNodalReport axial_derivative_nodal_set(const ScalarField& v);

// omega_{n-2} times the r^(n-2) weighted area: the volume of the revolved
// domain, and its exact value for the profile.
double revolved_volume(const TriMesh& mesh, int n_dim);
double exact_revolved_volume(const MeridianProfile& profile, int n_dim);

}  // namespace cmc
