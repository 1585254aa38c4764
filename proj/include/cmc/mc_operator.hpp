#pragma once

#include <array>
#include <memory>
#include <variant>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "cmc/geometry.hpp"
#include "cmc/mesh.hpp"

namespace cmc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Neumann {
  double c = 0.0;  // prescribed du/dn
};
struct Robin {
  double alpha = 0.0;  // du/dn + alpha u = 0
};
using BoundaryCondition = std::variant<Neumann, Robin>;

struct ProblemSpec {
  double H = 0.0;
  BoundaryCondition bc = Robin{1.0};
  double t = 1.0;  // homotopy parameter: div(grad v / sqrt(1 + t^2 |grad v|^2)) = H
  int n_dim = 2;

  bool is_neumann() const { return std::holds_alternative<Neumann>(bc); }
  // Throws InvalidParameter naming the offending field.
  void validate() const;
};

// Per-vertex values of a piecewise-linear function on a mesh.
struct ScalarField {
  std::shared_ptr<const TriMesh> mesh;
  Vector values;

  ScalarField() = default;
  ScalarField(std::shared_ptr<const TriMesh> m, Vector v);
  static ScalarField constant(std::shared_ptr<const TriMesh> m, double value);
};

// Conormal flux n . T_t(grad u) on the boundary, written in terms of the
// boundary value u and the tangential derivative u_tau, with its partials.
struct FluxValue {
  double g = 0.0;
  double dg_du = 0.0;
  double dg_dtau = 0.0;
};
FluxValue conormal_flux(const BoundaryCondition& bc, double t, double u, double u_tau);

// P1 finite-element discretization of
//   integral w T_t(grad u).grad phi_i + integral w H phi_i - boundary integral w g(u) phi_i
// with cell-centroid quadrature, two-point Gauss quadrature on boundary edges
// and weight w = x^p (p = 0 for planar problems, p = n - 2 on a meridian
// half-plane whose first coordinate is the distance to the axis). Assembly
// runs in ascending cell and edge order, so results are bitwise reproducible.
class MeanCurvatureOperator {
 public:
  explicit MeanCurvatureOperator(std::shared_ptr<const TriMesh> mesh, double weight_exponent = 0.0);

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  double weight_exponent() const { return exponent_; }

  Vector residual(const Vector& u, const ProblemSpec& spec) const;
  SparseMatrix jacobian(const Vector& u, const ProblemSpec& spec) const;

  // Flux at the two quadrature points of outer boundary edge `edge`.
  std::array<double, 2> boundary_flux(const Vector& u, const ProblemSpec& spec,
                                      std::size_t edge) const;
  // Weighted boundary integral of the flux over all outer edges.
  double total_flux(const Vector& u, const ProblemSpec& spec) const;

  // m_i = integral of w phi_i (the discrete load vector for H = 1).
  const Vector& load_weights() const { return load_; }
  double measure() const { return measure_; }
  double boundary_measure() const { return boundary_measure_; }

  // Smallest eigenvalue of dT/dG over all cells; positive for every field.
  double min_ellipticity(const Vector& u, const ProblemSpec& spec) const;

  // Gradient of the P1 function on each cell.
  std::vector<Point> cell_gradients(const Vector& u) const;

 private:
  struct CellData {
    std::array<int, 3> v;
    std::array<Point, 3> grad_phi;
    double weighted_area;
  };
  struct EdgeData {
    int a, b;
    double length;
    std::array<double, 2> xi;      // barycentric coordinate of b at each point
    std::array<double, 2> weight;  // quadrature weight including w
  };

  std::shared_ptr<const TriMesh> mesh_;
  double exponent_;
  std::vector<CellData> cells_;
  std::vector<EdgeData> edges_;
  Vector load_;
  double measure_ = 0.0;
  double boundary_measure_ = 0.0;
};

Vector residual(const ScalarField& field, const ProblemSpec& spec);
SparseMatrix jacobian(const ScalarField& field, const ProblemSpec& spec);
std::array<double, 2> boundary_flux(const ScalarField& field, const ProblemSpec& spec,
                                    std::size_t edge);

enum class Feasibility { Feasible, Borderline, Infeasible };
const char* to_string(Feasibility f);

struct FeasibilityReport {
  Feasibility status = Feasibility::Feasible;
  double margin = 0.0;         // capacity - load
  double flux_capacity = 0.0;  // c / sqrt(1 + t^2 c^2) times boundary measure
  double load = 0.0;           // H times domain measure
  double tolerance = 0.0;
};

// Divergence-theorem bound: a Neumann solution needs H |Omega| to be at most
// the largest conormal flux c/sqrt(1 + t^2 c^2) times |boundary|. This is a
// necessary condition only; |margin| <= rel_tol * capacity is borderline.
FeasibilityReport neumann_feasibility(double domain_measure, double boundary_measure,
                                      const ProblemSpec& spec, double rel_tol = 1e-4);
FeasibilityReport neumann_feasibility(const ConvexDomain& domain, const ProblemSpec& spec,
                                      double rel_tol = 1e-4);

}  // namespace cmc
