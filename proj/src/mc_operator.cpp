#include "cmc/mc_operator.hpp"

#include <cmath>
#include <string>

#include "cmc/error.hpp"

namespace cmc {
namespace {

double weight_at(double x, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::max(x, 0.0), exponent);
}

void require_positive(double value, const char* name) {
  if (!(value > 0) || !std::isfinite(value))
    fail(ErrorKind::InvalidParameter, std::string(name) + " must be positive and finite");
}

}  // namespace

void ProblemSpec::validate() const {
  require_positive(H, "problem.H");
  if (const auto* n = std::get_if<Neumann>(&bc)) require_positive(n->c, "problem.c");
  if (const auto* r = std::get_if<Robin>(&bc)) require_positive(r->alpha, "problem.alpha");
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::InvalidParameter, "problem.t must lie in [0, 1]");
  if (n_dim < 2) fail(ErrorKind::InvalidParameter, "problem.n_dim must be >= 2");
}

ScalarField::ScalarField(std::shared_ptr<const TriMesh> m, Vector v)
    : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) fail(ErrorKind::InvalidParameter, "scalar field without a mesh");
  if (static_cast<std::size_t>(values.size()) != mesh->vertex_count())
    fail(ErrorKind::InvalidParameter, "scalar field length differs from vertex count");
  if (!values.allFinite()) fail(ErrorKind::InvalidParameter, "scalar field has non-finite values");
}

ScalarField ScalarField::constant(std::shared_ptr<const TriMesh> m, double value) {
  const auto n = static_cast<Eigen::Index>(m->vertex_count());
  return ScalarField(std::move(m), Vector::Constant(n, value));
}

FluxValue conormal_flux(const BoundaryCondition& bc, double t, double u, double u_tau) {
  const double t2 = t * t;
  if (const auto* n = std::get_if<Neumann>(&bc)) {
    const double c = n->c;
    const double d = 1.0 + t2 * (c * c + u_tau * u_tau);
    const double sd = std::sqrt(d);
    return {c / sd, 0.0, -c * t2 * u_tau / (d * sd)};
  }
  const double alpha = std::get<Robin>(bc).alpha;
  const double d = 1.0 + t2 * (alpha * alpha * u * u + u_tau * u_tau);
  const double sd = std::sqrt(d);
  return {-alpha * u / sd, -alpha * (1.0 + t2 * u_tau * u_tau) / (d * sd),
          alpha * u * t2 * u_tau / (d * sd)};
}

MeanCurvatureOperator::MeanCurvatureOperator(std::shared_ptr<const TriMesh> mesh,
                                             double weight_exponent)
    : mesh_(std::move(mesh)), exponent_(weight_exponent) {
  const TriMesh& m = *mesh_;
  load_ = Vector::Zero(static_cast<Eigen::Index>(m.vertex_count()));
  cells_.reserve(m.cell_count());
  for (int c = 0; c < static_cast<int>(m.cell_count()); ++c) {
    const auto& t = m.cell(c);
    const double area = m.signed_area(c);
    CellData cd;
    cd.v = t;
    for (int i = 0; i < 3; ++i) {
      const Point& p = m.vertex(t[(i + 1) % 3]);
      const Point& q = m.vertex(t[(i + 2) % 3]);
      // grad phi_i is the inward normal of the opposite edge over twice the area.
      cd.grad_phi[i] = Point(p.y() - q.y(), q.x() - p.x()) / (2.0 * area);
    }
    cd.weighted_area = area * weight_at(m.centroid(c).x(), exponent_);
    measure_ += cd.weighted_area;
    for (int v : t) load_[v] += cd.weighted_area / 3.0;
    cells_.push_back(cd);
  }
  const double offset = 0.5 / std::sqrt(3.0);
  for (const auto& e : m.boundary_edges()) {
    if (e.kind != EdgeKind::Outer) continue;
    EdgeData ed;
    ed.a = e.a;
    ed.b = e.b;
    ed.length = e.length;
    ed.xi = {0.5 - offset, 0.5 + offset};
    for (int q = 0; q < 2; ++q) {
      const Point x = (1.0 - ed.xi[q]) * m.vertex(e.a) + ed.xi[q] * m.vertex(e.b);
      ed.weight[q] = 0.5 * e.length * weight_at(x.x(), exponent_);
      boundary_measure_ += ed.weight[q];
    }
    edges_.push_back(ed);
  }
}

std::vector<Point> MeanCurvatureOperator::cell_gradients(const Vector& u) const {
  std::vector<Point> grads;
  grads.reserve(cells_.size());
  for (const auto& c : cells_)
    grads.push_back(u[c.v[0]] * c.grad_phi[0] + u[c.v[1]] * c.grad_phi[1] +
                    u[c.v[2]] * c.grad_phi[2]);
  return grads;
}

Vector MeanCurvatureOperator::residual(const Vector& u, const ProblemSpec& spec) const {
  const double t2 = spec.t * spec.t;
  Vector r = spec.H * load_;
  for (const auto& c : cells_) {
    const Point g = u[c.v[0]] * c.grad_phi[0] + u[c.v[1]] * c.grad_phi[1] +
                    u[c.v[2]] * c.grad_phi[2];
    const Point flux = g / std::sqrt(1.0 + t2 * g.squaredNorm());
    for (int i = 0; i < 3; ++i) r[c.v[i]] += c.weighted_area * flux.dot(c.grad_phi[i]);
  }
  for (const auto& e : edges_) {
    const double tau = (u[e.b] - u[e.a]) / e.length;
    for (int q = 0; q < 2; ++q) {
      const double uq = (1.0 - e.xi[q]) * u[e.a] + e.xi[q] * u[e.b];
      const double g = conormal_flux(spec.bc, spec.t, uq, tau).g;
      r[e.a] -= e.weight[q] * g * (1.0 - e.xi[q]);
      r[e.b] -= e.weight[q] * g * e.xi[q];
    }
  }
  return r;
}

SparseMatrix MeanCurvatureOperator::jacobian(const Vector& u, const ProblemSpec& spec) const {
  const double t2 = spec.t * spec.t;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(cells_.size() * 9 + edges_.size() * 4);
  for (const auto& c : cells_) {
    const Point g = u[c.v[0]] * c.grad_phi[0] + u[c.v[1]] * c.grad_phi[1] +
                    u[c.v[2]] * c.grad_phi[2];
    const double s = 1.0 + t2 * g.squaredNorm();
    const Eigen::Matrix2d dT =
        (Eigen::Matrix2d::Identity() - (t2 / s) * g * g.transpose()) / std::sqrt(s);
    for (int i = 0; i < 3; ++i) {
      const Point row = dT.transpose() * c.grad_phi[i];
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(c.v[i], c.v[j], c.weighted_area * row.dot(c.grad_phi[j]));
    }
  }
  for (const auto& e : edges_) {
    const double tau = (u[e.b] - u[e.a]) / e.length;
    for (int q = 0; q < 2; ++q) {
      const std::array<double, 2> phi{1.0 - e.xi[q], e.xi[q]};
      const std::array<int, 2> idx{e.a, e.b};
      const std::array<double, 2> dtau{-1.0 / e.length, 1.0 / e.length};
      const double uq = phi[0] * u[e.a] + phi[1] * u[e.b];
      const FluxValue f = conormal_flux(spec.bc, spec.t, uq, tau);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          trip.emplace_back(idx[i], idx[j],
                            -e.weight[q] * phi[i] * (f.dg_du * phi[j] + f.dg_dtau * dtau[j]));
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh_->vertex_count());
  SparseMatrix jac(n, n);
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

std::array<double, 2> MeanCurvatureOperator::boundary_flux(const Vector& u,
                                                           const ProblemSpec& spec,
                                                           std::size_t edge) const {
  if (edge >= edges_.size()) fail(ErrorKind::InvalidParameter, "boundary edge index out of range");
  const EdgeData& e = edges_[edge];
  const double tau = (u[e.b] - u[e.a]) / e.length;
  std::array<double, 2> out{};
  for (int q = 0; q < 2; ++q) {
    const double uq = (1.0 - e.xi[q]) * u[e.a] + e.xi[q] * u[e.b];
    out[q] = conormal_flux(spec.bc, spec.t, uq, tau).g;
  }
  return out;
}

double MeanCurvatureOperator::total_flux(const Vector& u, const ProblemSpec& spec) const {
  double total = 0.0;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto g = boundary_flux(u, spec, k);
    total += edges_[k].weight[0] * g[0] + edges_[k].weight[1] * g[1];
  }
  return total;
}

double MeanCurvatureOperator::min_ellipticity(const Vector& u, const ProblemSpec& spec) const {
  const double t2 = spec.t * spec.t;
  double lo = std::numeric_limits<double>::infinity();
  for (const Point& g : cell_gradients(u)) {
    const double s = 1.0 + t2 * g.squaredNorm();
    const Eigen::Matrix2d dT =
        (Eigen::Matrix2d::Identity() - (t2 / s) * g * g.transpose()) / std::sqrt(s);
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(dT).eigenvalues();
    lo = std::min(lo, ev.minCoeff());
  }
  return lo;
}

namespace {
void require_planar(const ProblemSpec& spec) {
  spec.validate();
  if (spec.n_dim != 2)
    fail(ErrorKind::InvalidParameter,
         "planar operator needs n_dim = 2; use the meridian solver for n_dim >= 3");
}
}  // namespace

Vector residual(const ScalarField& field, const ProblemSpec& spec) {
  require_planar(spec);
  return MeanCurvatureOperator(field.mesh).residual(field.values, spec);
}

SparseMatrix jacobian(const ScalarField& field, const ProblemSpec& spec) {
  require_planar(spec);
  return MeanCurvatureOperator(field.mesh).jacobian(field.values, spec);
}

std::array<double, 2> boundary_flux(const ScalarField& field, const ProblemSpec& spec,
                                    std::size_t edge) {
  require_planar(spec);
  return MeanCurvatureOperator(field.mesh).boundary_flux(field.values, spec, edge);
}

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::Borderline: return "borderline";
    case Feasibility::Infeasible: return "infeasible";
  }
  return "unknown";
}

FeasibilityReport neumann_feasibility(double domain_measure, double boundary_measure,
                                      const ProblemSpec& spec, double rel_tol) {
  spec.validate();
  const auto* n = std::get_if<Neumann>(&spec.bc);
  if (!n) fail(ErrorKind::InvalidParameter, "feasibility check applies to Neumann data only");
  FeasibilityReport rep;
  rep.flux_capacity = n->c / std::sqrt(1.0 + spec.t * spec.t * n->c * n->c) * boundary_measure;
  rep.load = spec.H * domain_measure;
  rep.margin = rep.flux_capacity - rep.load;
  rep.tolerance = rel_tol * rep.flux_capacity;
  if (rep.margin > rep.tolerance)
    rep.status = Feasibility::Feasible;
  else if (rep.margin >= -rep.tolerance)
    rep.status = Feasibility::Borderline;
  else
    rep.status = Feasibility::Infeasible;
  return rep;
}

FeasibilityReport neumann_feasibility(const ConvexDomain& domain, const ProblemSpec& spec,
                                      double rel_tol) {
  return neumann_feasibility(domain.area(), domain.length(), spec, rel_tol);
}

}  // namespace cmc
