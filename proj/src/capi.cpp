#include "cmc/cmc.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "cmc/critical.hpp"
#include "cmc/error.hpp"
#include "cmc/geometry.hpp"
#include "cmc/mesh.hpp"
#include "cmc/pipeline.hpp"
#include "cmc/solver.hpp"

struct cmc_domain {
  cmc::ConvexDomain domain;
};

struct cmc_mesh {
  std::shared_ptr<const cmc::TriMesh> mesh;
};

struct cmc_field {
  cmc::ScalarField field;
};

namespace {

thread_local std::string last_error;

cmc_status code(cmc::ErrorKind k) {
  using cmc::ErrorKind;
  switch (k) {
    case ErrorKind::InvalidParameter: return CMC_INVALID_PARAMETER;
    case ErrorKind::MeshQualityFailure: return CMC_MESH_QUALITY_FAILURE;
    case ErrorKind::SolverFailure: return CMC_SOLVER_FAILURE;
    case ErrorKind::LinearFailure: return CMC_LINEAR_FAILURE;
    case ErrorKind::OutOfDomain: return CMC_OUT_OF_DOMAIN;
    case ErrorKind::IllConditionedLoop: return CMC_ILL_CONDITIONED_LOOP;
    case ErrorKind::UnderflowFit: return CMC_UNDERFLOW_FIT;
    case ErrorKind::ConfigError: return CMC_CONFIG_ERROR;
    case ErrorKind::IoError: return CMC_IO_ERROR;
  }
  return CMC_INTERNAL_ERROR;
}

template <class F>
cmc_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return CMC_OK;
  } catch (const cmc::Error& e) {
    last_error = e.what();
    return code(e.kind());
  } catch (const std::exception& e) {
    last_error = e.what();
    return CMC_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown exception";
    return CMC_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) cmc::fail(cmc::ErrorKind::InvalidParameter, what);
}

cmc::ProblemSpec to_spec(const cmc_problem* p) {
  require(p != nullptr, "problem is null");
  cmc::ProblemSpec s;
  s.H = p->H;
  s.t = p->t;
  s.n_dim = 2;
  if (p->bc == CMC_BC_ROBIN)
    s.bc = cmc::Robin{p->param};
  else if (p->bc == CMC_BC_NEUMANN)
    s.bc = cmc::Neumann{p->param};
  else
    cmc::fail(cmc::ErrorKind::InvalidParameter, "problem.bc must be CMC_BC_ROBIN or CMC_BC_NEUMANN");
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* cmc_version(void) { return "0.1.0"; }

const char* cmc_last_error(void) { return last_error.c_str(); }

const char* cmc_status_name(cmc_status status) {
  switch (status) {
    case CMC_OK: return "ok";
    case CMC_INTERNAL_ERROR: return "internal-error";
    default: break;
  }
  for (int k = 0; k <= static_cast<int>(cmc::ErrorKind::IoError); ++k)
    if (code(static_cast<cmc::ErrorKind>(k)) == status) return cmc::to_string(static_cast<cmc::ErrorKind>(k));
  return "unknown";
}

cmc_status cmc_run(const char* command, const char* config_json, const char* out_dir,
                   const char* const* overrides, size_t n_overrides, int* exit_code, char** report) {
  return guarded([&] {
    require(command && config_json && exit_code, "command, config_json and exit_code are required");
    require(n_overrides == 0 || overrides, "overrides is null");
    std::vector<std::string> ov;
    for (size_t i = 0; i < n_overrides; ++i) {
      require(overrides[i] != nullptr, "override entry is null");
      ov.emplace_back(overrides[i]);
    }
    const auto res = cmc::run_document(command, config_json, ov, out_dir ? out_dir : "");
    *exit_code = res.exit_code;
    if (report) {
      *report = static_cast<char*>(std::malloc(res.report.size() + 1));
      if (!*report) throw std::bad_alloc();
      std::memcpy(*report, res.report.c_str(), res.report.size() + 1);
    }
  });
}

void cmc_string_free(char* s) { std::free(s); }

cmc_status cmc_domain_disk(double R, cmc_domain** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new cmc_domain{cmc::make_disk(R)};
  });
}

cmc_status cmc_domain_ellipse(double a, double b, cmc_domain** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new cmc_domain{cmc::make_ellipse(a, b)};
  });
}

cmc_status cmc_domain_rounded_polygon(const double* xy, size_t n_vertices, double r, cmc_domain** out) {
  return guarded([&] {
    require(out != nullptr && xy != nullptr, "xy and out are required");
    std::vector<cmc::Point> v;
    for (size_t i = 0; i < n_vertices; ++i) v.emplace_back(xy[2 * i], xy[2 * i + 1]);
    *out = new cmc_domain{cmc::make_rounded_polygon(v, r)};
  });
}

double cmc_domain_area(const cmc_domain* d) { return d ? d->domain.area() : 0.0; }

double cmc_domain_length(const cmc_domain* d) { return d ? d->domain.length() : 0.0; }

cmc_status cmc_domain_feasibility(const cmc_domain* d, const cmc_problem* p, cmc_feasibility* status,
                                  double* margin) {
  return guarded([&] {
    require(d && status, "domain and status are required");
    const auto spec = to_spec(p);
    require(spec.is_neumann(), "feasibility applies to Neumann data");
    const auto f = cmc::neumann_feasibility(d->domain, spec);
    *status = static_cast<cmc_feasibility>(static_cast<int>(f.status));
    if (margin) *margin = f.margin;
  });
}

void cmc_domain_destroy(cmc_domain* d) { delete d; }

cmc_status cmc_mesh_create(const cmc_domain* d, double h_target, cmc_mesh** out) {
  return guarded([&] {
    require(d && out, "domain and out are required");
    *out = new cmc_mesh{std::make_shared<const cmc::TriMesh>(cmc::triangulate(d->domain, h_target))};
  });
}

size_t cmc_mesh_vertex_count(const cmc_mesh* m) { return m ? m->mesh->vertex_count() : 0; }

size_t cmc_mesh_cell_count(const cmc_mesh* m) { return m ? m->mesh->cell_count() : 0; }

double cmc_mesh_h(const cmc_mesh* m) { return m ? m->mesh->h() : 0.0; }

uint64_t cmc_mesh_hash(const cmc_mesh* m) { return m ? m->mesh->hash() : 0; }

cmc_status cmc_mesh_vertices(const cmc_mesh* m, double* xy, size_t capacity) {
  return guarded([&] {
    require(m && xy, "mesh and xy are required");
    require(capacity >= 2 * m->mesh->vertex_count(), "capacity below 2 * vertex_count");
    for (size_t i = 0; i < m->mesh->vertex_count(); ++i) {
      xy[2 * i] = m->mesh->vertex(static_cast<int>(i)).x();
      xy[2 * i + 1] = m->mesh->vertex(static_cast<int>(i)).y();
    }
  });
}

void cmc_mesh_destroy(cmc_mesh* m) { delete m; }

cmc_status cmc_solve(const cmc_mesh* m, const cmc_problem* p, int schedule_steps, cmc_field** out,
                     cmc_solve_info* info) {
  return guarded([&] {
    require(m && out, "mesh and out are required");
    const auto spec = to_spec(p);
    const cmc::MeanCurvatureOperator op(m->mesh);
    cmc::Solution sol;
    if (spec.t == 1.0) {
      sol = cmc::homotopy_solve(op, spec, cmc::uniform_schedule(schedule_steps)).solution;
    } else {
      sol = cmc::newton_solve(op, spec, cmc::poisson_init(op, spec).field);
    }
    if (info) {
      info->converged = sol.report.converged ? 1 : 0;
      info->iterations = sol.report.iterations;
      info->final_residual_norm = sol.report.final_residual_norm;
      info->compatibility_shift = sol.report.compatibility_shift;
    }
    *out = new cmc_field{std::move(sol.field)};
  });
}

size_t cmc_field_size(const cmc_field* f) { return f ? static_cast<size_t>(f->field.values.size()) : 0; }

cmc_status cmc_field_values(const cmc_field* f, double* values, size_t capacity) {
  return guarded([&] {
    require(f && values, "field and values are required");
    const auto n = static_cast<size_t>(f->field.values.size());
    require(capacity >= n, "capacity below field size");
    std::memcpy(values, f->field.values.data(), n * sizeof(double));
  });
}

cmc_status cmc_field_critical_points(const cmc_field* f, double H, cmc_critical_point* out,
                                     size_t capacity, size_t* count) {
  return guarded([&] {
    require(f && count, "field and count are required");
    require(capacity == 0 || out, "out is null");
    const auto cp = cmc::find_critical_points(f->field, H);
    *count = cp.records.size();
    for (size_t i = 0; i < cp.records.size() && i < capacity; ++i) {
      const auto& r = cp.records[i];
      cmc_critical_point& c = out[i];
      c.x = r.location.x();
      c.y = r.location.y();
      c.value = r.value;
      c.hessian[0] = r.hessian(0, 0);
      c.hessian[1] = r.hessian(0, 1);
      c.hessian[2] = r.hessian(1, 1);
      c.gauss_curvature = r.gauss_curvature;
      c.kind = static_cast<cmc_critical_kind>(static_cast<int>(r.classification));
      c.index = r.index;
      c.index_valid = r.index_valid ? 1 : 0;
    }
  });
}

void cmc_field_destroy(cmc_field* f) { delete f; }

}  // extern "C"
