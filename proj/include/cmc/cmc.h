/* C interface to the mean curvature solver and verifier. All objects are
 * opaque handles released with the matching *_destroy function. Functions
 * return a status code; on failure cmc_last_error() describes it (the
 * message is thread-local and valid until the next call on that thread). */
#ifndef CMC_H
#define CMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CMC_API __declspec(dllexport)
#else
#define CMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmc_status {
  CMC_OK = 0,
  CMC_INVALID_PARAMETER = 1,
  CMC_MESH_QUALITY_FAILURE = 2,
  CMC_SOLVER_FAILURE = 3,
  CMC_LINEAR_FAILURE = 4,
  CMC_OUT_OF_DOMAIN = 5,
  CMC_ILL_CONDITIONED_LOOP = 6,
  CMC_UNDERFLOW_FIT = 7,
  CMC_CONFIG_ERROR = 8,
  CMC_IO_ERROR = 9,
  CMC_INTERNAL_ERROR = 10
} cmc_status;

typedef enum cmc_bc { CMC_BC_ROBIN = 0, CMC_BC_NEUMANN = 1 } cmc_bc;

typedef enum cmc_feasibility {
  CMC_FEASIBLE = 0,
  CMC_BORDERLINE = 1,
  CMC_INFEASIBLE = 2
} cmc_feasibility;

typedef enum cmc_critical_kind {
  CMC_MINIMUM = 0,
  CMC_MAXIMUM = 1,
  CMC_SADDLE = 2,
  CMC_DEGENERATE = 3
} cmc_critical_kind;

typedef struct cmc_problem {
  double H;
  cmc_bc bc;
  double param; /* alpha for Robin, c for Neumann */
  double t;
} cmc_problem;

typedef struct cmc_solve_info {
  int converged;
  int iterations;
  double final_residual_norm;
  double compatibility_shift;
} cmc_solve_info;

typedef struct cmc_critical_point {
  double x, y;
  double value;
  double hessian[3]; /* h11, h12, h22 */
  double gauss_curvature;
  cmc_critical_kind kind;
  int index;
  int index_valid;
} cmc_critical_point;

typedef struct cmc_domain cmc_domain;
typedef struct cmc_mesh cmc_mesh;
typedef struct cmc_field cmc_field;

CMC_API const char* cmc_version(void);
CMC_API const char* cmc_last_error(void);
CMC_API const char* cmc_status_name(cmc_status status);

/* Runs a CLI command (solve, homotopy, axisym, compare, verify, mesh-report)
 * on a JSON configuration. *exit_code receives the process exit code and
 * *report, when non-null, a copy of report.json to free with
 * cmc_string_free. Configuration and run-time failures are reported through
 * the exit code; the status is CMC_OK unless the arguments are unusable. */
CMC_API cmc_status cmc_run(const char* command, const char* config_json, const char* out_dir,
                           const char* const* overrides, size_t n_overrides, int* exit_code,
                           char** report);
CMC_API void cmc_string_free(char* s);

CMC_API cmc_status cmc_domain_disk(double R, cmc_domain** out);
CMC_API cmc_status cmc_domain_ellipse(double a, double b, cmc_domain** out);
/* xy holds n_vertices interleaved coordinates, counterclockwise. */
CMC_API cmc_status cmc_domain_rounded_polygon(const double* xy, size_t n_vertices, double r,
                                              cmc_domain** out);
CMC_API double cmc_domain_area(const cmc_domain* d);
CMC_API double cmc_domain_length(const cmc_domain* d);
CMC_API cmc_status cmc_domain_feasibility(const cmc_domain* d, const cmc_problem* p,
                                          cmc_feasibility* status, double* margin);
CMC_API void cmc_domain_destroy(cmc_domain* d);

CMC_API cmc_status cmc_mesh_create(const cmc_domain* d, double h_target, cmc_mesh** out);
CMC_API size_t cmc_mesh_vertex_count(const cmc_mesh* m);
CMC_API size_t cmc_mesh_cell_count(const cmc_mesh* m);
CMC_API double cmc_mesh_h(const cmc_mesh* m);
CMC_API uint64_t cmc_mesh_hash(const cmc_mesh* m);
/* Copies 2 * vertex_count coordinates. */
CMC_API cmc_status cmc_mesh_vertices(const cmc_mesh* m, double* xy, size_t capacity);
CMC_API void cmc_mesh_destroy(cmc_mesh* m);

/* Solves on a planar mesh: continuation over schedule_steps uniform values of
 * t when p->t = 1, a direct Newton solve otherwise. */
CMC_API cmc_status cmc_solve(const cmc_mesh* m, const cmc_problem* p, int schedule_steps,
                             cmc_field** out, cmc_solve_info* info);
CMC_API size_t cmc_field_size(const cmc_field* f);
CMC_API cmc_status cmc_field_values(const cmc_field* f, double* values, size_t capacity);
/* Writes up to capacity records; *count receives the number found. */
CMC_API cmc_status cmc_field_critical_points(const cmc_field* f, double H, cmc_critical_point* out,
                                             size_t capacity, size_t* count);
CMC_API void cmc_field_destroy(cmc_field* f);

#ifdef __cplusplus
}
#endif

#endif
