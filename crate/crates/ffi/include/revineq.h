#ifndef REVINEQ_H
#define REVINEQ_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Status codes. 0 to 3 coincide with the exit codes of the CLI.
 */
typedef enum RevineqStatus {
  REVINEQ_STATUS_OK = 0,
  /*
   An inequality or self-check failed its margin.
   */
  REVINEQ_STATUS_MARGIN_FAILED = 1,
  /*
   Invalid argument, configuration or null pointer.
   */
  REVINEQ_STATUS_INVALID_INPUT = 2,
  /*
   Divergent, degenerate or non-finite computation.
   */
  REVINEQ_STATUS_NUMERICAL = 3,
  /*
   A panic was caught at the boundary.
   */
  REVINEQ_STATUS_INTERNAL = 4,
} RevineqStatus;

/*
 Opaque handle to a homogeneous group with a quasi-norm.
 */
typedef struct RevineqGeometry RevineqGeometry;

/*
 Quadrature settings; `scheme` is 0 for Monte Carlo and 1 for the tensor grid.
 */
typedef struct RevineqQuadrature {
  uint32_t scheme;
  uintptr_t samples;
  uintptr_t nodes_per_axis;
  uint64_t seed;
} RevineqQuadrature;

/*
 Flat copy of a verification report.
 */
typedef struct RevineqReport {
  double lhs;
  double rhs;
  double lhs_stderr;
  double rhs_stderr;
  double ratio;
  double ratio_stderr;
  double analytic_constant;
  double margin;
  double combined_stderr;
  double sphere_measure;
  double sphere_stderr;
  uint64_t samples_used;
  bool pass;
} RevineqReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static string.
 */
const char *revineq_version(void);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into the library on the same thread.
 */
const char *revineq_last_error_message(void);

/*
 Default quadrature settings.
 */
struct RevineqQuadrature revineq_quadrature_default(void);

/*
 Creates `abelian` R^n or `heisenberg` H^n with the named norm; a null
 `norm` selects euclidean or koranyi respectively.

 # Safety
 `group` and `norm` are null or NUL-terminated strings; `out` is writable.
 */
enum RevineqStatus revineq_geometry_new(const char *group,
                                        uintptr_t n,
                                        const char *norm,
                                        struct RevineqGeometry **out);

/*
 Creates the graded abelian group with weights `num[i] / den[i]` and the
 anisotropic gauge.

 # Safety
 `num` and `den` point to `len` readable values; `out` is writable.
 */
enum RevineqStatus revineq_geometry_new_graded(const uint64_t *num,
                                               const uint64_t *den,
                                               uintptr_t len,
                                               struct RevineqGeometry **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `g` is null or a live handle, freed at most once.
 */
void revineq_geometry_free(struct RevineqGeometry *g);

/*
 Topological dimension N of the chart, or 0 for a null handle.

 # Safety
 `g` is null or a live handle.
 */
uintptr_t revineq_geometry_dim(const struct RevineqGeometry *g);

/*
 Homogeneous dimension Q, or NaN for a null handle.

 # Safety
 `g` is null or a live handle.
 */
double revineq_geometry_homogeneous_dimension(const struct RevineqGeometry *g);

/*
 `|x|`.

 # Safety
 `x` points to `len` doubles and `out` is writable.
 */
enum RevineqStatus revineq_quasi_norm(const struct RevineqGeometry *g,
                                      const double *x,
                                      uintptr_t len,
                                      double *out);

/*
 `out = D_s(x)`; `out` may alias `x`.

 # Safety
 `x` points to `len` doubles and `out` to `len` writable doubles.
 */
enum RevineqStatus revineq_dilate(const struct RevineqGeometry *g,
                                  double s,
                                  const double *x,
                                  uintptr_t len,
                                  double *out);

/*
 `out = x y`; `out` may alias either input.

 # Safety
 `x`, `y` point to `len` doubles and `out` to `len` writable doubles.
 */
enum RevineqStatus revineq_group_mul(const struct RevineqGeometry *g,
                                     const double *x,
                                     const double *y,
                                     uintptr_t len,
                                     double *out);

/*
 Measure of the unit quasi-sphere with its standard error.

 # Safety
 `quad`, `value` and `stderr` are valid pointers.
 */
enum RevineqStatus revineq_sphere_measure(const struct RevineqGeometry *g,
                                          const struct RevineqQuadrature *quad,
                                          double *value,
                                          double *stderr);

/*
 Reverse Hardy inequality for the one-parameter trial family `family`
 (`exp_decay`, `power_decay`, `gaussian`, `smooth_bump`) at `param`.
 Returns `Ok` on pass and `MarginFailed` otherwise; `out` is filled in
 both cases.

 # Safety
 `family` is a NUL-terminated string; `quad` and `out` are valid pointers.
 */
enum RevineqStatus revineq_verify_reverse_hardy(const struct RevineqGeometry *g,
                                                const char *family,
                                                double param,
                                                double p,
                                                const struct RevineqQuadrature *quad,
                                                struct RevineqReport *out);

/*
 Runs a CLI command (`verify`, `estimate`, `sweep`, `axioms`) on a JSON
 run configuration. The report is returned through `report_json` (free it
 with `revineq_string_free`); when `out_dir` is non-null every artifact is
 also written there. A negative `seed` keeps the configured seeds.

 # Safety
 `config_json` and `command` are NUL-terminated strings, `out_dir` is null
 or one, and `report_json` is null or writable.
 */
enum RevineqStatus revineq_run_config_json(const char *config_json,
                                           const char *command,
                                           int64_t seed,
                                           const char *out_dir,
                                           char **report_json);

/*
 Frees a string returned by this library; null is ignored.

 # Safety
 `s` is null or a string from this library, freed at most once.
 */
void revineq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REVINEQ_H */
