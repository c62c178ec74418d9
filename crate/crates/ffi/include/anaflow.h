#ifndef ANAFLOW_H
#define ANAFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AnaflowStatus {
  ANAFLOW_STATUS_OK = 0,
  ANAFLOW_STATUS_NULL_POINTER = 1,
  ANAFLOW_STATUS_INVALID_UTF8 = 2,
  ANAFLOW_STATUS_SYNTAX = 3,
  ANAFLOW_STATUS_INVALID = 4,
  ANAFLOW_STATUS_DOMAIN = 5,
  ANAFLOW_STATUS_NOT_EXTENDABLE = 6,
  ANAFLOW_STATUS_TAIL_UNREACHABLE = 7,
  ANAFLOW_STATUS_BLOW_UP = 8,
  ANAFLOW_STATUS_MISMATCH = 9,
  ANAFLOW_STATUS_BUFFER_TOO_SMALL = 10,
  ANAFLOW_STATUS_PANIC = 11,
  ANAFLOW_STATUS_OTHER = 12,
} AnaflowStatus;

/*
 A convergence certificate together with the field it was issued for.
 */
typedef struct AnaflowCertificate AnaflowCertificate;

/*
 A (possibly piecewise constant in time) vector field.
 */
typedef struct AnaflowField AnaflowField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Version string of the engine; static, never freed.
 */
const char *anaflow_version(void);

/*
 Copies the last error message of this thread into `buf` (NUL
 terminated, truncated to `len`). Returns the full message length
 including the terminator, or 0 when there is no error.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t anaflow_last_error(char *buf, size_t len);

/*
 Parses `n` component expressions into a field on `[t0, t1]`.

 # Safety
 `components` must point to `n` NUL-terminated strings; `out` must be
 writable.
 */
enum AnaflowStatus anaflow_field_parse(const char *const *components,
                                       size_t n,
                                       double t0,
                                       double t1,
                                       struct AnaflowField **out);

/*
 Reads a step field from its JSON form
 (`{"n", "breakpoints", "pieces": [{"components": [...]}]}`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AnaflowStatus anaflow_field_from_json(const char *json, struct AnaflowField **out);

/*
 State dimension, or 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t anaflow_field_dim(const struct AnaflowField *field);

/*
 # Safety
 `field` must be null or a handle not yet freed.
 */
void anaflow_field_free(struct AnaflowField *field);

/*
 Certifies the flow over the whole span of `field` for initial points in
 the box `[lo, hi]` (each of length `n`), with polydiscs of radius
 `radius` and the coordinate `x1` as observable.

 # Safety
 `field` must be live; `lo` and `hi` must hold `n` doubles; `out` must be
 writable.
 */
enum AnaflowStatus anaflow_certify(const struct AnaflowField *field,
                                   const double *lo,
                                   const double *hi,
                                   size_t n,
                                   double radius,
                                   double target_tail,
                                   struct AnaflowCertificate **out);

/*
 Number of certified subintervals, or 0 for a null handle.

 # Safety
 `cert` must be null or a live handle.
 */
size_t anaflow_certificate_subintervals(const struct AnaflowCertificate *cert);

/*
 Sum of the per-subinterval tail bounds, or NaN for a null handle.

 # Safety
 `cert` must be null or a live handle.
 */
double anaflow_certificate_total_tail(const struct AnaflowCertificate *cert);

/*
 The certificate as JSON; release with [`anaflow_string_free`].

 # Safety
 `cert` must be live; `out` must be writable.
 */
enum AnaflowStatus anaflow_certificate_to_json(const struct AnaflowCertificate *cert, char **out);

/*
 # Safety
 `cert` must be null or a handle not yet freed.
 */
void anaflow_certificate_free(struct AnaflowCertificate *cert);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void anaflow_string_free(char *s);

/*
 Series flow from `(t0, x0)` to `t`. Writes `n` coordinates to `point`
 and the residual bound to `residual`.

 # Safety
 Handles must be live; `x0` and `point` must hold `n` doubles;
 `residual` must be writable.
 */
enum AnaflowStatus anaflow_flow_eval(const struct AnaflowField *field,
                                     const struct AnaflowCertificate *cert,
                                     double t0,
                                     double t,
                                     const double *x0,
                                     size_t n,
                                     double *point,
                                     double *residual);

/*
 Classical RK4 reference flow with `steps` steps.

 # Safety
 `field` must be live; `x0` and `point` must hold `n` doubles.
 */
enum AnaflowStatus anaflow_rk4_flow(const struct AnaflowField *field,
                                    double t0,
                                    double t,
                                    const double *x0,
                                    size_t n,
                                    size_t steps,
                                    double *point);

/*
 `p_{K,a}(f)` for `a_m = d ratio^m` on the box `[lo, hi]` sampled with
 `grid` points per axis, truncated at `max_order`.

 # Safety
 `expr` must be NUL-terminated; `lo`, `hi` must hold `n` doubles; `out`
 must be writable.
 */
enum AnaflowStatus anaflow_seminorm(const char *expr,
                                    const double *lo,
                                    const double *hi,
                                    size_t n,
                                    size_t grid,
                                    double d,
                                    double ratio,
                                    size_t max_order,
                                    double t,
                                    double *out);

/*
 Estimated distance from `x0` to the nearest complex singularity of
 `expr`; `INFINITY` for entire functions.

 # Safety
 `expr` must be NUL-terminated; `x0` must hold `n` doubles; `out` must be
 writable.
 */
enum AnaflowStatus anaflow_radius_at(const char *expr,
                                     const double *x0,
                                     size_t n,
                                     double t,
                                     double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ANAFLOW_H */
