#ifndef UAOSC_H
#define UAOSC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum UaoscStatus {
  UAOSC_STATUS_OK = 0,
  UAOSC_STATUS_NULL_POINTER = 1,
  UAOSC_STATUS_INVALID_ARGUMENT = 2,
  UAOSC_STATUS_CONFIG = 3,
  UAOSC_STATUS_NUMERIC = 4,
  UAOSC_STATUS_SOLVE = 5,
  UAOSC_STATUS_PARSE = 6,
  UAOSC_STATUS_IO = 7,
  UAOSC_STATUS_BUFFER_TOO_SMALL = 8,
  UAOSC_STATUS_PANIC = 9,
} UaoscStatus;

/**
 * Experiment configuration (opaque).
 */
typedef struct UaoscConfig UaoscConfig;

/**
 * Assembled problem for one grid size and period (opaque).
 */
typedef struct UaoscProblem UaoscProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length plus one, or 0 when
 * there is no error. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t uaosc_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *uaosc_version(void);

/**
 * New configuration with default values.
 */
struct UaoscConfig *uaosc_config_new(void);

/**
 * Parse a `key = value` configuration text into a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum UaoscStatus uaosc_config_parse(const char *text, struct UaoscConfig **out);

/**
 * Set one configuration key.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum UaoscStatus uaosc_config_set(struct UaoscConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must be null or come from this library and not be used afterwards.
 */
void uaosc_config_free(struct UaoscConfig *cfg);

/**
 * Adsorption length `M` for potential range `delta` and well depth `phi`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum UaoscStatus uaosc_adsorption_length(double delta, double phi, double *out);

/**
 * Assemble the problem on an `n × n` grid with period `eps`.
 *
 * # Safety
 * `cfg` must come from this library and `out` be a valid pointer.
 */
enum UaoscStatus uaosc_problem_new(const struct UaoscConfig *cfg,
                                   size_t n,
                                   double eps,
                                   struct UaoscProblem **out);

/**
 * # Safety
 * `p` must be null or come from this library and not be used afterwards.
 */
void uaosc_problem_free(struct UaoscProblem *p);

/**
 * Number of unknowns (active grid points); 0 for a null handle.
 *
 * # Safety
 * `p` must be null or come from this library.
 */
size_t uaosc_problem_unknowns(const struct UaoscProblem *p);

/**
 * Copy the initial condition into `buf[0..len]`; `len` must equal the
 * number of unknowns.
 *
 * # Safety
 * `p` must come from this library and `buf` point to `len` doubles.
 */
enum UaoscStatus uaosc_problem_initial(const struct UaoscProblem *p, double *buf, size_t len);

/**
 * Integrate `state[0..len]` in place from `t = 0` to `t_fin` with step
 * `dt` (rounded so that `t_fin` is hit exactly). `method` is one of
 * `ua1`, `ua2`, `cn`, `ua2-flipped`, `twoscale1`, `twoscale2`; `solver` is
 * `direct` or `krylov`. For `twoscale*` the state must be the initial
 * condition. `steps_out` may be null.
 *
 * # Safety
 * Handles must come from this library; strings must be NUL-terminated;
 * `state` must point to `len` doubles.
 */
enum UaoscStatus uaosc_problem_integrate(const struct UaoscProblem *p,
                                         const char *method,
                                         const char *solver,
                                         double dt,
                                         double t_fin,
                                         double *state,
                                         size_t len,
                                         size_t *steps_out);

/**
 * Bilinear value of `state` at `(x, y)`.
 *
 * # Safety
 * `p` must come from this library, `state` point to `len` doubles and
 * `out` be valid.
 */
enum UaoscStatus uaosc_problem_probe(const struct UaoscProblem *p,
                                     double x,
                                     double y,
                                     const double *state,
                                     size_t len,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAOSC_H */
