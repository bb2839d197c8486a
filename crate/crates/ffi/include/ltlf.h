#ifndef LTLF_H
#define LTLF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LtlfStatus {
  LTLF_STATUS_OK = 0,
  LTLF_STATUS_NULL_POINTER = 1,
  LTLF_STATUS_SYNTAX = 2,
  LTLF_STATUS_INDEX_OUT_OF_RANGE = 3,
  LTLF_STATUS_UNSUPPORTED_NEGATION = 4,
  LTLF_STATUS_NONPOSITIVE_GAMMA = 5,
  LTLF_STATUS_DIMENSION = 6,
  LTLF_STATUS_UTF8 = 7,
  LTLF_STATUS_PANIC = 8,
  LTLF_STATUS_OTHER = 9,
} LtlfStatus;

/**
 * A parsed constraint bound to a fixed number of measured columns.
 */
typedef struct LtlfConstraint LtlfConstraint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `text` for paths with `state_width` measured columns and stores a
 * new handle in `*out`. The handle must be released with
 * [`ltlf_constraint_free`].
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LtlfStatus ltlf_constraint_parse(const char *text,
                                      size_t state_width,
                                      struct LtlfConstraint **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must come from [`ltlf_constraint_parse`] and not be freed twice.
 */
void ltlf_constraint_free(struct LtlfConstraint *h);

/**
 * Number of measured columns the handle expects per state.
 *
 * # Safety
 * `h` must be a live handle or null, giving 0.
 */
size_t ltlf_constraint_state_width(const struct LtlfConstraint *h);

/**
 * Width of the evaluated states, constant columns included.
 *
 * # Safety
 * `h` must be a live handle or null, giving 0.
 */
size_t ltlf_constraint_width(const struct LtlfConstraint *h);

/**
 * Canonical text of the constraint, to be released with
 * [`ltlf_string_free`]. Null if `h` is null.
 *
 * # Safety
 * `h` must be a live handle or null.
 */
char *ltlf_constraint_pretty(const struct LtlfConstraint *h);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void ltlf_string_free(char *s);

/**
 * Hard truth value of the constraint on an `n`-state path.
 *
 * # Safety
 * `h` must be a live handle, `data` must hold `n * state_width` doubles
 * (it may be null when `n` is 0) and `out` must be writable.
 */
enum LtlfStatus ltlf_eval(const struct LtlfConstraint *h, const double *data, size_t n, bool *out);

/**
 * Soft loss with relaxation factor `gamma`; `gamma = 0` gives the hard
 * loss.
 *
 * # Safety
 * As for [`ltlf_eval`].
 */
enum LtlfStatus ltlf_loss(const struct LtlfConstraint *h,
                          const double *data,
                          size_t n,
                          double gamma,
                          double *out);

/**
 * Loss and its gradient with respect to the measured columns. `out_grad`
 * receives `n * state_width` doubles in row-major order; `out_loss` may be
 * null.
 *
 * # Safety
 * As for [`ltlf_eval`]; `out_grad` must have room for `n * state_width`
 * doubles and may be null only when `n` is 0.
 */
enum LtlfStatus ltlf_grad(const struct LtlfConstraint *h,
                          const double *data,
                          size_t n,
                          double gamma,
                          double *out_loss,
                          double *out_grad);

/**
 * Smooth maximum of `a` and `b`; the plain maximum when `gamma <= 0`.
 */
double ltlf_max_gamma(double gamma, double a, double b);

/**
 * Smooth minimum of `a` and `b`; the plain minimum when `gamma <= 0`.
 */
double ltlf_min_gamma(double gamma, double a, double b);

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ltlf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LTLF_H */
