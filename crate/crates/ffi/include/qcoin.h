#ifndef QCOIN_H
#define QCOIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcoinStatus {
  QcoinStatus_Ok = 0,
  QcoinStatus_NullPointer = 1,
  QcoinStatus_InvalidParameter = 2,
  QcoinStatus_Inapplicable = 3,
  QcoinStatus_Resource = 4,
  QcoinStatus_Numerical = 5,
  QcoinStatus_Io = 6,
  QcoinStatus_InvalidUtf8 = 7,
  QcoinStatus_Panic = 8,
} QcoinStatus;

typedef enum QcoinVariant {
  QcoinVariant_WithReturn = 0,
  QcoinVariant_NoReturn = 1,
} QcoinVariant;

/**
 * Opaque Monte Carlo estimate.
 */
typedef struct QcoinEstimate QcoinEstimate;

/**
 * Opaque protocol parameters.
 */
typedef struct QcoinParams QcoinParams;

/**
 * Closed-form figures of the conclusive attack.
 */
typedef struct QcoinAnalytics {
  uintptr_t round;
  double pc;
  double ps;
  double p0;
  double xi;
} QcoinAnalytics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *qcoin_last_error_message(void);

/**
 * Default parameters for `m` procedures at angle `theta` (with-return).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum QcoinStatus qcoin_params_derive(uintptr_t m, double theta, struct QcoinParams **out);

/**
 * Explicit parameters.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum QcoinStatus qcoin_params_new(uintptr_t m,
                                  uintptr_t n,
                                  double theta,
                                  enum QcoinVariant variant,
                                  struct QcoinParams **out);

/**
 * Particles per side per procedure, or 0 for a NULL handle.
 *
 * # Safety
 * `params` must be NULL or a handle from this library that was not freed.
 */
uintptr_t qcoin_params_n(const struct QcoinParams *params);

/**
 * Releases a parameter handle. NULL is ignored.
 *
 * # Safety
 * `params` must be NULL or a handle from this library that was not freed.
 */
void qcoin_params_free(struct QcoinParams *params);

/**
 * Monte Carlo estimate for two strategies given by name, e.g. `"honest"`
 * or `"conclusive:target=0"`.
 *
 * # Safety
 * `params` must be a live handle, `alice` and `bob` NUL-terminated strings,
 * `out` a valid pointer to writable storage for a handle.
 */
enum QcoinStatus qcoin_monte_carlo(const struct QcoinParams *params,
                                   const char *alice,
                                   const char *bob,
                                   uint64_t trials,
                                   uint64_t seed,
                                   uintptr_t workers,
                                   struct QcoinEstimate **out);

/**
 * Frequencies `p0`, `p1`, abort and standard errors of an estimate.
 *
 * # Safety
 * `estimate` must be a live handle; each output pointer must be valid.
 */
enum QcoinStatus qcoin_estimate_values(const struct QcoinEstimate *estimate,
                                       double *p0,
                                       double *p1,
                                       double *abort,
                                       double *stderr0,
                                       double *stderr1);

/**
 * Number of sessions behind an estimate, or 0 for NULL.
 *
 * # Safety
 * `estimate` must be NULL or a live handle.
 */
uint64_t qcoin_estimate_trials(const struct QcoinEstimate *estimate);

/**
 * The estimate as a JSON string; release it with [`qcoin_string_free`].
 * Returns NULL for a NULL handle.
 *
 * # Safety
 * `estimate` must be NULL or a live handle.
 */
char *qcoin_estimate_to_json(const struct QcoinEstimate *estimate);

/**
 * Releases an estimate handle. NULL is ignored.
 *
 * # Safety
 * `estimate` must be NULL or a handle from this library that was not freed.
 */
void qcoin_estimate_free(struct QcoinEstimate *estimate);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library that was not freed.
 */
void qcoin_string_free(char *s);

/**
 * Smallest round `i` with `cosⁱθ ≤ (m − 1)/m²`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QcoinStatus qcoin_critical_round(uintptr_t m, double theta, uintptr_t *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum QcoinStatus qcoin_attack_analytics(uintptr_t m, double theta, struct QcoinAnalytics *out);

/**
 * Maximum of `(1/2)c^m(1 − c²)` over `c ∈ [0, 1]` and its argument.
 *
 * # Safety
 * `value` and `argmax` must be valid pointers.
 */
enum QcoinStatus qcoin_bias_upper_bound(uintptr_t m, double *value, double *argmax);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCOIN_H */
