#ifndef SELINF_H
#define SELINF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>

/**
 * Result of every call.
 */
typedef enum SelinfStatus {
  SELINF_STATUS_OK = 0,
  SELINF_STATUS_NULL_POINTER = 1,
  SELINF_STATUS_INVALID_UTF8 = 2,
  SELINF_STATUS_PARSE_ERROR = 3,
  SELINF_STATUS_INVALID_SYSTEM = 4,
  SELINF_STATUS_METRIC_ERROR = 5,
  SELINF_STATUS_INVALID_ARGUMENT = 6,
  SELINF_STATUS_TOO_LARGE = 7,
  SELINF_STATUS_NUMERICAL_INSTABILITY = 8,
  SELINF_STATUS_PANIC = 9,
} SelinfStatus;

/**
 * Arithmetic used when reading probabilities.
 */
typedef enum SelinfArithmetic {
  SELINF_ARITHMETIC_AUTO = 0,
  SELINF_ARITHMETIC_RATIONAL = 1,
  SELINF_ARITHMETIC_FLOAT = 2,
} SelinfArithmetic;

/**
 * A validated system.
 */
typedef struct SelinfSystem SelinfSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a system from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` holds a handle to release with [`selinf_system_free`].
 */
enum SelinfStatus selinf_system_from_json(const char *json,
                                          enum SelinfArithmetic arithmetic,
                                          struct SelinfSystem **out);

/**
 * Releases a system handle. Null is ignored.
 *
 * # Safety
 * `system` must come from [`selinf_system_from_json`] and not be used
 * afterwards.
 */
void selinf_system_free(struct SelinfSystem *system);

/**
 * Whether the system's probabilities are exact rationals.
 *
 * # Safety
 * `system` must be a live handle or null (reported as not exact).
 */
bool selinf_system_is_exact(const struct SelinfSystem *system);

/**
 * Runs marginal selectivity and the chain-inequality suite. `metrics_json`
 * is one metric or a list; null selects the default order-distances.
 * `max_len` of 0 selects the default. `*passed` is set when no
 * violation was found and marginal selectivity holds.
 *
 * # Safety
 * `system` must be a live handle, `metrics_json` null or a NUL-terminated
 * string, `out_json` valid; `passed` may be null.
 */
enum SelinfStatus selinf_check(const struct SelinfSystem *system,
                               const char *metrics_json,
                               uint32_t max_len,
                               bool *passed,
                               char **out_json);

/**
 * Decides the joint distribution criterion. `*feasible` receives the
 * verdict; the JSON report holds the witness or certificate.
 *
 * # Safety
 * `system` must be a live handle and `out_json` valid; `feasible` may be
 * null.
 */
enum SelinfStatus selinf_jdc(const struct SelinfSystem *system, bool *feasible, char **out_json);

/**
 * `Pr[A < 0, B >= 0]` for standard bivariate normal outputs with
 * correlation `rho`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SelinfStatus selinf_binormal_order_distance(double rho, double *out);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *selinf_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void selinf_string_free(char *s);

/**
 * Library version, statically allocated.
 */
const char *selinf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELINF_H */
