#ifndef OMNIGAME_H
#define OMNIGAME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmniStatus {
  OMNI_STATUS_OK = 0,
  OMNI_STATUS_NULL_POINTER = 1,
  OMNI_STATUS_INVALID_UTF8 = 2,
  OMNI_STATUS_PARSE = 3,
  OMNI_STATUS_INVALID_MODEL = 4,
  OMNI_STATUS_INVALID_ARGUMENT = 5,
  OMNI_STATUS_CORE_EMPTY = 6,
  OMNI_STATUS_BUFFER_TOO_SMALL = 7,
  OMNI_STATUS_OVERFLOW = 8,
  OMNI_STATUS_PANIC = 9,
} OmniStatus;

/**
 * Opaque model handle.
 */
typedef struct OmniModel OmniModel;

/**
 * `numerator / denominator` in lowest terms, denominator > 0.
 */
typedef struct OmniRational {
  int64_t numerator;
  int64_t denominator;
} OmniRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON model (packets or entropy table) into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OmniStatus omni_model_from_json(const char *json, struct OmniModel **out);

/**
 * # Safety
 * `model` must come from `omni_model_from_json` and not be freed twice.
 */
void omni_model_free(struct OmniModel *model);

/**
 * Number of users, or 0 for a NULL handle.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t omni_model_num_users(const struct OmniModel *model);

/**
 * Minimum sum-rate; `integer` selects the integer-rate model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum OmniStatus omni_min_sum_rate(const struct OmniModel *model,
                                  bool integer,
                                  struct OmniRational *out);

/**
 * # Safety
 * `model` must be a live handle, `alpha` a NUL-terminated string, `out` valid.
 */
enum OmniStatus omni_core_nonempty(const struct OmniModel *model, const char *alpha, bool *out);

/**
 * Core membership of `rates[0..len]`; `integer` also requires integral rates.
 *
 * # Safety
 * `rates` must point to `len` readable entries; other pointers as above.
 */
enum OmniStatus omni_in_core(const struct OmniModel *model,
                             const char *alpha,
                             const struct OmniRational *rates,
                             size_t len,
                             bool integer,
                             bool *out);

/**
 * Shapley value of the convex game at α, written to `out[0..num_users]`.
 *
 * # Safety
 * `out` must point to `len` writable entries.
 */
enum OmniStatus omni_shapley(const struct OmniModel *model,
                             const char *alpha,
                             struct OmniRational *out,
                             size_t len);

/**
 * Greedy core vertex for the zero-based join order `order[0..num_users]`.
 *
 * # Safety
 * `order` must point to `num_users` readable entries and `out` to `len`
 * writable entries.
 */
enum OmniStatus omni_greedy_vertex(const struct OmniModel *model,
                                   const char *alpha,
                                   const size_t *order,
                                   struct OmniRational *out,
                                   size_t len);

/**
 * Copy of the last error message on this thread, or NULL if the last call
 * succeeded. Free it with `omni_string_free`.
 */
char *omni_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void omni_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* OMNIGAME_H */
