#ifndef EXPOSE_H
#define EXPOSE_H

/* Generated by cbindgen from expose-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a C API call.
 */
typedef enum ExposeStatus {
  EXPOSE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EXPOSE_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument failed validation (bad sigma, gamma, counts, ...).
   */
  EXPOSE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Vector length does not match the model.
   */
  EXPOSE_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * Update rule does not match the model's mode.
   */
  EXPOSE_STATUS_WRONG_MODE = 4,
  /**
   * The model has no observations yet.
   */
  EXPOSE_STATUS_UNFITTED = 5,
  /**
   * Normalized score requested but the weight vector is zero.
   */
  EXPOSE_STATUS_ZERO_NORM_WEIGHTS = 6,
  /**
   * File could not be read or written.
   */
  EXPOSE_STATUS_IO = 7,
  /**
   * File contents could not be parsed as a model.
   */
  EXPOSE_STATUS_PARSE = 8,
  /**
   * A path or string argument was not valid UTF-8.
   */
  EXPOSE_STATUS_UTF8 = 9,
  /**
   * Unexpected internal failure.
   */
  EXPOSE_STATUS_INTERNAL = 10,
} ExposeStatus;

/**
 * Opaque model handle.
 */
typedef struct ExposeModelHandle ExposeModelHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fits a batch model over `n_rows` row-major `dim`-dimensional vectors
 * using a random-projection feature map with `expansions` frequencies.
 *
 * # Safety
 * `data` must point to `n_rows * dim` doubles; `out` must be a valid
 * pointer to receive the handle.
 */
enum ExposeStatus expose_fit_batch_rks(const double *data,
                                       size_t n_rows,
                                       size_t dim,
                                       size_t expansions,
                                       double sigma,
                                       uint64_t seed,
                                       struct ExposeModelHandle **out);

/**
 * Creates an empty streaming model with the exact running-mean update.
 *
 * # Safety
 * `out` must be a valid pointer to receive the handle.
 */
enum ExposeStatus expose_streaming_online_rks(size_t dim,
                                              size_t expansions,
                                              double sigma,
                                              uint64_t seed,
                                              struct ExposeModelHandle **out);

/**
 * Creates an empty streaming model averaging the last `window_len`
 * observations.
 *
 * # Safety
 * `out` must be a valid pointer to receive the handle.
 */
enum ExposeStatus expose_streaming_window_rks(size_t dim,
                                              size_t expansions,
                                              double sigma,
                                              uint64_t seed,
                                              size_t window_len,
                                              struct ExposeModelHandle **out);

/**
 * Creates an empty streaming model with geometric forgetting at rate
 * `gamma` in `[0, 1)`.
 *
 * # Safety
 * `out` must be a valid pointer to receive the handle.
 */
enum ExposeStatus expose_streaming_decay_rks(size_t dim,
                                             size_t expansions,
                                             double sigma,
                                             uint64_t seed,
                                             double gamma,
                                             struct ExposeModelHandle **out);

/**
 * Feeds one observation to a streaming model.
 *
 * # Safety
 * `model` must be a live handle; `x` must point to `dim` doubles.
 */
enum ExposeStatus expose_model_update(struct ExposeModelHandle *model, const double *x, size_t dim);

/**
 * Scores a query. `raw` always receives the inner product; `normalized`
 * receives the normalized score when `normalize` is set (and NaN
 * otherwise).
 *
 * # Safety
 * `model` must be a live handle; `x` must point to `dim` doubles; `raw`
 * and `normalized` must each be valid or null.
 */
enum ExposeStatus expose_model_score(const struct ExposeModelHandle *model,
                                     const double *x,
                                     size_t dim,
                                     bool normalize,
                                     double *raw,
                                     double *normalized);

/**
 * Number of observations the model has absorbed.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid.
 */
enum ExposeStatus expose_model_count(const struct ExposeModelHandle *model, uint64_t *out);

/**
 * Expected input dimension of queries and updates.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid.
 */
enum ExposeStatus expose_model_input_dim(const struct ExposeModelHandle *model, size_t *out);

/**
 * Length of the model's weight vector.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid.
 */
enum ExposeStatus expose_model_feature_dim(const struct ExposeModelHandle *model, size_t *out);

/**
 * Writes the model to `path` as the versioned JSON document.
 *
 * # Safety
 * `model` must be a live handle; `path` must be a NUL-terminated string.
 */
enum ExposeStatus expose_model_save(const struct ExposeModelHandle *model, const char *path);

/**
 * Loads a model document written by [`expose_model_save`] (or the CLI).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
enum ExposeStatus expose_model_load(const char *path, struct ExposeModelHandle **out);

/**
 * Releases a handle. Passing null is a no-op.
 *
 * # Safety
 * `model` must have come from this library and not been freed before.
 */
void expose_model_free(struct ExposeModelHandle *model);

/**
 * Copies the current thread's last error message (NUL-terminated,
 * truncated to `capacity`) into `buffer` and returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buffer` must point to `capacity` writable bytes, or be null to query
 * the length only.
 */
size_t expose_last_error(char *buffer, size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPOSE_H */
