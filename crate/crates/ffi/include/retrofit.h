#ifndef RETROFIT_H
#define RETROFIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum RfStatus {
  RF_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  RF_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RF_STATUS_INVALID_UTF8 = 2,
  /**
   * JSON did not parse or did not match the expected shape.
   */
  RF_STATUS_INVALID_JSON = 3,
  /**
   * Input parsed but is out of range or inconsistent.
   */
  RF_STATUS_INVALID_INPUT = 4,
  /**
   * Model artifact could not be read or failed its checksum.
   */
  RF_STATUS_MODEL = 5,
  /**
   * The estimate could not be computed for this input.
   */
  RF_STATUS_DOMAIN = 6,
  /**
   * A Rust panic was caught; the library state is still usable.
   */
  RF_STATUS_PANIC = 7,
} RfStatus;

/**
 * Opaque handle to a loaded bare-home model.
 */
typedef struct RfModel RfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or NULL after a successful call.
 * The pointer stays valid until the next call into this library on the
 * same thread; do not free it.
 */
const char *rf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rf_version(void);

/**
 * Loads a model artifact from `path`, verifying its checksum.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RfStatus rf_model_load(const char *path, struct RfModel **out);

/**
 * Parses a model artifact from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RfStatus rf_model_from_json(const char *json, struct RfModel **out);

/**
 * The built-in published London model.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RfStatus rf_model_table1(struct RfModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from one of the `rf_model_*` constructors and not be
 * used afterwards.
 */
void rf_model_free(struct RfModel *model);

/**
 * Serializes the model artifact; free the result with [`rf_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum RfStatus rf_model_to_json(const struct RfModel *model, char **out);

/**
 * Regression prediction for one dwelling, kWh/month, clamped at zero.
 * `dwelling_json` uses the `dwelling` object of the estimate request.
 *
 * # Safety
 * `model` must be a live handle, `dwelling_json` NUL-terminated and
 * `out_kwh_month` a valid pointer.
 */
enum RfStatus rf_model_predict_ebar(const struct RfModel *model,
                                    const char *dwelling_json,
                                    double *out_kwh_month);

/**
 * Bare-home annual demand E0 for one dwelling, kWh/yr.
 *
 * # Safety
 * As for [`rf_model_predict_ebar`].
 */
enum RfStatus rf_model_bare_e0(const struct RfModel *model,
                               const char *dwelling_json,
                               double *out_kwh_year);

/**
 * Runs an estimate request (the same JSON the HTTP `/estimate` endpoint
 * takes) and writes the response JSON to `out_json`. `model` may be NULL
 * when the request carries its own baseline or a preset.
 *
 * # Safety
 * `model` must be NULL or a live handle, `request_json` NUL-terminated and
 * `out_json` a valid pointer. Free the result with [`rf_string_free`].
 */
enum RfStatus rf_estimate_json(const struct RfModel *model,
                               const char *request_json,
                               char **out_json);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RETROFIT_H */
