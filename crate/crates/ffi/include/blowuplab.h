#ifndef BLOWUPLAB_H
#define BLOWUPLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlCheck {
  BL_CHECK_SIGN_CRITERION = 0,
  BL_CHECK_QUARTER_THRESHOLD = 1,
  BL_CHECK_ROTATION_BLOWUP = 2,
  BL_CHECK_MONOTONE_PRESSURE = 3,
} BlCheck;

typedef enum BlRunStatus {
  BL_RUN_STATUS_COMPLETED = 0,
  BL_RUN_STATUS_BLOWUP_DETECTED = 1,
  BL_RUN_STATUS_STEP_FAILURE = 2,
} BlRunStatus;

/**
 * Per-step series of a solution.
 */
typedef enum BlSeries {
  BL_SERIES_TIME = 0,
  BL_SERIES_F = 1,
  BL_SERIES_FP = 2,
  BL_SERIES_G = 3,
  BL_SERIES_GP = 4,
  BL_SERIES_WINDING = 5,
  BL_SERIES_VORTICITY = 6,
  BL_SERIES_CONSTRAINT_RESIDUAL = 7,
} BlSeries;

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_UTF8 = 2,
  BL_STATUS_PARSE = 3,
  BL_STATUS_INVALID_SCENARIO = 4,
  BL_STATUS_WRONG_MODEL = 5,
  BL_STATUS_HYPOTHESIS_NOT_MET = 6,
  BL_STATUS_NUMERICAL = 7,
  BL_STATUS_INVALID_ARGUMENT = 8,
  BL_STATUS_BUFFER_TOO_SMALL = 9,
  BL_STATUS_IO = 10,
  BL_STATUS_PANIC = 11,
} BlStatus;

/**
 * Opaque scenario handle.
 */
typedef struct BlScenario BlScenario;

/**
 * Opaque solution handle.
 */
typedef struct BlSolution BlSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *bl_last_error(void);

/**
 * Library version as a static string.
 */
const char *bl_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void bl_string_free(char *s);

/**
 * Parses and validates a scenario.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum BlStatus bl_scenario_from_json(const char *json, struct BlScenario **out);

/**
 * # Safety
 * `s` comes from [`bl_scenario_from_json`] and is freed once. Null is ignored.
 */
void bl_scenario_free(struct BlScenario *s);

/**
 * Canonical JSON of a scenario; release with [`bl_string_free`].
 *
 * # Safety
 * `s` is a live scenario handle; `out` is writable.
 */
enum BlStatus bl_scenario_to_json(const struct BlScenario *s, char **out);

/**
 * Integrates the model matching the scenario's location and parity.
 *
 * # Safety
 * `s` is a live scenario handle; `out` is writable.
 */
enum BlStatus bl_run(const struct BlScenario *s, struct BlSolution **out);

/**
 * # Safety
 * `s` comes from [`bl_run`] and is freed once. Null is ignored.
 */
void bl_solution_free(struct BlSolution *s);

/**
 * Number of accepted steps, 0 for null.
 *
 * # Safety
 * `s` is null or a live solution handle.
 */
size_t bl_solution_len(const struct BlSolution *s);

/**
 * # Safety
 * `s` is a live solution handle; `out` is writable.
 */
enum BlStatus bl_solution_status(const struct BlSolution *s, enum BlRunStatus *out);

/**
 * Copies one series into `buf`. `written` receives the series length; when
 * `cap` is smaller nothing is copied and `BUFFER_TOO_SMALL` is returned, so a
 * call with `cap = 0` queries the size.
 *
 * # Safety
 * `s` is a live solution handle, `buf` holds `cap` doubles (may be null when
 * `cap` is 0), `written` is writable.
 */
enum BlStatus bl_solution_copy_series(const struct BlSolution *s,
                                      enum BlSeries which,
                                      double *buf,
                                      size_t cap,
                                      size_t *written);

/**
 * `f`, `f'`, `g`, `g'` at time `t` from the continuous extension.
 *
 * # Safety
 * `s` is a live solution handle; `out` holds 4 doubles.
 */
enum BlStatus bl_solution_state_at(const struct BlSolution *s, double t, double *out);

/**
 * Writes the collapse time into `out` and sets `found` to 1, or sets `found`
 * to 0 when the run did not collapse.
 *
 * # Safety
 * `s` is a live solution handle; `out` and `found` are writable.
 */
enum BlStatus bl_solution_collapse_time(const struct BlSolution *s, double *out, int32_t *found);

/**
 * Runs a blowup criterion with default options and returns its report as
 * JSON; release with [`bl_string_free`].
 *
 * # Safety
 * `s` is a live scenario handle; `out` is writable.
 */
enum BlStatus bl_check(const struct BlScenario *s, enum BlCheck which, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BLOWUPLAB_H */
