#ifndef RMINMAX_H
#define RMINMAX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmmStatus {
  RMM_STATUS_OK = 0,
  /**
   * At least one check failed.
   */
  RMM_STATUS_CHECK_FAILED = 1,
  /**
   * Invalid configuration, input file or argument.
   */
  RMM_STATUS_CONFIG_ERROR = 2,
  /**
   * A run diverged or produced non-finite values.
   */
  RMM_STATUS_NUMERIC_ERROR = 3,
  RMM_STATUS_NULL_POINTER = 4,
  /**
   * The requested value was not recorded.
   */
  RMM_STATUS_NOT_AVAILABLE = 5,
  /**
   * The caller's buffer is too small; the required length is reported.
   */
  RMM_STATUS_BUFFER_TOO_SMALL = 6,
  RMM_STATUS_PANIC = 7,
} RmmStatus;

/**
 * A parsed experiment configuration with its problem instance.
 */
typedef struct RmmExperiment RmmExperiment;

/**
 * The outcome of one run.
 */
typedef struct RmmRun RmmRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmm_version(void);

/**
 * Message of the last failure on the calling thread; empty when none.
 * Valid until the next failing call on the same thread.
 */
const char *rmm_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed; null is a no-op.
 */
void rmm_string_free(char *s);

/**
 * Parses an experiment from JSON text. Relative dataset paths resolve
 * against the working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RmmStatus rmm_experiment_from_json(const char *json, struct RmmExperiment **out);

/**
 * Loads an experiment from a JSON file. Relative dataset paths resolve
 * against the file's directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RmmStatus rmm_experiment_from_file(const char *path, struct RmmExperiment **out);

/**
 * # Safety
 * `exp` must come from `rmm_experiment_from_*` and not have been freed;
 * null is a no-op.
 */
void rmm_experiment_free(struct RmmExperiment *exp);

/**
 * Number of samples in the problem's finite sum.
 *
 * # Safety
 * `exp` must be a live handle and `out` writable.
 */
enum RmmStatus rmm_experiment_num_samples(const struct RmmExperiment *exp, size_t *out);

/**
 * Shape of the manifold variable `x`.
 *
 * # Safety
 * `exp` must be a live handle; `rows` and `cols` writable.
 */
enum RmmStatus rmm_experiment_x_shape(const struct RmmExperiment *exp, size_t *rows, size_t *cols);

/**
 * Runs the configured solver. `seed` overrides the configured seed unless
 * it is `UINT64_MAX`.
 *
 * # Safety
 * `exp` must be a live handle and `out` writable.
 */
enum RmmStatus rmm_experiment_run(const struct RmmExperiment *exp,
                                  uint64_t seed,
                                  struct RmmRun **out);

/**
 * # Safety
 * `run` must come from [`rmm_experiment_run`] and not have been freed;
 * null is a no-op.
 */
void rmm_run_free(struct RmmRun *run);

/**
 * Number of recorded iterations; 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t rmm_run_iterations(const struct RmmRun *run);

/**
 * Output index `zeta` in `1..=T`; 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t rmm_run_zeta(const struct RmmRun *run);

/**
 * Samples drawn by the iterations; 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
uint64_t rmm_run_samples(const struct RmmRun *run);

/**
 * Mean recorded `|grad Phi(x_t)|`; `NotAvailable` when stationarity was
 * not recorded.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum RmmStatus rmm_run_averaged_stationarity(const struct RmmRun *run, double *out);

/**
 * `|grad Phi(x_zeta)|` at the output iterate.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum RmmStatus rmm_run_output_stationarity(const struct RmmRun *run, double *out);

/**
 * Copies one trace column into `buf`. Columns: `eta`, `f`, `v_norm`,
 * `w_norm`, `grad_phi`, `y_gap`, `lyapunov`, `v_error`, `w_error`,
 * `samples`. Unrecorded entries are NaN. `len_out` receives the number of
 * rows; when `buf_len` is smaller nothing is copied and `BufferTooSmall`
 * is returned.
 *
 * # Safety
 * `run` must be a live handle, `name` a NUL-terminated string, `buf`
 * writable for `buf_len` doubles (may be null when `buf_len` is 0) and
 * `len_out` writable.
 */
enum RmmStatus rmm_run_trace_column(const struct RmmRun *run,
                                    const char *name,
                                    double *buf,
                                    size_t buf_len,
                                    size_t *len_out);

/**
 * Copies the output iterate `x_zeta` (column-major) into `buf`;
 * `len_out` receives `rows * cols`.
 *
 * # Safety
 * As for [`rmm_run_trace_column`].
 */
enum RmmStatus rmm_run_output_point(const struct RmmRun *run,
                                    double *buf,
                                    size_t buf_len,
                                    size_t *len_out);

/**
 * Writes the trace CSV to `path`.
 *
 * # Safety
 * `run` must be a live handle and `path` a NUL-terminated string.
 */
enum RmmStatus rmm_run_write_trace(const struct RmmRun *run, const char *path);

/**
 * Run summary as JSON; free with [`rmm_string_free`]. Null on a null
 * handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
char *rmm_run_summary_json(const struct RmmRun *run);

/**
 * Runs the check suite (groups whose name contains `filter`, all when
 * null). Returns `Ok` when every check passes and `CheckFailed` otherwise.
 * When `report_out` is non-null it receives the reports as a JSON array,
 * to be freed with [`rmm_string_free`].
 *
 * # Safety
 * `filter` must be null or a NUL-terminated string; `report_out` null or
 * writable.
 */
enum RmmStatus rmm_check(const char *filter, uint64_t seed, char **report_out);

/**
 * Like [`rmm_check`] but also writes the JSON report to `report_path`.
 *
 * # Safety
 * `filter` must be null or a NUL-terminated string; `report_path` a
 * NUL-terminated string.
 */
enum RmmStatus rmm_check_to_file(const char *filter, uint64_t seed, const char *report_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMINMAX_H */
