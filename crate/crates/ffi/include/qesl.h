#ifndef QESL_H
#define QESL_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Per-node columns of a run, for [`qesl_run_series`].
typedef enum QeslSeries {
  QESL_SERIES_TIME = 0,
  // `F_E` in nats (the trace distance for the trace bound).
  QESL_SERIES_VALUE = 1,
  QESL_SERIES_RATE_LHS = 2,
  QESL_SERIES_BOUND_TOTAL = 3,
  QESL_SERIES_LAMBDA_CUM = 4,
  QESL_SERIES_T_ESL_CUM = 5,
} QeslSeries;

// Result of every fallible call. The config, numeric and I/O codes match
// the exit codes of the `qesl` binary.
typedef enum QeslStatus {
  QESL_STATUS_OK = 0,
  // A required pointer argument was null.
  QESL_STATUS_NULL_POINTER = 1,
  // Invalid config, parameters or input matrix.
  QESL_STATUS_CONFIG = 2,
  // The numerics refused the input or failed.
  QESL_STATUS_NUMERIC = 3,
  QESL_STATUS_IO = 4,
  // A string argument was not valid UTF-8.
  QESL_STATUS_UTF8 = 5,
  // A caller-provided buffer is too small.
  QESL_STATUS_BUFFER_TOO_SMALL = 6,
  // A Rust panic was caught at the boundary.
  QESL_STATUS_PANIC = 7,
} QeslStatus;

// Parsed and validated run configuration.
typedef struct QeslConfig QeslConfig;

// Finished run with its CSV text and JSON summary.
typedef struct QeslRun QeslRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed status-returning call on this thread, or null
// if the most recent such call succeeded. The pointer stays valid until the
// next status-returning call on this thread.
const char *qesl_last_error(void);

// Library version as a static NUL-terminated string.
const char *qesl_version(void);

// Parses a JSON run configuration. On success `*out` holds a handle to be
// released with [`qesl_config_free`].
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum QeslStatus qesl_config_parse(const char *json, struct QeslConfig **out);

// Canonical JSON form of a config, with every default filled in. The
// string is owned by the caller and released with [`qesl_string_free`].
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum QeslStatus qesl_config_to_json(const struct QeslConfig *config, char **out);

// Releases a config handle. Null is ignored.
//
// # Safety
// `config` must be null or a handle from [`qesl_config_parse`] that was not
// freed before.
void qesl_config_free(struct QeslConfig *config);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string handed out as owned by this library.
void qesl_string_free(char *s);

// Runs a config. Output files named in the config are written as the
// binary would write them. On success `*out` holds a handle to be released
// with [`qesl_run_free`].
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum QeslStatus qesl_run(const struct QeslConfig *config, struct QeslRun **out);

// Releases a run handle. Null is ignored.
//
// # Safety
// `run` must be null or a handle from [`qesl_run`] that was not freed before.
void qesl_run_free(struct QeslRun *run);

// CSV text of a run, borrowed from the handle. Null if `run` is null.
//
// # Safety
// `run` must be null or a live handle.
const char *qesl_run_csv(const struct QeslRun *run);

// JSON summary of a run (the binary's stdout), borrowed from the handle.
// Null if `run` is null.
//
// # Safety
// `run` must be null or a live handle.
const char *qesl_run_summary_json(const struct QeslRun *run);

// Number of grid nodes in a run, or 0 if `run` is null.
//
// # Safety
// `run` must be null or a live handle.
size_t qesl_run_len(const struct QeslRun *run);

// Whole-interval speed-limit time of a run. Infinite for a vacuous bound.
//
// # Safety
// `run` must be a live handle and `out` a writable pointer.
enum QeslStatus qesl_run_t_esl(const struct QeslRun *run, double *out);

// Copies one per-node column of a run into `out[0..len)`. `len` must be at
// least [`qesl_run_len`].
//
// # Safety
// `run` must be a live handle and `out` must point to `len` writable doubles.
enum QeslStatus qesl_run_series(const struct QeslRun *run,
                                enum QeslSeries series,
                                double *out,
                                size_t len);

// Relative entropy of entanglement of a `d_a·d_b`-dimensional state, in
// nats. The state is given row-major as real parts `re` and imaginary parts
// `im` (`im` may be null for a real matrix), each of `(d_a d_b)²` values.
// The search uses `restarts` restarts seeded from `seed` exactly as
// `qesl ree` does. When `css_re` / `css_im` are non-null they receive the
// closest separable state in the same layout.
//
// # Safety
// The input arrays must hold `(d_a d_b)²` readable doubles, the non-null
// output arrays as many writable doubles, and `value` must be writable.
enum QeslStatus qesl_ree(const double *re,
                         const double *im,
                         size_t d_a,
                         size_t d_b,
                         size_t restarts,
                         uint64_t seed,
                         double *value,
                         double *css_re,
                         double *css_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QESL_H */
