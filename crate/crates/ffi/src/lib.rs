//! C ABI over `qesl-core`.
//!
//! Configs and runs cross the boundary as opaque handles that the caller
//! frees with the matching `*_free` function. Every fallible call returns a
//! [`QeslStatus`]; on failure the message is kept per thread and read back
//! with [`qesl_last_error`]. Panics are caught at the boundary and reported
//! as [`QeslStatus::Panic`].
#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qesl_core::cli::{self, RunConfig, RunOutcome, REE_STREAM};
use qesl_core::linalg::{CMatrix, C64};
use qesl_core::measures::{derive_seed, ree, SolverConfig};
use qesl_core::states::{BipartiteSplit, DensityMatrix};
use qesl_core::Error;

/// Result of every fallible call. The config, numeric and I/O codes match
/// the exit codes of the `qesl` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QeslStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid config, parameters or input matrix.
    Config = 2,
    /// The numerics refused the input or failed.
    Numeric = 3,
    Io = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Per-node columns of a run, for [`qesl_run_series`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QeslSeries {
    Time = 0,
    /// `F_E` in nats (the trace distance for the trace bound).
    Value = 1,
    RateLhs = 2,
    BoundTotal = 3,
    LambdaCum = 4,
    TEslCum = 5,
}

/// Parsed and validated run configuration.
pub struct QeslConfig {
    inner: RunConfig,
}

/// Finished run with its CSV text and JSON summary.
pub struct QeslRun {
    outcome: RunOutcome,
    csv: CString,
    summary: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs were replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> QeslStatus {
    match cli::exit_code(err) {
        2 => QeslStatus::Config,
        4 => QeslStatus::Io,
        _ => QeslStatus::Numeric,
    }
}

/// Runs `body` with panics caught and the last error recorded on failure.
fn guard(body: impl FnOnce() -> Result<(), (QeslStatus, String)>) -> QeslStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QeslStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {message}"));
            QeslStatus::Panic
        }
    }
}

fn core_error(err: Error) -> (QeslStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (QeslStatus, String) {
    (QeslStatus::NullPointer, format!("`{name}` is null"))
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (QeslStatus, String)> {
    if s.is_null() {
        return Err(null(name));
    }
    // SAFETY: non-null and NUL-terminated by the caller's contract.
    let bytes = unsafe { CStr::from_ptr(s) };
    bytes
        .to_str()
        .map_err(|e| (QeslStatus::Utf8, format!("`{name}` is not UTF-8: {e}")))
}

/// Message of the last failed status-returning call on this thread, or null
/// if the most recent such call succeeded. The pointer stays valid until the
/// next status-returning call on this thread.
#[no_mangle]
pub extern "C" fn qesl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qesl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON run configuration. On success `*out` holds a handle to be
/// released with [`qesl_config_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qesl_config_parse(json: *const c_char, out: *mut *mut QeslConfig) -> QeslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: forwarded caller contract.
        let text = unsafe { read_str(json, "json") }?;
        let inner = cli::parse_config(text).map_err(core_error)?;
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = Box::into_raw(Box::new(QeslConfig { inner })) };
        Ok(())
    })
}

/// Canonical JSON form of a config, with every default filled in. The
/// string is owned by the caller and released with [`qesl_string_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qesl_config_to_json(config: *const QeslConfig, out: *mut *mut c_char) -> QeslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: null or a live handle by contract.
        let config = unsafe { config.as_ref() }.ok_or_else(|| null("config"))?;
        let json = CString::new(config.inner.to_json()).expect("JSON has no NUL bytes");
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = json.into_raw() };
        Ok(())
    })
}

/// Releases a config handle. Null is ignored.
///
/// # Safety
/// `config` must be null or a handle from [`qesl_config_parse`] that was not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn qesl_config_free(config: *mut QeslConfig) {
    if !config.is_null() {
        // SAFETY: allocated by `Box::into_raw` in `qesl_config_parse`.
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string handed out as owned by this library.
#[no_mangle]
pub unsafe extern "C" fn qesl_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Runs a config. Output files named in the config are written as the
/// binary would write them. On success `*out` holds a handle to be released
/// with [`qesl_run_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qesl_run(config: *const QeslConfig, out: *mut *mut QeslRun) -> QeslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: null or a live handle by contract.
        let config = unsafe { config.as_ref() }.ok_or_else(|| null("config"))?;
        let outcome = cli::run(&config.inner).map_err(core_error)?;
        let summary = serde_json::to_string(&outcome.summary()).map_err(|e| (QeslStatus::Numeric, e.to_string()))?;
        let run = QeslRun {
            csv: CString::new(outcome.csv.clone()).expect("CSV has no NUL bytes"),
            summary: CString::new(summary).expect("JSON has no NUL bytes"),
            outcome,
        };
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = Box::into_raw(Box::new(run)) };
        Ok(())
    })
}

/// Releases a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle from [`qesl_run`] that was not freed before.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_free(run: *mut QeslRun) {
    if !run.is_null() {
        // SAFETY: allocated by `Box::into_raw` in `qesl_run`.
        drop(unsafe { Box::from_raw(run) });
    }
}

/// CSV text of a run, borrowed from the handle. Null if `run` is null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_csv(run: *const QeslRun) -> *const c_char {
    // SAFETY: null or a live handle by contract.
    unsafe { run.as_ref() }.map_or(ptr::null(), |r| r.csv.as_ptr())
}

/// JSON summary of a run (the binary's stdout), borrowed from the handle.
/// Null if `run` is null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_summary_json(run: *const QeslRun) -> *const c_char {
    // SAFETY: null or a live handle by contract.
    unsafe { run.as_ref() }.map_or(ptr::null(), |r| r.summary.as_ptr())
}

/// Number of grid nodes in a run, or 0 if `run` is null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_len(run: *const QeslRun) -> usize {
    // SAFETY: null or a live handle by contract.
    unsafe { run.as_ref() }.map_or(0, |r| r.outcome.report.samples.len())
}

/// Whole-interval speed-limit time of a run. Infinite for a vacuous bound.
///
/// # Safety
/// `run` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_t_esl(run: *const QeslRun, out: *mut f64) -> QeslStatus {
    guard(|| {
        // SAFETY: null or a live handle by contract.
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = run.outcome.report.t_esl() };
        Ok(())
    })
}

/// Copies one per-node column of a run into `out[0..len)`. `len` must be at
/// least [`qesl_run_len`].
///
/// # Safety
/// `run` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qesl_run_series(
    run: *const QeslRun,
    series: QeslSeries,
    out: *mut f64,
    len: usize,
) -> QeslStatus {
    guard(|| {
        // SAFETY: null or a live handle by contract.
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = &run.outcome.report;
        let n = report.samples.len();
        if len < n {
            return Err((
                QeslStatus::BufferTooSmall,
                format!("buffer holds {len} values, run has {n} nodes"),
            ));
        }
        // SAFETY: `out` points to at least `len >= n` writable doubles.
        let dst = unsafe { std::slice::from_raw_parts_mut(out, n) };
        let limit = &report.limit;
        for (k, (slot, s)) in dst.iter_mut().zip(&report.samples).enumerate() {
            *slot = match series {
                QeslSeries::Time => s.t,
                QeslSeries::Value => report.values[k],
                QeslSeries::RateLhs => s.lhs_rate,
                QeslSeries::BoundTotal => s.terms.total,
                QeslSeries::LambdaCum => limit.lambda_cum[k],
                QeslSeries::TEslCum => limit.t_esl_cum[k],
            };
        }
        Ok(())
    })
}

/// Relative entropy of entanglement of a `d_a·d_b`-dimensional state, in
/// nats. The state is given row-major as real parts `re` and imaginary parts
/// `im` (`im` may be null for a real matrix), each of `(d_a d_b)²` values.
/// The search uses `restarts` restarts seeded from `seed` exactly as
/// `qesl ree` does. When `css_re` / `css_im` are non-null they receive the
/// closest separable state in the same layout.
///
/// # Safety
/// The input arrays must hold `(d_a d_b)²` readable doubles, the non-null
/// output arrays as many writable doubles, and `value` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qesl_ree(
    re: *const f64,
    im: *const f64,
    d_a: usize,
    d_b: usize,
    restarts: usize,
    seed: u64,
    value: *mut f64,
    css_re: *mut f64,
    css_im: *mut f64,
) -> QeslStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if value.is_null() {
            return Err(null("value"));
        }
        if restarts == 0 {
            return Err((QeslStatus::Config, "`restarts` must be at least 1".to_string()));
        }
        let split = BipartiteSplit::new(d_a, d_b).map_err(|e| (QeslStatus::Config, e.to_string()))?;
        let n = split.dim();
        // SAFETY: the caller provides n² readable doubles in each non-null array.
        let re = unsafe { std::slice::from_raw_parts(re, n * n) };
        // SAFETY: as above for a non-null `im`.
        let im = (!im.is_null()).then(|| unsafe { std::slice::from_raw_parts(im, n * n) });
        let matrix = CMatrix::from_fn(n, n, |i, j| C64::new(re[i * n + j], im.map_or(0.0, |v| v[i * n + j])));
        let rho = DensityMatrix::new(matrix, split).map_err(|e| (QeslStatus::Config, e.to_string()))?;
        let cfg = SolverConfig {
            restarts,
            seed: derive_seed(seed, REE_STREAM),
            ..SolverConfig::default()
        };
        let result = ree(&rho, &cfg).map_err(core_error)?;
        // SAFETY: `value` is non-null and writable.
        unsafe { *value = result.value };
        let css = result.css.matrix();
        for (dst, part) in [(css_re, 0), (css_im, 1)] {
            if dst.is_null() {
                continue;
            }
            // SAFETY: non-null output arrays hold n² writable doubles.
            let dst = unsafe { std::slice::from_raw_parts_mut(dst, n * n) };
            for i in 0..n {
                for j in 0..n {
                    let z = css[(i, j)];
                    dst[i * n + j] = if part == 0 { z.re } else { z.im };
                }
            }
        }
        Ok(())
    })
}
