//! C ABI for `rminmax`.
//!
//! Objects cross the boundary as opaque handles: an experiment from
//! `rmm_experiment_from_json` or `rmm_experiment_from_file`, and a run from
//! `rmm_experiment_run`, each released by its `rmm_*_free`. Every fallible
//! call returns an [`RmmStatus`]; on failure [`rmm_last_error`] describes
//! the problem. Panics are caught and reported as [`RmmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rminmax::cli::{cmd_check, execute, ExperimentConfig, RunSummary};
use rminmax::diagnostics::{run_checks, write_trace_csv, TraceRow};
use rminmax::{Error, MinimaxProblem, RunResult};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmmStatus {
    Ok = 0,
    /// At least one check failed.
    CheckFailed = 1,
    /// Invalid configuration, input file or argument.
    ConfigError = 2,
    /// A run diverged or produced non-finite values.
    NumericError = 3,
    NullPointer = 4,
    /// The requested value was not recorded.
    NotAvailable = 5,
    /// The caller's buffer is too small; the required length is reported.
    BufferTooSmall = 6,
    Panic = 7,
}

/// A parsed experiment configuration with its problem instance.
pub struct RmmExperiment {
    config: ExperimentConfig,
    problem: Box<dyn MinimaxProblem>,
}

/// The outcome of one run.
pub struct RmmRun {
    result: RunResult,
    summary: RunSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(e: &Error) -> RmmStatus {
    set_error(e.to_string());
    match e {
        Error::Numeric(_) => RmmStatus::NumericError,
        _ => RmmStatus::ConfigError,
    }
}

fn guard(f: impl FnOnce() -> RmmStatus) -> RmmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RmmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, RmmStatus> {
    if s.is_null() {
        set_error(format!("{what} is null"));
        return Err(RmmStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        RmmStatus::ConfigError
    })
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($p:expr, $what:expr) => {
        if $p.is_null() {
            set_error(concat!($what, " is null"));
            return RmmStatus::NullPointer;
        }
    };
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on the calling thread; empty when none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rmm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rmm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn build_experiment(config: ExperimentConfig, out: *mut *mut RmmExperiment) -> RmmStatus {
    match config.build_problem() {
        Ok(problem) => {
            let exp = Box::new(RmmExperiment { config, problem });
            // SAFETY: checked non-null by the callers
            unsafe { *out = Box::into_raw(exp) };
            RmmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Parses an experiment from JSON text. Relative dataset paths resolve
/// against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_from_json(json: *const c_char, out: *mut *mut RmmExperiment) -> RmmStatus {
    guard(|| {
        non_null!(out, "out");
        *out = ptr::null_mut();
        let text = try_status!(str_arg(json, "json"));
        match ExperimentConfig::from_json(text) {
            Ok(cfg) => build_experiment(cfg, out),
            Err(e) => fail(&e),
        }
    })
}

/// Loads an experiment from a JSON file. Relative dataset paths resolve
/// against the file's directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_from_file(path: *const c_char, out: *mut *mut RmmExperiment) -> RmmStatus {
    guard(|| {
        non_null!(out, "out");
        *out = ptr::null_mut();
        let path = try_status!(str_arg(path, "path"));
        match ExperimentConfig::load(Path::new(path)) {
            Ok(cfg) => build_experiment(cfg, out),
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `exp` must come from `rmm_experiment_from_*` and not have been freed;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_free(exp: *mut RmmExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of samples in the problem's finite sum.
///
/// # Safety
/// `exp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_num_samples(exp: *const RmmExperiment, out: *mut usize) -> RmmStatus {
    non_null!(exp, "experiment");
    non_null!(out, "out");
    *out = (*exp).problem.num_samples();
    RmmStatus::Ok
}

/// Shape of the manifold variable `x`.
///
/// # Safety
/// `exp` must be a live handle; `rows` and `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_x_shape(
    exp: *const RmmExperiment,
    rows: *mut usize,
    cols: *mut usize,
) -> RmmStatus {
    non_null!(exp, "experiment");
    non_null!(rows, "rows");
    non_null!(cols, "cols");
    let (r, c) = (*exp).problem.manifold().shape();
    *rows = r;
    *cols = c;
    RmmStatus::Ok
}

/// Runs the configured solver. `seed` overrides the configured seed unless
/// it is `UINT64_MAX`.
///
/// # Safety
/// `exp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_experiment_run(exp: *const RmmExperiment, seed: u64, out: *mut *mut RmmRun) -> RmmStatus {
    guard(|| {
        non_null!(out, "out");
        *out = ptr::null_mut();
        non_null!(exp, "experiment");
        let exp = &*exp;
        let mut solver = exp.config.solver_config();
        if seed != u64::MAX {
            solver.seed = seed;
        }
        match execute(&exp.config, exp.problem.as_ref(), &solver) {
            Ok((result, summary)) => {
                *out = Box::into_raw(Box::new(RmmRun { result, summary }));
                RmmStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `run` must come from [`rmm_experiment_run`] and not have been freed;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_free(run: *mut RmmRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of recorded iterations; 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_iterations(run: *const RmmRun) -> usize {
    run.as_ref().map_or(0, |r| r.result.trace.len())
}

/// Output index `zeta` in `1..=T`; 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_zeta(run: *const RmmRun) -> usize {
    run.as_ref().map_or(0, |r| r.result.zeta)
}

/// Samples drawn by the iterations; 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_samples(run: *const RmmRun) -> u64 {
    run.as_ref().map_or(0, |r| r.result.samples)
}

/// Mean recorded `|grad Phi(x_t)|`; `NotAvailable` when stationarity was
/// not recorded.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_averaged_stationarity(run: *const RmmRun, out: *mut f64) -> RmmStatus {
    non_null!(run, "run");
    non_null!(out, "out");
    match (*run).summary.averaged_stationarity {
        Some(v) => {
            *out = v;
            RmmStatus::Ok
        }
        None => {
            set_error("stationarity was not recorded (trace.stationarity_every = 0)");
            RmmStatus::NotAvailable
        }
    }
}

/// `|grad Phi(x_zeta)|` at the output iterate.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_output_stationarity(run: *const RmmRun, out: *mut f64) -> RmmStatus {
    non_null!(run, "run");
    non_null!(out, "out");
    *out = (*run).summary.output_stationarity;
    RmmStatus::Ok
}

fn column(name: &str) -> Option<fn(&TraceRow) -> f64> {
    Some(match name {
        "eta" => |r| r.eta,
        "f" => |r| r.f,
        "v_norm" => |r| r.v_norm,
        "w_norm" => |r| r.w_norm,
        "grad_phi" => |r| r.grad_phi.unwrap_or(f64::NAN),
        "y_gap" => |r| r.y_gap.unwrap_or(f64::NAN),
        "lyapunov" => |r| r.lyapunov.unwrap_or(f64::NAN),
        "v_error" => |r| r.v_error.unwrap_or(f64::NAN),
        "w_error" => |r| r.w_error.unwrap_or(f64::NAN),
        "samples" => |r| r.samples as f64,
        _ => return None,
    })
}

/// Copies one trace column into `buf`. Columns: `eta`, `f`, `v_norm`,
/// `w_norm`, `grad_phi`, `y_gap`, `lyapunov`, `v_error`, `w_error`,
/// `samples`. Unrecorded entries are NaN. `len_out` receives the number of
/// rows; when `buf_len` is smaller nothing is copied and `BufferTooSmall`
/// is returned.
///
/// # Safety
/// `run` must be a live handle, `name` a NUL-terminated string, `buf`
/// writable for `buf_len` doubles (may be null when `buf_len` is 0) and
/// `len_out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_trace_column(
    run: *const RmmRun,
    name: *const c_char,
    buf: *mut f64,
    buf_len: usize,
    len_out: *mut usize,
) -> RmmStatus {
    non_null!(run, "run");
    non_null!(len_out, "len_out");
    let name = try_status!(str_arg(name, "name"));
    let Some(get) = column(name) else {
        set_error(format!("unknown trace column `{name}`"));
        return RmmStatus::ConfigError;
    };
    let rows = &(*run).result.trace;
    *len_out = rows.len();
    if buf_len < rows.len() {
        set_error(format!("buffer holds {buf_len} values, {} needed", rows.len()));
        return RmmStatus::BufferTooSmall;
    }
    non_null!(buf, "buf");
    let dst = std::slice::from_raw_parts_mut(buf, rows.len());
    for (d, r) in dst.iter_mut().zip(rows) {
        *d = get(r);
    }
    RmmStatus::Ok
}

/// Copies the output iterate `x_zeta` (column-major) into `buf`;
/// `len_out` receives `rows * cols`.
///
/// # Safety
/// As for [`rmm_run_trace_column`].
#[no_mangle]
pub unsafe extern "C" fn rmm_run_output_point(
    run: *const RmmRun,
    buf: *mut f64,
    buf_len: usize,
    len_out: *mut usize,
) -> RmmStatus {
    non_null!(run, "run");
    non_null!(len_out, "len_out");
    let x = (*run).result.x_zeta.matrix();
    *len_out = x.len();
    if buf_len < x.len() {
        set_error(format!("buffer holds {buf_len} values, {} needed", x.len()));
        return RmmStatus::BufferTooSmall;
    }
    non_null!(buf, "buf");
    std::slice::from_raw_parts_mut(buf, x.len()).copy_from_slice(x.as_slice());
    RmmStatus::Ok
}

/// Writes the trace CSV to `path`.
///
/// # Safety
/// `run` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_write_trace(run: *const RmmRun, path: *const c_char) -> RmmStatus {
    guard(|| {
        non_null!(run, "run");
        let path = try_status!(str_arg(path, "path"));
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => {
                set_error(format!("cannot create {path}: {e}"));
                return RmmStatus::ConfigError;
            }
        };
        match write_trace_csv(&(*run).result.trace, std::io::BufWriter::new(file)) {
            Ok(()) => RmmStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Run summary as JSON; free with [`rmm_string_free`]. Null on a null
/// handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rmm_run_summary_json(run: *const RmmRun) -> *mut c_char {
    let Some(run) = run.as_ref() else {
        set_error("run is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&run.summary) {
        Ok(s) => into_c_string(s),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Runs the check suite (groups whose name contains `filter`, all when
/// null). Returns `Ok` when every check passes and `CheckFailed` otherwise.
/// When `report_out` is non-null it receives the reports as a JSON array,
/// to be freed with [`rmm_string_free`].
///
/// # Safety
/// `filter` must be null or a NUL-terminated string; `report_out` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rmm_check(filter: *const c_char, seed: u64, report_out: *mut *mut c_char) -> RmmStatus {
    guard(|| {
        let filter = if filter.is_null() { None } else { Some(try_status!(str_arg(filter, "filter"))) };
        let reports = run_checks(filter, seed);
        if !report_out.is_null() {
            *report_out = match serde_json::to_string(&reports) {
                Ok(s) => into_c_string(s),
                Err(_) => ptr::null_mut(),
            };
        }
        if reports.iter().all(|r| r.pass) {
            RmmStatus::Ok
        } else {
            set_error(format!("{} of {} checks failed", reports.iter().filter(|r| !r.pass).count(), reports.len()));
            RmmStatus::CheckFailed
        }
    })
}

/// Like [`rmm_check`] but also writes the JSON report to `report_path`.
///
/// # Safety
/// `filter` must be null or a NUL-terminated string; `report_path` a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rmm_check_to_file(filter: *const c_char, seed: u64, report_path: *const c_char) -> RmmStatus {
    guard(|| {
        let filter = if filter.is_null() { None } else { Some(try_status!(str_arg(filter, "filter"))) };
        let path = try_status!(str_arg(report_path, "report_path"));
        match cmd_check(filter, seed, Path::new(path)) {
            Ok(reports) if reports.iter().all(|r| r.pass) => RmmStatus::Ok,
            Ok(_) => {
                set_error("some checks failed");
                RmmStatus::CheckFailed
            }
            Err(e) => fail(&e),
        }
    })
}
