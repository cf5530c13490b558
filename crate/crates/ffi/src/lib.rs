//! C ABI over `tod-jumps`.
//!
//! Objects cross the boundary as opaque handles created by `tj_*_new`-style
//! functions and released with the matching `tj_*_free`. Every function
//! returns a [`TjStatus`]; on failure a message is available from
//! [`tj_last_error_message`] on the same thread. Arrays are copied into
//! caller-owned buffers: pass the capacity, and the number of elements needed
//! is always written to `*written`, also when the buffer is too small.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tod_jumps::detector::{detect_jumps, DetectorConfig, JumpReport};
use tod_jumps::grid::{load_returns, Layout, ReturnGrid};
use tod_jumps::io::{to_json_pretty, JumpReportRecord};
use tod_jumps::simulator::{simulate_path, SimConfig, SimPath};
use tod_jumps::tod::tod_profile;
use tod_jumps::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input data rejected: shape, parse, non-finite or degenerate values.
    Data = 3,
    Config = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TjLayout {
    Returns = 0,
    Prices = 1,
}

/// Detector settings; start from [`tj_detector_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TjDetectorConfig {
    pub raw_multiplier: f64,
    pub round_multiplier: f64,
    pub tod_cap: f64,
    pub max_rounds: usize,
    pub truncation_exponent: f64,
    /// Set to compute randomized jump sizes from `size_seed`.
    pub randomized_sizes: bool,
    pub size_seed: u64,
}

impl From<&TjDetectorConfig> for DetectorConfig {
    fn from(c: &TjDetectorConfig) -> Self {
        DetectorConfig {
            raw_multiplier: c.raw_multiplier,
            round_multiplier: c.round_multiplier,
            tod_cap: c.tod_cap,
            max_rounds: c.max_rounds,
            truncation_exponent: c.truncation_exponent,
            size_seed: c.randomized_sizes.then_some(c.size_seed),
        }
    }
}

/// Opaque return grid.
pub struct TjGrid(ReturnGrid);

/// Opaque detection report.
pub struct TjReport(JumpReport);

/// Opaque simulated path.
pub struct TjSimPath(SimPath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> TjStatus {
    match err {
        Error::Config { .. } => TjStatus::Config,
        Error::Io { .. } => TjStatus::Io,
        _ => TjStatus::Data,
    }
}

fn fail(status: TjStatus, msg: impl Into<String>) -> TjStatus {
    set_error(msg);
    status
}

fn from_core(err: Error) -> TjStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into [`TjStatus::Panic`].
fn guard(f: impl FnOnce() -> TjStatus) -> TjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(TjStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TjStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

unsafe fn copy_out<T: Copy>(
    src: &[T],
    buf: *mut T,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    *written = src.len();
    if src.is_empty() {
        return TjStatus::Ok;
    }
    if buf.is_null() || capacity < src.len() {
        return fail(
            TjStatus::BufferTooSmall,
            format!("need {} elements, capacity {capacity}", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    TjStatus::Ok
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, TjStatus> {
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TjStatus::InvalidArgument, "string is not valid UTF-8"))
}

fn into_c_string(s: String, out: *mut *mut c_char) -> TjStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            TjStatus::Ok
        }
        Err(_) => fail(TjStatus::Data, "string contains a NUL byte"),
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a grid from `len` returns, `m` per day. `delta <= 0` selects
/// `1/(252 m)`.
///
/// # Safety
/// `returns` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_grid_new(
    returns: *const f64,
    len: usize,
    m: usize,
    delta: f64,
    out: *mut *mut TjGrid,
) -> TjStatus {
    guard(|| {
        non_null!(out);
        if len > 0 {
            non_null!(returns);
        }
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(returns, len).to_vec()
        };
        let delta = if delta > 0.0 {
            delta
        } else {
            tod_jumps::grid::default_delta(m)
        };
        match ReturnGrid::new(values, m, delta) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(TjGrid(g)));
                TjStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Loads a grid from a text file; `layout` is a [`TjLayout`] value.
/// `delta <= 0` selects `1/(252 m)`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_grid_load(
    path: *const c_char,
    m: usize,
    layout: u32,
    delta: f64,
    out: *mut *mut TjGrid,
) -> TjStatus {
    guard(|| {
        non_null!(path, out);
        let path = match c_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let layout = match layout {
            x if x == TjLayout::Returns as u32 => Layout::Returns,
            x if x == TjLayout::Prices as u32 => Layout::Prices,
            other => return fail(TjStatus::InvalidArgument, format!("unknown layout {other}")),
        };
        let delta = if delta > 0.0 {
            delta
        } else {
            tod_jumps::grid::default_delta(m)
        };
        match load_returns(Path::new(path), m, layout, delta) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(TjGrid(g)));
                TjStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `grid` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_grid_shape(
    grid: *const TjGrid,
    m: *mut usize,
    days: *mut usize,
    delta: *mut f64,
) -> TjStatus {
    guard(|| {
        non_null!(grid, m, days, delta);
        let g = &(*grid).0;
        *m = g.m();
        *days = g.days();
        *delta = g.delta();
        TjStatus::Ok
    })
}

/// # Safety
/// `grid` must be a live handle; `buf` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn tj_grid_returns(
    grid: *const TjGrid,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(grid, written);
        copy_out((*grid).0.returns(), buf, capacity, written)
    })
}

/// Releases a grid. NULL is ignored.
///
/// # Safety
/// `grid` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tj_grid_free(grid: *mut TjGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Per-slot TOD factors into `tod` (NaN where undefined) and the bipower
/// level into `bar_alpha`. `bar_alpha` may be NULL.
///
/// # Safety
/// `grid` must be a live handle; `tod` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn tj_tod_profile(
    grid: *const TjGrid,
    exponent: f64,
    tod: *mut f64,
    capacity: usize,
    written: *mut usize,
    bar_alpha: *mut f64,
) -> TjStatus {
    guard(|| {
        non_null!(grid, written);
        match tod_profile(&(*grid).0, exponent) {
            Ok(p) => {
                if !bar_alpha.is_null() {
                    *bar_alpha = p.bar_alpha;
                }
                copy_out(&p.values_or_nan(), tod, capacity, written)
            }
            Err(e) => from_core(e),
        }
    })
}

#[no_mangle]
pub extern "C" fn tj_detector_config_default() -> TjDetectorConfig {
    let d = DetectorConfig::default();
    TjDetectorConfig {
        raw_multiplier: d.raw_multiplier,
        round_multiplier: d.round_multiplier,
        tod_cap: d.tod_cap,
        max_rounds: d.max_rounds,
        truncation_exponent: d.truncation_exponent,
        randomized_sizes: false,
        size_seed: 0,
    }
}

/// Runs detection. `config` may be NULL for the defaults.
///
/// # Safety
/// `grid` must be a live handle; `config`, if not NULL, must be readable;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_detect(
    grid: *const TjGrid,
    config: *const TjDetectorConfig,
    out: *mut *mut TjReport,
) -> TjStatus {
    guard(|| {
        non_null!(grid, out);
        let cfg = if config.is_null() {
            DetectorConfig::default()
        } else {
            DetectorConfig::from(&*config)
        };
        match detect_jumps(&(*grid).0, &cfg) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(TjReport(r)));
                TjStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `report` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_report_jump_count(
    report: *const TjReport,
    count: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(report, count);
        *count = (*report).0.total();
        TjStatus::Ok
    })
}

/// 0-based flat indices of detected jumps.
///
/// # Safety
/// `report` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn tj_report_jump_indices(
    report: *const TjReport,
    buf: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(report, written);
        copy_out(&(*report).0.jump_indices, buf, capacity, written)
    })
}

/// Jump-size estimates aligned with the indices. Randomized sizes exist only
/// when the detector ran with `randomized_sizes`.
///
/// # Safety
/// `report` must be a live handle; `buf` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn tj_report_jump_sizes(
    report: *const TjReport,
    randomized: bool,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(report, written);
        let r = &(*report).0;
        let sizes = if randomized {
            match &r.sizes_randomized {
                Some(s) => s,
                None => {
                    return fail(
                        TjStatus::InvalidArgument,
                        "report has no randomized sizes; detect with randomized_sizes set",
                    )
                }
            }
        } else {
            &r.sizes_deterministic
        };
        copy_out(sizes, buf, capacity, written)
    })
}

/// New detections per round, in round order.
///
/// # Safety
/// `report` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn tj_report_round_counts(
    report: *const TjReport,
    buf: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(report, written);
        copy_out(&(*report).0.round_counts(), buf, capacity, written)
    })
}

/// # Safety
/// `report` must be a live handle; `converged` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_report_converged(
    report: *const TjReport,
    converged: *mut bool,
) -> TjStatus {
    guard(|| {
        non_null!(report, converged);
        *converged = (*report).0.converged;
        TjStatus::Ok
    })
}

/// The report as JSON (1-based indices, as written by the CLI). Free the
/// string with [`tj_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_report_to_json(
    report: *const TjReport,
    out: *mut *mut c_char,
) -> TjStatus {
    guard(|| {
        non_null!(report, out);
        match to_json_pretty(&JumpReportRecord::from(&(*report).0)) {
            Ok(s) => into_c_string(s, out),
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `report` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tj_report_free(report: *mut TjReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Simulates a path from a JSON configuration; missing fields take their
/// defaults and NULL means all defaults.
///
/// # Safety
/// `config_json`, if not NULL, must be a NUL-terminated string; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tj_simulate_json(
    config_json: *const c_char,
    out: *mut *mut TjSimPath,
) -> TjStatus {
    guard(|| {
        non_null!(out);
        let config = if config_json.is_null() {
            SimConfig::default()
        } else {
            let text = match c_str(config_json) {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str::<SimConfig>(text) {
                Ok(c) => c,
                Err(e) => return fail(TjStatus::Config, format!("config: {e}")),
            }
        };
        match simulate_path(&config) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(TjSimPath(p)));
                TjStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Copies the simulated returns into a new grid handle.
///
/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tj_simpath_grid(
    path: *const TjSimPath,
    out: *mut *mut TjGrid,
) -> TjStatus {
    guard(|| {
        non_null!(path, out);
        *out = Box::into_raw(Box::new(TjGrid((*path).0.grid.clone())));
        TjStatus::Ok
    })
}

/// True jump slots (0-based) and their net sizes. `sizes` may be NULL to
/// skip them; otherwise it must hold `capacity` doubles.
///
/// # Safety
/// `path` must be a live handle; buffers must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn tj_simpath_true_jumps(
    path: *const TjSimPath,
    indices: *mut usize,
    sizes: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> TjStatus {
    guard(|| {
        non_null!(path, written);
        let p = &(*path).0;
        let status = copy_out(&p.true_jump_indices, indices, capacity, written);
        if status != TjStatus::Ok || sizes.is_null() {
            return status;
        }
        copy_out(&p.true_jump_sizes, sizes, capacity, written)
    })
}

/// # Safety
/// `path` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tj_simpath_free(path: *mut TjSimPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}
