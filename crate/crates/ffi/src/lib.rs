//! C ABI over `blowuplab`.
//!
//! Scenarios and solutions are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a [`BlStatus`];
//! on failure [`bl_last_error`] describes the cause. Strings handed out by the
//! library are released with [`bl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blowuplab::criteria::{CheckKind, CheckOptions};
use blowuplab::models::{run_scenario, JacobiSolution, RunStatus};
use blowuplab::{validate_scenario, Error, FixedPointScenario};

/// Opaque scenario handle.
pub struct BlScenario(FixedPointScenario);

/// Opaque solution handle.
pub struct BlSolution(JacobiSolution);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidScenario = 4,
    WrongModel = 5,
    HypothesisNotMet = 6,
    Numerical = 7,
    InvalidArgument = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlRunStatus {
    Completed = 0,
    BlowupDetected = 1,
    StepFailure = 2,
}

/// Per-step series of a solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlSeries {
    Time = 0,
    F = 1,
    Fp = 2,
    G = 3,
    Gp = 4,
    Winding = 5,
    Vorticity = 6,
    ConstraintResidual = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlCheck {
    SignCriterion = 0,
    QuarterThreshold = 1,
    RotationBlowup = 2,
    MonotonePressure = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::InvalidScenario(_) => BlStatus::InvalidScenario,
        Error::WrongModel(_) => BlStatus::WrongModel,
        Error::HypothesisNotMet(_) => BlStatus::HypothesisNotMet,
        Error::Ode(_) | Error::Profile(_) | Error::NonpositiveF(_) => BlStatus::Numerical,
        Error::Json(_) => BlStatus::Parse,
        Error::Io(_) => BlStatus::Io,
        _ => BlStatus::InvalidArgument,
    }
}

fn fail(status: BlStatus, msg: impl Into<String>) -> BlStatus {
    set_error(msg.into());
    status
}

/// Runs `body`, turning panics into [`BlStatus::Panic`].
fn guard(body: impl FnOnce() -> BlStatus) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BlStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, BlStatus> {
    if p.is_null() {
        return Err(fail(BlStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(BlStatus::InvalidUtf8, e.to_string()))
}

unsafe fn hand_out(s: String, out: *mut *mut c_char) -> BlStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            BlStatus::Ok
        }
        Err(e) => fail(BlStatus::InvalidArgument, e.to_string()),
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a scenario.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_scenario_from_json(json: *const c_char, out: *mut *mut BlScenario) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return fail(BlStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let s = match FixedPointScenario::from_json(text) {
            Ok(s) => s,
            Err(e) => return fail(BlStatus::Parse, e.to_string()),
        };
        let report = validate_scenario(&s);
        if !report.is_empty() {
            return fail(BlStatus::InvalidScenario, report.to_string());
        }
        *out = Box::into_raw(Box::new(BlScenario(s)));
        BlStatus::Ok
    })
}

/// # Safety
/// `s` comes from [`bl_scenario_from_json`] and is freed once. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bl_scenario_free(s: *mut BlScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Canonical JSON of a scenario; release with [`bl_string_free`].
///
/// # Safety
/// `s` is a live scenario handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_scenario_to_json(s: *const BlScenario, out: *mut *mut c_char) -> BlStatus {
    guard(|| match (s.as_ref(), out.is_null()) {
        (Some(s), false) => hand_out(s.0.to_json(), out),
        _ => fail(BlStatus::NullPointer, "null argument"),
    })
}

/// Integrates the model matching the scenario's location and parity.
///
/// # Safety
/// `s` is a live scenario handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_run(s: *const BlScenario, out: *mut *mut BlSolution) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return fail(BlStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(s) = s.as_ref() else {
            return fail(BlStatus::NullPointer, "null scenario");
        };
        match run_scenario(&s.0) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(BlSolution(sol)));
                BlStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `s` comes from [`bl_run`] and is freed once. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_free(s: *mut BlSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of accepted steps, 0 for null.
///
/// # Safety
/// `s` is null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_len(s: *const BlSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` is a live solution handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_status(s: *const BlSolution, out: *mut BlRunStatus) -> BlStatus {
    guard(|| match (s.as_ref(), out.is_null()) {
        (Some(s), false) => {
            *out = match s.0.terminated {
                RunStatus::Completed => BlRunStatus::Completed,
                RunStatus::BlowupDetected => BlRunStatus::BlowupDetected,
                RunStatus::StepFailure => BlRunStatus::StepFailure,
            };
            BlStatus::Ok
        }
        _ => fail(BlStatus::NullPointer, "null argument"),
    })
}

/// Copies one series into `buf`. `written` receives the series length; when
/// `cap` is smaller nothing is copied and `BUFFER_TOO_SMALL` is returned, so a
/// call with `cap = 0` queries the size.
///
/// # Safety
/// `s` is a live solution handle, `buf` holds `cap` doubles (may be null when
/// `cap` is 0), `written` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_copy_series(
    s: *const BlSolution,
    which: BlSeries,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> BlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), written.is_null()) else {
            return fail(BlStatus::NullPointer, "null argument");
        };
        let sol = &s.0;
        let data: &[f64] = match which {
            BlSeries::Time => &sol.grid,
            BlSeries::F => &sol.f,
            BlSeries::Fp => &sol.fp,
            BlSeries::G => &sol.g,
            BlSeries::Gp => &sol.gp,
            BlSeries::Winding => &sol.winding_integral,
            BlSeries::Vorticity => &sol.vorticity_integral,
            BlSeries::ConstraintResidual => &sol.constraint_residual,
        };
        *written = data.len();
        if cap < data.len() {
            return fail(BlStatus::BufferTooSmall, format!("series has {} values, buffer holds {cap}", data.len()));
        }
        if !data.is_empty() {
            if buf.is_null() {
                return fail(BlStatus::NullPointer, "null buffer");
            }
            ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        }
        BlStatus::Ok
    })
}

/// `f`, `f'`, `g`, `g'` at time `t` from the continuous extension.
///
/// # Safety
/// `s` is a live solution handle; `out` holds 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_state_at(s: *const BlSolution, t: f64, out: *mut f64) -> BlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(BlStatus::NullPointer, "null argument");
        };
        let sol = &s.0;
        let (t0, t1) = (sol.grid[0], sol.t_final());
        if !(t >= t0 && t <= t1) {
            return fail(BlStatus::InvalidArgument, format!("t = {t} outside [{t0}, {t1}]"));
        }
        let x = sol.state_at(t);
        ptr::copy_nonoverlapping(x.as_ptr(), out, 4);
        BlStatus::Ok
    })
}

/// Writes the collapse time into `out` and sets `found` to 1, or sets `found`
/// to 0 when the run did not collapse.
///
/// # Safety
/// `s` is a live solution handle; `out` and `found` are writable.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_collapse_time(s: *const BlSolution, out: *mut f64, found: *mut i32) -> BlStatus {
    guard(|| {
        let (Some(s), false, false) = (s.as_ref(), out.is_null(), found.is_null()) else {
            return fail(BlStatus::NullPointer, "null argument");
        };
        match s.0.collapse_time() {
            Some(t) => {
                *out = t;
                *found = 1;
            }
            None => *found = 0,
        }
        BlStatus::Ok
    })
}

/// Runs a blowup criterion with default options and returns its report as
/// JSON; release with [`bl_string_free`].
///
/// # Safety
/// `s` is a live scenario handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bl_check(s: *const BlScenario, which: BlCheck, out: *mut *mut c_char) -> BlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(BlStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        let kind = match which {
            BlCheck::SignCriterion => CheckKind::SignCriterion,
            BlCheck::QuarterThreshold => CheckKind::QuarterThreshold,
            BlCheck::RotationBlowup => CheckKind::RotationBlowup,
            BlCheck::MonotonePressure => CheckKind::MonotonePressure,
        };
        match kind.run(&s.0, &CheckOptions::default()) {
            Ok(rep) => hand_out(rep.to_json(), out),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}
