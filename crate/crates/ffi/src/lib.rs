//! C interface. Systems and reports are opaque handles; every call returns a
//! [`DfdStatus`] and leaves a message for [`dfd_last_error`] on failure.
//!
//! Strings passed in must be NUL-terminated UTF-8. Strings handed out are owned by
//! the handle they came from unless documented otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diagonal_core::bounds::{complete_bounds, iterated_report, primary_bounds};
use diagonal_core::cli::{operator_from_json, render};
use diagonal_core::dfinite::DFiniteSystem;
use diagonal_core::gessel::bivariate_annihilator;
use diagonal_core::lipshitz::{annihilator, Mode, Options, Strategy, Target};
use diagonal_core::series::{DiagonalSpec, TruncatedSeries};
use diagonal_core::Error;
use serde_json::Value;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    InvalidSystem = 5,
    /// No operator found within the search limits, or the bound-size system has no kernel.
    Infeasible = 6,
    /// The series is too short for the requested check.
    Truncation = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdPipeline {
    Lipshitz = 0,
    Gessel = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdMode {
    Primary = 0,
    Complete = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdStrategy {
    Minimal = 0,
    Bound = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DfdDiagOptions {
    pub pipeline: DfdPipeline,
    pub mode: DfdMode,
    pub strategy: DfdStrategy,
    /// Order of the diagonal checked by verification.
    pub trunc: u32,
    pub max_n: u32,
    pub max_unknowns: usize,
}

/// A parsed D-finite system.
pub struct DfdSystem(DFiniteSystem);

/// A JSON report with its verdict.
pub struct DfdReport {
    json: CString,
    passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DfdStatus {
    match e {
        Error::Parse { .. } | Error::Io { .. } => DfdStatus::Parse,
        Error::InvalidArgument(_) | Error::VariableMismatch(..) => DfdStatus::InvalidArgument,
        Error::InvalidSystem(_) | Error::ZeroDenominator | Error::SingularAtOrigin => DfdStatus::InvalidSystem,
        Error::KernelTrivial(_) | Error::SearchExhausted(_) | Error::BoundViolated(_) => DfdStatus::Infeasible,
        Error::TruncationExhausted { .. } | Error::EmptyWindow { .. } => DfdStatus::Truncation,
        _ => DfdStatus::Internal,
    }
}

enum Fail {
    Status(DfdStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DfdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfdStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside the library".into());
            DfdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(DfdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(DfdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse_json(s: &str, what: &str) -> Result<Value, Fail> {
    serde_json::from_str(s).map_err(|e| Fail::Status(DfdStatus::Parse, format!("{what}: {e}")))
}

fn null(what: &str) -> Fail {
    Fail::Status(DfdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn put_report(out: *mut *mut DfdReport, report: &Value, passed: bool) -> Result<(), Fail> {
    let json = CString::new(render(report)).map_err(|_| Fail::Status(DfdStatus::Internal, "NUL in report".into()))?;
    *out = Box::into_raw(Box::new(DfdReport { json, passed }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn dfd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dfd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn dfd_diag_options_default() -> DfdDiagOptions {
    let o = Options::default();
    DfdDiagOptions {
        pipeline: DfdPipeline::Lipshitz,
        mode: DfdMode::Primary,
        strategy: DfdStrategy::Minimal,
        trunc: o.trunc,
        max_n: o.max_n,
        max_unknowns: o.max_unknowns,
    }
}

/// Parse a system document (`variables` plus `rational` or `operators`).
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfd_system_from_json(json: *const c_char, out: *mut *mut DfdSystem) -> DfdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = parse_json(str_arg(json, "json")?, "system")?;
        let sys = DFiniteSystem::from_json(&v)?;
        *out = Box::into_raw(Box::new(DfdSystem(sys)));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from [`dfd_system_from_json`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dfd_system_free(sys: *mut DfdSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_system_num_vars(sys: *const DfdSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.n())
}

/// Construct and verify an annihilator of the diagonal.
///
/// # Safety
/// `sys` must be a live handle, `opts` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dfd_diag(
    sys: *const DfdSystem,
    opts: *const DfdDiagOptions,
    out: *mut *mut DfdReport,
) -> DfdStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.0;
        let o = *opts.as_ref().ok_or_else(|| null("opts"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let options = Options {
            strategy: match o.strategy {
                DfdStrategy::Minimal => Strategy::Minimal,
                DfdStrategy::Bound => Strategy::Bound,
            },
            trunc: o.trunc,
            max_n: o.max_n,
            max_unknowns: o.max_unknowns,
            seed: 0,
        };
        let (report, passed) = match o.pipeline {
            DfdPipeline::Gessel => {
                let r = bivariate_annihilator(sys, &options)?;
                (r.to_json(), r.verification.passed())
            }
            DfdPipeline::Lipshitz => {
                let mode = match o.mode {
                    DfdMode::Primary => Mode::Primary,
                    DfdMode::Complete => Mode::Complete,
                };
                let r = annihilator(sys, mode, Target::Diagonal, &options)?;
                (r.to_json(), r.verification.passed())
            }
        };
        put_report(out, &report, passed)
    })
}

/// Truncated diagonal through order `trunc` (primary: first two variables).
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfd_oracle(
    sys: *const DfdSystem,
    mode: DfdMode,
    trunc: u32,
    out: *mut *mut DfdReport,
) -> DfdStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let (depth, spec) = match mode {
            DfdMode::Primary => (2 * trunc, DiagonalSpec::Primary { keep: 0, drop: 1 }),
            DfdMode::Complete => (sys.n() as u32 * trunc, DiagonalSpec::Complete),
        };
        let depth = sys.max_series_order().map_or(depth, |m| m.min(depth));
        let d = sys.series(depth)?.diagonal(&spec)?;
        put_report(out, &d.to_json(), true)
    })
}

/// Check the operator of `operator_json` (a report or `{variables, operator}`) against
/// the series document `series_json`. The report's verdict carries the outcome.
///
/// # Safety
/// Both strings must be valid C strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfd_verify(
    operator_json: *const c_char,
    series_json: *const c_char,
    out: *mut *mut DfdReport,
) -> DfdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let op = operator_from_json(&parse_json(str_arg(operator_json, "operator_json")?, "operator")?)?;
        let s = TruncatedSeries::from_json(&parse_json(str_arg(series_json, "series_json")?, "series")?, "series")?;
        if s.vars().len() != op.vars().len() {
            return Err(Error::VariableMismatch(s.vars().names().to_vec(), op.vars().names().to_vec()).into());
        }
        let map: Vec<usize> = (0..s.vars().len()).collect();
        let s = TruncatedSeries::from_polynomial(&s.to_polynomial().embed(op.vars(), &map), s.valid());
        let rep = s.verify_annihilation(&op)?;
        put_report(out, &rep.to_json(), rep.passed())
    })
}

/// Bounds for the primary diagonal of a bivariate system.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfd_bounds_primary(d1: u32, d2: u32, r1: u32, r2: u32, out: *mut *mut DfdReport) -> DfdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_report(out, &primary_bounds(d1, d2, r1, r2, None)?.to_json(), true)
    })
}

/// Bounds for the complete diagonal; `d` and `r` hold `n` entries each.
///
/// # Safety
/// `d` and `r` must point to `n` readable values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_bounds_complete(
    n: usize,
    d: *const u32,
    r: *const u32,
    out: *mut *mut DfdReport,
) -> DfdStatus {
    guard(|| {
        if out.is_null() || d.is_null() || r.is_null() {
            return Err(null("argument"));
        }
        let d = std::slice::from_raw_parts(d, n);
        let r = std::slice::from_raw_parts(r, n);
        put_report(out, &complete_bounds(d, r)?.to_json(), true)
    })
}

/// Exponents `(u, v, s, t)` of the `k`-times iterated diagonal.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfd_bounds_iterated(k: u32, out: *mut *mut DfdReport) -> DfdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_report(out, &iterated_report(k)?.to_json(), true)
    })
}

/// The report as JSON, owned by `report`. Null for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_json(report: *const DfdReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// 1 if the report's verdict passed (or it carries none), 0 otherwise.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_passed(report: *const DfdReport) -> i32 {
    report.as_ref().map_or(0, |r| r.passed as i32)
}

/// # Safety
/// `report` must be null or a handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_free(report: *mut DfdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
