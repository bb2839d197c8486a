//! C interface to the constraint engine.
//!
//! Constraints are parsed into opaque handles. Paths are passed as row-major
//! `n × state_width` arrays of doubles holding only the measured columns;
//! constant columns introduced by numeric literals are appended internally.
//! Every fallible function returns an [`LtlfStatus`], and on failure a
//! message is available from [`ltlf_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ltlf_loss::{parse_with_base, pretty, CompiledConstraint, Error, Gamma, ParsedConstraint, Path};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtlfStatus {
    Ok = 0,
    NullPointer = 1,
    Syntax = 2,
    IndexOutOfRange = 3,
    UnsupportedNegation = 4,
    NonpositiveGamma = 5,
    Dimension = 6,
    Utf8 = 7,
    Panic = 8,
    Other = 9,
}

/// A parsed constraint bound to a fixed number of measured columns.
pub struct LtlfConstraint {
    pc: ParsedConstraint,
    compiled: CompiledConstraint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LtlfStatus {
    match e {
        Error::Syntax { .. } => LtlfStatus::Syntax,
        Error::IndexOutOfRange { .. } => LtlfStatus::IndexOutOfRange,
        Error::UnsupportedNegation(_) => LtlfStatus::UnsupportedNegation,
        Error::NonpositiveGamma(_) => LtlfStatus::NonpositiveGamma,
        Error::DimensionMismatch { .. } | Error::RaggedRow { .. } => LtlfStatus::Dimension,
        _ => LtlfStatus::Other,
    }
}

fn fail(status: LtlfStatus, message: impl Into<String>) -> LtlfStatus {
    set_error(message.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), LtlfStatus>) -> LtlfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LtlfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(LtlfStatus::Panic, "internal panic"),
    }
}

fn check(r: ltlf_loss::Result<()>) -> Result<(), LtlfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), LtlfStatus> {
    if p.is_null() {
        Err(fail(LtlfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies the caller's rows into a path with the constant columns appended.
///
/// # Safety
/// `data` must point to `n * state_width` readable doubles unless `n` is 0.
unsafe fn read_path(h: &LtlfConstraint, data: *const f64, n: usize) -> Result<Path, LtlfStatus> {
    let k = h.pc.state_width();
    if n == 0 {
        return Ok(Path::new(h.pc.width));
    }
    non_null(data, "data")?;
    let len = n
        .checked_mul(k)
        .ok_or_else(|| fail(LtlfStatus::Dimension, "path size overflows"))?;
    let values = std::slice::from_raw_parts(data, len).to_vec();
    let raw = Path::from_flat(k, values).map_err(|e| fail(status_of(&e), e.to_string()))?;
    h.pc.bind(&raw).map_err(|e| fail(status_of(&e), e.to_string()))
}

/// Parses `text` for paths with `state_width` measured columns and stores a
/// new handle in `*out`. The handle must be released with
/// [`ltlf_constraint_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ltlf_constraint_parse(
    text: *const c_char,
    state_width: usize,
    out: *mut *mut LtlfConstraint,
) -> LtlfStatus {
    guard(|| {
        non_null(text, "text")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| fail(LtlfStatus::Utf8, e.to_string()))?;
        let pc = parse_with_base(text, state_width).map_err(|e| fail(status_of(&e), e.to_string()))?;
        if pc.state_width() != state_width {
            return Err(fail(
                LtlfStatus::IndexOutOfRange,
                format!(
                    "state index {} out of range for {state_width} columns",
                    pc.state_width() - 1
                ),
            ));
        }
        let compiled =
            CompiledConstraint::new(&pc.ast, pc.width).map_err(|e| fail(status_of(&e), e.to_string()))?;
        *out = Box::into_raw(Box::new(LtlfConstraint { pc, compiled }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from [`ltlf_constraint_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ltlf_constraint_free(h: *mut LtlfConstraint) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of measured columns the handle expects per state.
///
/// # Safety
/// `h` must be a live handle or null, giving 0.
#[no_mangle]
pub unsafe extern "C" fn ltlf_constraint_state_width(h: *const LtlfConstraint) -> usize {
    h.as_ref().map_or(0, |h| h.pc.state_width())
}

/// Width of the evaluated states, constant columns included.
///
/// # Safety
/// `h` must be a live handle or null, giving 0.
#[no_mangle]
pub unsafe extern "C" fn ltlf_constraint_width(h: *const LtlfConstraint) -> usize {
    h.as_ref().map_or(0, |h| h.pc.width)
}

/// Canonical text of the constraint, to be released with
/// [`ltlf_string_free`]. Null if `h` is null.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ltlf_constraint_pretty(h: *const LtlfConstraint) -> *mut c_char {
    match h.as_ref() {
        Some(h) => CString::new(pretty(&h.pc)).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ltlf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Hard truth value of the constraint on an `n`-state path.
///
/// # Safety
/// `h` must be a live handle, `data` must hold `n * state_width` doubles
/// (it may be null when `n` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ltlf_eval(
    h: *const LtlfConstraint,
    data: *const f64,
    n: usize,
    out: *mut bool,
) -> LtlfStatus {
    guard(|| {
        non_null(h, "constraint")?;
        non_null(out, "out")?;
        let h = &*h;
        let p = read_path(h, data, n)?;
        let v = h.compiled.eval(&p).map_err(|e| fail(status_of(&e), e.to_string()))?;
        *out = v;
        Ok(())
    })
}

/// Soft loss with relaxation factor `gamma`; `gamma = 0` gives the hard
/// loss.
///
/// # Safety
/// As for [`ltlf_eval`].
#[no_mangle]
pub unsafe extern "C" fn ltlf_loss(
    h: *const LtlfConstraint,
    data: *const f64,
    n: usize,
    gamma: f64,
    out: *mut f64,
) -> LtlfStatus {
    guard(|| {
        non_null(h, "constraint")?;
        non_null(out, "out")?;
        let h = &*h;
        let p = read_path(h, data, n)?;
        let v = h
            .compiled
            .loss(&p, Gamma(gamma))
            .map_err(|e| fail(status_of(&e), e.to_string()))?;
        *out = v;
        Ok(())
    })
}

/// Loss and its gradient with respect to the measured columns. `out_grad`
/// receives `n * state_width` doubles in row-major order; `out_loss` may be
/// null.
///
/// # Safety
/// As for [`ltlf_eval`]; `out_grad` must have room for `n * state_width`
/// doubles and may be null only when `n` is 0.
#[no_mangle]
pub unsafe extern "C" fn ltlf_grad(
    h: *const LtlfConstraint,
    data: *const f64,
    n: usize,
    gamma: f64,
    out_loss: *mut f64,
    out_grad: *mut f64,
) -> LtlfStatus {
    guard(|| {
        non_null(h, "constraint")?;
        let h = &*h;
        check(Gamma(gamma).require_soft().map(drop))?;
        let p = read_path(h, data, n)?;
        let (loss, grad) = h
            .compiled
            .loss_and_grad(&p, Gamma(gamma))
            .map_err(|e| fail(status_of(&e), e.to_string()))?;
        if n > 0 {
            non_null(out_grad, "out_grad")?;
            let k = h.pc.state_width();
            let dst = std::slice::from_raw_parts_mut(out_grad, n * k);
            for (i, row) in dst.chunks_mut(k.max(1)).enumerate().take(n) {
                row.copy_from_slice(&grad.row(i)[..k]);
            }
        }
        if let Some(l) = out_loss.as_mut() {
            *l = loss;
        }
        Ok(())
    })
}

/// Smooth maximum of `a` and `b`; the plain maximum when `gamma <= 0`.
#[no_mangle]
pub extern "C" fn ltlf_max_gamma(gamma: f64, a: f64, b: f64) -> f64 {
    ltlf_loss::soft::max_gamma(Gamma(gamma), a, b)
}

/// Smooth minimum of `a` and `b`; the plain minimum when `gamma <= 0`.
#[no_mangle]
pub extern "C" fn ltlf_min_gamma(gamma: f64, a: f64, b: f64) -> f64 {
    ltlf_loss::soft::min_gamma(Gamma(gamma), a, b)
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ltlf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
