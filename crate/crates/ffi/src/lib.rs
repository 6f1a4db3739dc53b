//! C ABI over the `qcoin` simulator.
//!
//! Parameters and Monte Carlo estimates cross the boundary as opaque
//! handles created and released by this library. Every fallible call
//! returns a [`QcoinStatus`]; on failure the message is available from
//! [`qcoin_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcoin::harness::{monte_carlo, McEstimate};
use qcoin::protocol::{derive_params, ProtocolParams, Variant};
use qcoin::strategies::{attack_analytics, bias_upper_bound, critical_round, StrategySpec};
use qcoin::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcoinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Inapplicable = 3,
    Resource = 4,
    Numerical = 5,
    Io = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcoinVariant {
    WithReturn = 0,
    NoReturn = 1,
}

/// Opaque protocol parameters.
pub struct QcoinParams {
    inner: ProtocolParams,
}

/// Opaque Monte Carlo estimate.
pub struct QcoinEstimate {
    inner: McEstimate,
}

/// Closed-form figures of the conclusive attack.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcoinAnalytics {
    pub round: usize,
    pub pc: f64,
    pub ps: f64,
    pub p0: f64,
    pub xi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> QcoinStatus {
    match e {
        Error::Inapplicable { .. } => QcoinStatus::Inapplicable,
        Error::Resource { .. } => QcoinStatus::Resource,
        Error::NotConverged { .. } | Error::NotSymmetric { .. } | Error::Degenerate(_) => {
            QcoinStatus::Numerical
        }
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Transcript { .. } => QcoinStatus::Io,
        _ => QcoinStatus::InvalidParameter,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard<F>(body: F) -> QcoinStatus
where
    F: FnOnce() -> Result<(), (QcoinStatus, String)>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QcoinStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QcoinStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (QcoinStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QcoinStatus, String) {
    (QcoinStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QcoinStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QcoinStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (QcoinStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qcoin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default parameters for `m` procedures at angle `theta` (with-return).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn qcoin_params_derive(
    m: usize,
    theta: f64,
    out: *mut *mut QcoinParams,
) -> QcoinStatus {
    guard(|| {
        let inner = derive_params(m, theta).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QcoinParams { inner })))
    })
}

/// Explicit parameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn qcoin_params_new(
    m: usize,
    n: usize,
    theta: f64,
    variant: QcoinVariant,
    out: *mut *mut QcoinParams,
) -> QcoinStatus {
    guard(|| {
        let variant = match variant {
            QcoinVariant::WithReturn => Variant::WithReturn,
            QcoinVariant::NoReturn => Variant::NoReturn,
        };
        let inner = ProtocolParams::new(m, n, theta, variant).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QcoinParams { inner })))
    })
}

/// Particles per side per procedure, or 0 for a NULL handle.
///
/// # Safety
/// `params` must be NULL or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn qcoin_params_n(params: *const QcoinParams) -> usize {
    params.as_ref().map_or(0, |p| p.inner.n)
}

/// Releases a parameter handle. NULL is ignored.
///
/// # Safety
/// `params` must be NULL or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn qcoin_params_free(params: *mut QcoinParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Monte Carlo estimate for two strategies given by name, e.g. `"honest"`
/// or `"conclusive:target=0"`.
///
/// # Safety
/// `params` must be a live handle, `alice` and `bob` NUL-terminated strings,
/// `out` a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn qcoin_monte_carlo(
    params: *const QcoinParams,
    alice: *const c_char,
    bob: *const c_char,
    trials: u64,
    seed: u64,
    workers: usize,
    out: *mut *mut QcoinEstimate,
) -> QcoinStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let alice: StrategySpec = read_str(alice, "alice")?.parse().map_err(lib_err)?;
        let bob: StrategySpec = read_str(bob, "bob")?.parse().map_err(lib_err)?;
        let inner =
            monte_carlo(&params.inner, &alice, &bob, trials, seed, workers).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QcoinEstimate { inner })))
    })
}

/// Frequencies `p0`, `p1`, abort and standard errors of an estimate.
///
/// # Safety
/// `estimate` must be a live handle; each output pointer must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcoin_estimate_values(
    estimate: *const QcoinEstimate,
    p0: *mut f64,
    p1: *mut f64,
    abort: *mut f64,
    stderr0: *mut f64,
    stderr1: *mut f64,
) -> QcoinStatus {
    guard(|| {
        let e = &estimate.as_ref().ok_or_else(|| null("estimate"))?.inner;
        write_out(p0, e.p0)?;
        write_out(p1, e.p1)?;
        write_out(abort, e.abort)?;
        write_out(stderr0, e.stderr0)?;
        write_out(stderr1, e.stderr1)
    })
}

/// Number of sessions behind an estimate, or 0 for NULL.
///
/// # Safety
/// `estimate` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcoin_estimate_trials(estimate: *const QcoinEstimate) -> u64 {
    estimate.as_ref().map_or(0, |e| e.inner.trials)
}

/// The estimate as a JSON string; release it with [`qcoin_string_free`].
/// Returns NULL for a NULL handle.
///
/// # Safety
/// `estimate` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcoin_estimate_to_json(estimate: *const QcoinEstimate) -> *mut c_char {
    match estimate.as_ref() {
        Some(e) => CString::new(e.inner.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// Releases an estimate handle. NULL is ignored.
///
/// # Safety
/// `estimate` must be NULL or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn qcoin_estimate_free(estimate: *mut QcoinEstimate) {
    if !estimate.is_null() {
        drop(Box::from_raw(estimate));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn qcoin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Smallest round `i` with `cosⁱθ ≤ (m − 1)/m²`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qcoin_critical_round(
    m: usize,
    theta: f64,
    out: *mut usize,
) -> QcoinStatus {
    guard(|| write_out(out, critical_round(m, theta).map_err(lib_err)?))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qcoin_attack_analytics(
    m: usize,
    theta: f64,
    out: *mut QcoinAnalytics,
) -> QcoinStatus {
    guard(|| {
        let a = attack_analytics(m, theta).map_err(lib_err)?;
        write_out(
            out,
            QcoinAnalytics {
                round: a.round,
                pc: a.pc,
                ps: a.ps,
                p0: a.p0,
                xi: a.xi,
            },
        )
    })
}

/// Maximum of `(1/2)c^m(1 − c²)` over `c ∈ [0, 1]` and its argument.
///
/// # Safety
/// `value` and `argmax` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qcoin_bias_upper_bound(
    m: usize,
    value: *mut f64,
    argmax: *mut f64,
) -> QcoinStatus {
    guard(|| {
        let b = bias_upper_bound(m).map_err(lib_err)?;
        write_out(value, b.value)?;
        write_out(argmax, b.argmax)
    })
}
