//! C ABI for the prodkit analysis library.
//!
//! Sequences travel as opaque handles; analyses return verdicts and reports
//! as JSON strings allocated by this library. Every function returns a
//! status code; a textual detail for the most recent failure on the calling
//! thread is available from [`prodkit_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use prodkit::accum::{self, AnalysisParams};
use prodkit::error::Error;
use prodkit::modulus::{mmod, mparts, PositiveReal};
use prodkit::numerics::Precision;
use prodkit::rearrange;
use prodkit::seq::PosSeq;

/// ABI revision; bump on any breaking change to this header.
pub const PRODKIT_ABI_VERSION: u32 = 1;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdkitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EvalError = 4,
    DomainError = 5,
    PreconditionError = 6,
    InvalidInput = 7,
    InternalError = 8,
}

/// An opaque positive sequence.
pub struct ProdkitSeq {
    inner: PosSeq,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
}

fn status_of(err: &Error) -> ProdkitStatus {
    match err {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } => ProdkitStatus::ParseError,
        Error::Eval { .. } => ProdkitStatus::EvalError,
        Error::Domain(_) => ProdkitStatus::DomainError,
        Error::Dimension(_) => ProdkitStatus::InvalidInput,
        Error::Precondition(_) => ProdkitStatus::PreconditionError,
        Error::InvalidInput(_) => ProdkitStatus::InvalidInput,
    }
}

fn fail(err: Error) -> ProdkitStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guarded(f: impl FnOnce() -> ProdkitStatus + std::panic::UnwindSafe) -> ProdkitStatus {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ProdkitStatus::InternalError
        }
    }
}

/// ABI revision of this library.
#[no_mangle]
pub extern "C" fn prodkit_abi_version() -> u32 {
    PRODKIT_ABI_VERSION
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn prodkit_status_name(status: ProdkitStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        ProdkitStatus::Ok => b"ok\0",
        ProdkitStatus::NullArgument => b"null argument\0",
        ProdkitStatus::InvalidUtf8 => b"invalid utf-8\0",
        ProdkitStatus::ParseError => b"parse error\0",
        ProdkitStatus::EvalError => b"evaluation error\0",
        ProdkitStatus::DomainError => b"domain error\0",
        ProdkitStatus::PreconditionError => b"precondition violated\0",
        ProdkitStatus::InvalidInput => b"invalid input\0",
        ProdkitStatus::InternalError => b"internal error\0",
    };
    name.as_ptr() as *const c_char
}

/// Detail message for the most recent failure on this thread, as a new
/// string owned by the caller (free with `prodkit_string_free`). Returns
/// NULL when no failure has been recorded.
#[no_mangle]
pub extern "C" fn prodkit_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if msg.is_empty() {
            std::ptr::null_mut()
        } else {
            CString::new(msg.as_str())
                .map(CString::into_raw)
                .unwrap_or(std::ptr::null_mut())
        }
    })
}

/// Free a string allocated by this library. NULL is a no-op.
///
/// # Safety
/// `s` must have been returned by a prodkit function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn prodkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a sequence expression in the variable `n`. `origin` is the index
/// of the first term (0 or 1). On success writes a new handle to `out`.
///
/// # Safety
/// `text` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn prodkit_seq_parse(
    text: *const c_char,
    origin: u64,
    out: *mut *mut ProdkitSeq,
) -> ProdkitStatus {
    if text.is_null() || out.is_null() {
        set_error("text and out must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_error("expression is not valid utf-8");
        return ProdkitStatus::InvalidUtf8;
    };
    let out = &mut *out;
    guarded(AssertUnwindSafe(|| {
        match PosSeq::from_expr_str(text).and_then(|s| s.with_origin(origin)) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(ProdkitSeq { inner: seq }));
                ProdkitStatus::Ok
            }
            Err(e) => fail(e),
        }
    }))
}

/// Build a sequence from an explicit array of positive values (origin 1).
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn prodkit_seq_from_values(
    values: *const f64,
    len: usize,
    out: *mut *mut ProdkitSeq,
) -> ProdkitStatus {
    if values.is_null() || out.is_null() {
        set_error("values and out must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let slice = std::slice::from_raw_parts(values, len);
    let out = &mut *out;
    guarded(AssertUnwindSafe(|| {
        match PosSeq::from_values(slice.to_vec()) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(ProdkitSeq { inner: seq }));
                ProdkitStatus::Ok
            }
            Err(e) => fail(e),
        }
    }))
}

/// Free a sequence handle. NULL is a no-op.
///
/// # Safety
/// `seq` must have been returned by a prodkit constructor and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn prodkit_seq_free(seq: *mut ProdkitSeq) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Evaluate the `n`-th factor.
///
/// # Safety
/// `seq` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn prodkit_seq_term(
    seq: *const ProdkitSeq,
    n: u64,
    value: *mut f64,
) -> ProdkitStatus {
    if seq.is_null() || value.is_null() {
        set_error("seq and value must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let value = &mut *value;
    guarded(AssertUnwindSafe(|| match seq.inner.term(n) {
        Ok(v) => {
            *value = v;
            ProdkitStatus::Ok
        }
        Err(e) => fail(e),
    }))
}

/// Evaluate `log a_n`.
///
/// # Safety
/// `seq` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn prodkit_seq_log_term(
    seq: *const ProdkitSeq,
    n: u64,
    value: *mut f64,
) -> ProdkitStatus {
    if seq.is_null() || value.is_null() {
        set_error("seq and value must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let value = &mut *value;
    guarded(AssertUnwindSafe(|| match seq.inner.log_term(n) {
        Ok(v) => {
            *value = v;
            ProdkitStatus::Ok
        }
        Err(e) => fail(e),
    }))
}

/// Multiplicative absolute value `max(x, 1/x)` of a positive real.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prodkit_mmod(x: f64, value: *mut f64) -> ProdkitStatus {
    if value.is_null() {
        set_error("value must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let value = &mut *value;
    match PositiveReal::new(x) {
        Ok(p) => {
            *value = mmod(p);
            ProdkitStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Multiplicative positive/negative parts of a positive real:
/// `p/q = x` and `p*q = mmod(x)`.
///
/// # Safety
/// `p` and `q` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prodkit_mparts(x: f64, p: *mut f64, q: *mut f64) -> ProdkitStatus {
    if p.is_null() || q.is_null() {
        set_error("p and q must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let (pp, qq) = match PositiveReal::new(x) {
        Ok(v) => mparts(v),
        Err(e) => return fail(e),
    };
    *p = pp;
    *q = qq;
    ProdkitStatus::Ok
}

fn params_from(eps: f64, n_max: u64, window: u64) -> Result<AnalysisParams, Error> {
    let window = if window == 0 {
        (n_max / 2).max(1)
    } else {
        window
    };
    AnalysisParams::new(eps, n_max, window, Precision::from_env())
}

fn to_json_out(
    out: &mut *mut c_char,
    value: impl serde::Serialize,
) -> ProdkitStatus {
    match serde_json::to_string(&value) {
        Ok(json) => match CString::new(json) {
            Ok(s) => {
                *out = s.into_raw();
                ProdkitStatus::Ok
            }
            Err(_) => {
                set_error("report contained an interior NUL");
                ProdkitStatus::InternalError
            }
        },
        Err(e) => {
            set_error(format!("serialization failed: {e}"));
            ProdkitStatus::InternalError
        }
    }
}

/// Convergence verdict for `prod a_n` as a JSON document
/// `{"kind","limit_estimate","liminf","limsup","n_used","eps","evidence"}`.
/// `window = 0` selects the default trailing window of `n_max / 2`.
///
/// # Safety
/// `seq` must be a live handle and `out_json` writable; free the result
/// with `prodkit_string_free`.
#[no_mangle]
pub unsafe extern "C" fn prodkit_analyze_json(
    seq: *const ProdkitSeq,
    eps: f64,
    n_max: u64,
    window: u64,
    out_json: *mut *mut c_char,
) -> ProdkitStatus {
    if seq.is_null() || out_json.is_null() {
        set_error("seq and out_json must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let out = &mut *out_json;
    guarded(AssertUnwindSafe(|| {
        let params = match params_from(eps, n_max, window) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match accum::estimate_convergence(&seq.inner, &params) {
            Ok(v) => to_json_out(out, v),
            Err(e) => fail(e),
        }
    }))
}

/// Verdict and sandwich report for `prod mmod(a_n)`, as JSON.
///
/// # Safety
/// As for `prodkit_analyze_json`.
#[no_mangle]
pub unsafe extern "C" fn prodkit_m_absolute_json(
    seq: *const ProdkitSeq,
    eps: f64,
    n_max: u64,
    window: u64,
    out_json: *mut *mut c_char,
) -> ProdkitStatus {
    if seq.is_null() || out_json.is_null() {
        set_error("seq and out_json must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let out = &mut *out_json;
    guarded(AssertUnwindSafe(|| {
        let params = match params_from(eps, n_max, window) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match accum::m_absolute_verdict(&seq.inner, &params) {
            Ok(v) => to_json_out(out, v),
            Err(e) => fail(e),
        }
    }))
}

/// Double-double oracle comparison report, as JSON.
///
/// # Safety
/// As for `prodkit_analyze_json`.
#[no_mangle]
pub unsafe extern "C" fn prodkit_oracle_compare_json(
    seq: *const ProdkitSeq,
    eps: f64,
    n_max: u64,
    window: u64,
    out_json: *mut *mut c_char,
) -> ProdkitStatus {
    if seq.is_null() || out_json.is_null() {
        set_error("seq and out_json must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let out = &mut *out_json;
    guarded(AssertUnwindSafe(|| {
        let params = match params_from(eps, n_max, window) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match accum::oracle_compare(&seq.inner, &params) {
            Ok(v) => to_json_out(out, v),
            Err(e) => fail(e),
        }
    }))
}

/// Least index `n0` past which every tail product of mmod factors stays
/// within `eps` of 1 (the uniform bound for exponent families and
/// subproducts). Fails with a precondition status when the horizon is
/// exhausted first.
///
/// # Safety
/// `seq` must be a live handle and `out_n0` writable.
#[no_mangle]
pub unsafe extern "C" fn prodkit_uniform_tail_n0(
    seq: *const ProdkitSeq,
    eps: f64,
    horizon: u64,
    out_n0: *mut u64,
) -> ProdkitStatus {
    if seq.is_null() || out_n0.is_null() {
        set_error("seq and out_n0 must be non-null");
        return ProdkitStatus::NullArgument;
    }
    let seq = &*seq;
    let out = &mut *out_n0;
    guarded(AssertUnwindSafe(|| {
        match rearrange::uniform_tail_bound(&seq.inner, eps, horizon) {
            Ok(report) => match report.n0 {
                Some(n0) => {
                    *out = n0;
                    ProdkitStatus::Ok
                }
                None => {
                    set_error(report.note);
                    ProdkitStatus::PreconditionError
                }
            },
            Err(e) => fail(e),
        }
    }))
}
