//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers, status codes, and library-owned strings.

use std::ffi::{CStr, CString};
use std::ptr;

use prodkit_ffi::*;

fn parse(text: &str, origin: u64) -> *mut ProdkitSeq {
    let text = CString::new(text).unwrap();
    let mut handle: *mut ProdkitSeq = ptr::null_mut();
    let status = unsafe { prodkit_seq_parse(text.as_ptr(), origin, &mut handle) };
    assert_eq!(status, ProdkitStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { prodkit_string_free(s) };
    owned
}

#[test]
fn abi_version_is_exported() {
    assert_eq!(prodkit_abi_version(), 1);
}

#[test]
fn seq_lifecycle_and_term_evaluation() {
    let seq = parse("1 + 1/n", 1);
    let mut v = 0.0f64;
    assert_eq!(unsafe { prodkit_seq_term(seq, 1, &mut v) }, ProdkitStatus::Ok);
    assert_eq!(v, 2.0);
    assert_eq!(unsafe { prodkit_seq_log_term(seq, 1, &mut v) }, ProdkitStatus::Ok);
    assert!((v - 2.0f64.ln()).abs() < 1e-15);
    unsafe { prodkit_seq_free(seq) };
}

#[test]
fn parse_errors_carry_detail() {
    let text = CString::new("exp(1/n^").unwrap();
    let mut handle: *mut ProdkitSeq = ptr::null_mut();
    let status = unsafe { prodkit_seq_parse(text.as_ptr(), 1, &mut handle) };
    assert_eq!(status, ProdkitStatus::ParseError);
    assert!(handle.is_null());
    let msg = take_string(prodkit_last_error_message());
    assert!(msg.contains("offset 8"), "message: {msg}");
}

#[test]
fn null_arguments_are_rejected() {
    let mut v = 0.0f64;
    assert_eq!(
        unsafe { prodkit_seq_term(ptr::null(), 1, &mut v) },
        ProdkitStatus::NullArgument
    );
    let mut handle: *mut ProdkitSeq = ptr::null_mut();
    assert_eq!(
        unsafe { prodkit_seq_parse(ptr::null(), 1, &mut handle) },
        ProdkitStatus::NullArgument
    );
}

#[test]
fn eval_error_surfaces_index() {
    let seq = parse("1 - 2/n", 1);
    let mut v = 0.0f64;
    let status = unsafe { prodkit_seq_term(seq, 1, &mut v) };
    assert_eq!(status, ProdkitStatus::EvalError);
    let msg = take_string(prodkit_last_error_message());
    assert!(msg.contains("index 1"), "message: {msg}");
    unsafe { prodkit_seq_free(seq) };
}

#[test]
fn values_constructor_checks_positivity() {
    let good = [2.0f64, 0.5, 3.0];
    let mut handle: *mut ProdkitSeq = ptr::null_mut();
    let status = unsafe { prodkit_seq_from_values(good.as_ptr(), good.len(), &mut handle) };
    assert_eq!(status, ProdkitStatus::Ok);
    unsafe { prodkit_seq_free(handle) };

    let bad = [2.0f64, -1.0];
    let mut handle: *mut ProdkitSeq = ptr::null_mut();
    let status = unsafe { prodkit_seq_from_values(bad.as_ptr(), bad.len(), &mut handle) };
    assert_eq!(status, ProdkitStatus::InvalidInput);
}

#[test]
fn modulus_entry_points() {
    let mut v = 0.0f64;
    assert_eq!(unsafe { prodkit_mmod(0.5, &mut v) }, ProdkitStatus::Ok);
    assert_eq!(v, 2.0);
    assert_eq!(unsafe { prodkit_mmod(-1.0, &mut v) }, ProdkitStatus::DomainError);

    let (mut p, mut q) = (0.0f64, 0.0f64);
    assert_eq!(unsafe { prodkit_mparts(4.0, &mut p, &mut q) }, ProdkitStatus::Ok);
    assert!((p - 4.0).abs() < 1e-12 && (q - 1.0).abs() < 1e-12);
}

#[test]
fn analyze_returns_verdict_json() {
    let seq = parse("exp((-1)^(n+1)/n)", 1);
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { prodkit_analyze_json(seq, 1e-9, 100_000, 0, &mut out) };
    assert_eq!(status, ProdkitStatus::Ok);
    let json = take_string(out);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "Converges");
    let limit = v["limit_estimate"].as_f64().unwrap();
    assert!((limit - 2.0).abs() < 1e-3);
    // the exact report fields named by the wire format
    for key in ["kind", "limit_estimate", "liminf", "limsup", "n_used", "eps", "evidence"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    unsafe { prodkit_seq_free(seq) };
}

#[test]
fn m_absolute_and_oracle_json() {
    let seq = parse("exp((-1)^(n+1)/n^2)", 1);
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { prodkit_m_absolute_json(seq, 1e-9, 50_000, 0, &mut out) },
        ProdkitStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["verdict"]["kind"], "Converges");
    assert_eq!(v["sandwich_ok"], true);

    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { prodkit_oracle_compare_json(seq, 1e-9, 50_000, 0, &mut out) },
        ProdkitStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["kinds_agree"], true);
    unsafe { prodkit_seq_free(seq) };
}

#[test]
fn uniform_tail_bound_round_trip() {
    let seq = parse("exp((-1)^(n+1)/n^2)", 1);
    let mut n0 = 0u64;
    let status = unsafe { prodkit_uniform_tail_n0(seq, 1e-3, 100_000, &mut n0) };
    assert_eq!(status, ProdkitStatus::Ok);
    assert!((900..=1100).contains(&n0), "n0 = {n0}");

    // horizon exhaustion surfaces as a precondition failure
    let harmonic = parse("exp(1/n)", 1);
    let status = unsafe { prodkit_uniform_tail_n0(harmonic, 1e-6, 1000, &mut n0) };
    assert_eq!(status, ProdkitStatus::PreconditionError);
    unsafe {
        prodkit_seq_free(seq);
        prodkit_seq_free(harmonic);
    }
}

#[test]
fn invalid_params_are_reported() {
    let seq = parse("1", 1);
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { prodkit_analyze_json(seq, -1.0, 100, 0, &mut out) };
    assert_eq!(status, ProdkitStatus::InvalidInput);
    unsafe { prodkit_seq_free(seq) };
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/prodkit.h");
    for symbol in [
        "prodkit_abi_version",
        "prodkit_seq_parse",
        "prodkit_seq_from_values",
        "prodkit_seq_free",
        "prodkit_seq_term",
        "prodkit_seq_log_term",
        "prodkit_mmod",
        "prodkit_mparts",
        "prodkit_analyze_json",
        "prodkit_m_absolute_json",
        "prodkit_oracle_compare_json",
        "prodkit_uniform_tail_n0",
        "prodkit_string_free",
        "prodkit_last_error_message",
        "ProdkitSeq",
        "ProdkitStatus",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
