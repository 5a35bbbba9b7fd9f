use std::ffi::{CStr, CString};
use std::ptr;

use diagonal_ffi::*;
use serde_json::Value;

const CENTRAL: &str = r#"{"variables": ["x1", "x2"], "rational": {"num": [["1", [0, 0]]],
    "den": [["1", [0, 0]], ["-1", [1, 0]], ["-1", [0, 1]]]}}"#;

fn system(json: &str) -> (DfdStatus, *mut DfdSystem) {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { dfd_system_from_json(c.as_ptr(), &mut out) };
    (st, out)
}

fn take(rep: *mut DfdReport) -> (Value, bool) {
    unsafe {
        let s = CStr::from_ptr(dfd_report_json(rep)).to_str().unwrap().to_string();
        let passed = dfd_report_passed(rep) == 1;
        dfd_report_free(rep);
        (serde_json::from_str(&s).unwrap(), passed)
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dfd_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn system_round_trip_and_oracle() {
    let (st, sys) = system(CENTRAL);
    assert_eq!(st, DfdStatus::Ok);
    assert_eq!(unsafe { dfd_system_num_vars(sys) }, 2);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { dfd_oracle(sys, DfdMode::Complete, 4, &mut rep) }, DfdStatus::Ok);
    let (v, _) = take(rep);
    let vals: Vec<&str> = v["coefficients"].as_array().unwrap().iter().map(|t| t[1].as_str().unwrap()).collect();
    assert_eq!(vals, ["1", "2", "6", "20", "70"]);
    unsafe { dfd_system_free(sys) };
}

#[test]
fn diag_both_pipelines() {
    let (_, sys) = system(CENTRAL);
    for pipeline in [DfdPipeline::Lipshitz, DfdPipeline::Gessel] {
        let mut opts = dfd_diag_options_default();
        opts.pipeline = pipeline;
        opts.trunc = 30;
        let mut rep = ptr::null_mut();
        assert_eq!(unsafe { dfd_diag(sys, &opts, &mut rep) }, DfdStatus::Ok, "{}", last_error());
        let (v, passed) = take(rep);
        assert!(passed);
        assert_eq!(v["verification"]["verdict"], "pass");
    }
    unsafe { dfd_system_free(sys) };
}

#[test]
fn verify_detects_wrong_operator() {
    let (_, sys) = system(CENTRAL);
    let mut rep = ptr::null_mut();
    unsafe { dfd_oracle(sys, DfdMode::Complete, 10, &mut rep) };
    let (series, _) = take(rep);
    let series = CString::new(series.to_string()).unwrap();
    let good = CString::new(
        r#"{"variables": ["t"], "operator": [[[["4", [1]], ["-1", [0]]], [1]], [[["2", [0]]], [0]]]}"#,
    )
    .unwrap();
    let bad = CString::new(r#"{"variables": ["t"], "operator": [[[["1", [0]]], [1]]]}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dfd_verify(good.as_ptr(), series.as_ptr(), &mut out) }, DfdStatus::Ok);
    assert!(take(out).1);
    assert_eq!(unsafe { dfd_verify(bad.as_ptr(), series.as_ptr(), &mut out) }, DfdStatus::Ok);
    let (v, passed) = take(out);
    assert!(!passed);
    assert_eq!(v["verdict"], "fail");
    unsafe { dfd_system_free(sys) };
}

#[test]
fn bounds_entry_points() {
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { dfd_bounds_primary(1, 1, 1, 1, &mut rep) }, DfdStatus::Ok);
    let (v, _) = take(rep);
    assert_eq!(v["outputs"]["N"], 12);
    assert_eq!(v["outputs"]["deg_bound"], 5256);
    let d = [1u32, 1, 1];
    assert_eq!(unsafe { dfd_bounds_complete(3, d.as_ptr(), d.as_ptr(), &mut rep) }, DfdStatus::Ok);
    assert_eq!(take(rep).0["outputs"]["N_prime_raw"], 29791);
    assert_eq!(unsafe { dfd_bounds_iterated(2, &mut rep) }, DfdStatus::Ok);
    assert_eq!(take(rep).0["outputs"]["v"], 63);
}

#[test]
fn error_paths() {
    let (st, sys) = system("{not json");
    assert_eq!(st, DfdStatus::Parse);
    assert!(sys.is_null());
    assert!(!last_error().is_empty());
    let (st, _) = system(r#"{"variables": ["x"], "rational": {"num": [["1", [0]]], "den": [["1", [1]]]}}"#);
    assert_eq!(st, DfdStatus::InvalidSystem);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dfd_system_from_json(ptr::null(), &mut out) }, DfdStatus::NullPointer);
    let opts = dfd_diag_options_default();
    assert_eq!(unsafe { dfd_diag(ptr::null(), &opts, &mut ptr::null_mut()) }, DfdStatus::NullPointer);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { dfd_bounds_primary(1, 1, 0, 1, &mut rep) }, DfdStatus::InvalidArgument);
    unsafe {
        dfd_report_free(ptr::null_mut());
        dfd_system_free(ptr::null_mut());
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(dfd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
