use std::ffi::{CStr, CString};
use std::ptr;

use selinf_ffi::*;

const PRODUCT: &str = include_str!("../../core/data/product.json");
const PR_BOX: &str = include_str!("../../core/data/pr_box.json");

fn load(json: &str, mode: SelinfArithmetic) -> *mut SelinfSystem {
    let text = CString::new(json).unwrap();
    let mut sys = ptr::null_mut();
    let status = unsafe { selinf_system_from_json(text.as_ptr(), mode, &mut sys) };
    assert_eq!(status, SelinfStatus::Ok);
    assert!(!sys.is_null());
    sys
}

fn take(s: *mut std::ffi::c_char) -> serde_json::Value {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { selinf_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

fn last_error() -> String {
    let p = selinf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn product_system_passes_both_tests() {
    let sys = load(PRODUCT, SelinfArithmetic::Auto);
    assert!(unsafe { selinf_system_is_exact(sys) });
    let mut passed = false;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { selinf_check(sys, ptr::null(), 0, &mut passed, &mut out) }, SelinfStatus::Ok);
    assert!(passed);
    let report = take(out);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);

    let mut feasible = false;
    assert_eq!(unsafe { selinf_jdc(sys, &mut feasible, &mut out) }, SelinfStatus::Ok);
    assert!(feasible);
    let report = take(out);
    assert!(report["witness"].is_array());
    assert_eq!(report["fine"]["all_satisfied"], true);
    unsafe { selinf_system_free(sys) };
}

#[test]
fn pr_box_fails_with_certificate_and_violation() {
    let sys = load(PR_BOX, SelinfArithmetic::Auto);
    let metric = CString::new(r#"{"name": "D1", "kind": "order", "ranks": {"0": 1, "1": 2}}"#).unwrap();
    let mut passed = true;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { selinf_check(sys, metric.as_ptr(), 4, &mut passed, &mut out) }, SelinfStatus::Ok);
    assert!(!passed);
    let report = take(out);
    let v = &report["violations"][0];
    assert_eq!(v["metric"], "D1");
    assert_eq!(v["residual_exact"], "-1/2");

    let mut feasible = true;
    assert_eq!(unsafe { selinf_jdc(sys, &mut feasible, &mut out) }, SelinfStatus::Ok);
    assert!(!feasible);
    assert!(take(out)["certificate"].is_array());
    unsafe { selinf_system_free(sys) };
}

#[test]
fn float_mode_is_respected() {
    let sys = load(PRODUCT, SelinfArithmetic::Float);
    assert!(!unsafe { selinf_system_is_exact(sys) });
    unsafe { selinf_system_free(sys) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut sys = ptr::null_mut();
    let bad = CString::new("{ not json").unwrap();
    assert_eq!(
        unsafe { selinf_system_from_json(bad.as_ptr(), SelinfArithmetic::Auto, &mut sys) },
        SelinfStatus::ParseError
    );
    assert!(sys.is_null());
    assert!(last_error().contains("line 1"));

    let unnormalized = PRODUCT.replace("0.56", "0.66");
    let text = CString::new(unnormalized).unwrap();
    assert_eq!(
        unsafe { selinf_system_from_json(text.as_ptr(), SelinfArithmetic::Auto, &mut sys) },
        SelinfStatus::InvalidSystem
    );

    assert_eq!(
        unsafe { selinf_system_from_json(ptr::null(), SelinfArithmetic::Auto, &mut sys) },
        SelinfStatus::NullPointer
    );

    let good = load(PRODUCT, SelinfArithmetic::Auto);
    let metric = CString::new(r#"{"kind": "order", "ranks": {"0": 1}}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { selinf_check(good, metric.as_ptr(), 0, ptr::null_mut(), &mut out) },
        SelinfStatus::MetricError
    );
    assert!(out.is_null());
    assert_eq!(
        unsafe { selinf_check(good, ptr::null(), 2, ptr::null_mut(), &mut out) },
        SelinfStatus::InvalidArgument
    );
    unsafe { selinf_system_free(good) };

    let mut d = 0.0;
    assert_eq!(unsafe { selinf_binormal_order_distance(1.5, &mut d) }, SelinfStatus::InvalidArgument);
    assert_eq!(unsafe { selinf_binormal_order_distance(-1.0, &mut d) }, SelinfStatus::Ok);
    assert!((d - 0.5).abs() < 1e-15);
    assert!(selinf_last_error().is_null());
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        selinf_system_free(ptr::null_mut());
        selinf_string_free(ptr::null_mut());
        assert!(!selinf_system_is_exact(ptr::null()));
    }
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { selinf_jdc(ptr::null(), ptr::null_mut(), &mut out) },
        SelinfStatus::NullPointer
    );
    let v = unsafe { CStr::from_ptr(selinf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
