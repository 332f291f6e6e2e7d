//! C ABI over `selinf`.
//!
//! Systems are opaque handles created from JSON text. Every call returns a
//! [`SelinfStatus`]; on failure a message is available from
//! [`selinf_last_error`] until the next call on the same thread. Reports
//! come back as JSON strings owned by the caller and released with
//! [`selinf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use selinf::gauss::binormal_order_distance;
use selinf::jdc::{fine_inequalities, jdc_feasible, verify_order_chain_identity, JdcError, JdcOptions, JdcReport};
use selinf::metrics::MetricConfig;
use selinf::probspace::{load_system_str, LoadError, LoadOptions, System, DEFAULT_EPS_SUM};
use selinf::report::to_json;
use selinf::selectivity::{default_order_metrics, run_suite, EnumerationOptions, NamedMetric, SelectivityError, SuiteOptions};
use selinf::Arithmetic;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelinfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidSystem = 4,
    MetricError = 5,
    InvalidArgument = 6,
    TooLarge = 7,
    NumericalInstability = 8,
    Panic = 9,
}

/// Arithmetic used when reading probabilities.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelinfArithmetic {
    Auto = 0,
    Rational = 1,
    Float = 2,
}

impl From<SelinfArithmetic> for Arithmetic {
    fn from(a: SelinfArithmetic) -> Self {
        match a {
            SelinfArithmetic::Auto => Arithmetic::Auto,
            SelinfArithmetic::Rational => Arithmetic::Rational,
            SelinfArithmetic::Float => Arithmetic::Float,
        }
    }
}

/// A validated system.
pub struct SelinfSystem {
    system: System,
    arithmetic: Arithmetic,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Failure = (SelinfStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SelinfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SelinfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SelinfStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((SelinfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SelinfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (SelinfStatus::InvalidArgument, "report contains a NUL byte".to_string()))
}

fn load_failure(e: LoadError) -> Failure {
    let status = match e {
        LoadError::Parse { .. } => SelinfStatus::ParseError,
        _ => SelinfStatus::InvalidSystem,
    };
    (status, e.to_string())
}

fn jdc_failure(e: JdcError) -> Failure {
    let status = match e {
        JdcError::HiddenSpaceTooLarge { .. } | JdcError::ProblemTooLarge { .. } => SelinfStatus::TooLarge,
        JdcError::NumericalInstability(_) => SelinfStatus::NumericalInstability,
        _ => SelinfStatus::InvalidSystem,
    };
    (status, e.to_string())
}

fn selectivity_failure(e: SelectivityError) -> Failure {
    let status = match e {
        SelectivityError::Metric(_) => SelinfStatus::MetricError,
        SelectivityError::InvalidLength { .. } => SelinfStatus::InvalidArgument,
        _ => SelinfStatus::InvalidSystem,
    };
    (status, e.to_string())
}

/// Parses and validates a system from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` holds a handle to release with [`selinf_system_free`].
#[no_mangle]
pub unsafe extern "C" fn selinf_system_from_json(
    json: *const c_char,
    arithmetic: SelinfArithmetic,
    out: *mut *mut SelinfSystem,
) -> SelinfStatus {
    guard(|| {
        if out.is_null() {
            return Err((SelinfStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let arithmetic: Arithmetic = arithmetic.into();
        let opts = LoadOptions {
            arithmetic,
            eps_sum: DEFAULT_EPS_SUM,
        };
        let system = load_system_str(text, opts).map_err(load_failure)?;
        *out = Box::into_raw(Box::new(SelinfSystem { system, arithmetic }));
        Ok(())
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `system` must come from [`selinf_system_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn selinf_system_free(system: *mut SelinfSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Whether the system's probabilities are exact rationals.
///
/// # Safety
/// `system` must be a live handle or null (reported as not exact).
#[no_mangle]
pub unsafe extern "C" fn selinf_system_is_exact(system: *const SelinfSystem) -> bool {
    system.as_ref().is_some_and(|s| s.system.is_exact())
}

unsafe fn handle<'a>(system: *const SelinfSystem) -> Result<&'a SelinfSystem, Failure> {
    system
        .as_ref()
        .ok_or_else(|| (SelinfStatus::NullPointer, "system is null".to_string()))
}

/// Runs marginal selectivity and the chain-inequality suite. `metrics_json`
/// is one metric or a list; null selects the default order-distances.
/// `max_len` of 0 selects the default. `*passed` is set when no
/// violation was found and marginal selectivity holds.
///
/// # Safety
/// `system` must be a live handle, `metrics_json` null or a NUL-terminated
/// string, `out_json` valid; `passed` may be null.
#[no_mangle]
pub unsafe extern "C" fn selinf_check(
    system: *const SelinfSystem,
    metrics_json: *const c_char,
    max_len: u32,
    passed: *mut bool,
    out_json: *mut *mut c_char,
) -> SelinfStatus {
    guard(|| {
        if out_json.is_null() {
            return Err((SelinfStatus::NullPointer, "out_json is null".into()));
        }
        *out_json = ptr::null_mut();
        let h = handle(system)?;
        let metrics: Vec<NamedMetric> = if metrics_json.is_null() {
            default_order_metrics(&h.system)
        } else {
            let text = read_str(metrics_json, "metrics_json")?;
            let cfgs = MetricConfig::list_from_json(text).map_err(|e| (SelinfStatus::MetricError, e.to_string()))?;
            cfgs.iter()
                .enumerate()
                .map(|(k, c)| {
                    let m = c.build(h.arithmetic)?;
                    let name = c.label().map(str::to_string).unwrap_or_else(|| format!("metric{}", k + 1));
                    Ok(NamedMetric::new(name, m))
                })
                .collect::<Result<_, selinf::metrics::MetricError>>()
                .map_err(|e| (SelinfStatus::MetricError, e.to_string()))?
        };
        let mut opts = SuiteOptions::default();
        if max_len != 0 {
            opts.enumeration = EnumerationOptions::with_max_len(max_len as usize);
        }
        let report = run_suite(&h.system, &metrics, opts).map_err(selectivity_failure)?;
        if !passed.is_null() {
            *passed = report.passed();
        }
        *out_json = into_c_string(to_json(&report))?;
        Ok(())
    })
}

/// Decides the joint distribution criterion. `*feasible` receives the
/// verdict; the JSON report holds the witness or certificate.
///
/// # Safety
/// `system` must be a live handle and `out_json` valid; `feasible` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn selinf_jdc(
    system: *const SelinfSystem,
    feasible: *mut bool,
    out_json: *mut *mut c_char,
) -> SelinfStatus {
    guard(|| {
        if out_json.is_null() {
            return Err((SelinfStatus::NullPointer, "out_json is null".into()));
        }
        *out_json = ptr::null_mut();
        let h = handle(system)?;
        let (problem, result) = jdc_feasible(&h.system, JdcOptions::default()).map_err(jdc_failure)?;
        let mut report = JdcReport::new(&h.system, &problem, &result);
        if let Ok(f) = fine_inequalities(&h.system, DEFAULT_EPS_SUM) {
            report.fine = Some(f);
            report.chain_identity_max_discrepancy =
                Some(verify_order_chain_identity(&h.system, DEFAULT_EPS_SUM).map_err(jdc_failure)?);
        }
        if !feasible.is_null() {
            *feasible = report.feasible;
        }
        *out_json = into_c_string(to_json(&report))?;
        Ok(())
    })
}

/// `Pr[A < 0, B >= 0]` for standard bivariate normal outputs with
/// correlation `rho`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn selinf_binormal_order_distance(rho: f64, out: *mut f64) -> SelinfStatus {
    guard(|| {
        if out.is_null() {
            return Err((SelinfStatus::NullPointer, "out is null".into()));
        }
        *out = binormal_order_distance(rho).map_err(|e| (SelinfStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn selinf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn selinf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn selinf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
