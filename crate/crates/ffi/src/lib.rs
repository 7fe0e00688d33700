//! C ABI for the combicheck workbench.
//!
//! Conventions: opaque handles (`CcOracle`, `CcTheory`) own their Rust
//! values and must be released with the matching `_free` function; strings
//! returned through out-parameters are heap-allocated UTF-8 and must be
//! released with `cc_string_free`; every fallible call returns a `CcStatus`
//! and leaves a message retrievable via `cc_last_error` on failure.
//! Three-valued answers map sat/holds to `CC_OK`, unsat/refuted to
//! `CC_UNSAT`, and oracle-limited outcomes to `CC_UNKNOWN`.

use combicheck::catalog;
use combicheck::corpus::Corpus;
use combicheck::decide::{self, Bounds, MincardResult, SatResult};
use combicheck::formula::{parse_declarations, parse_formula_with_decls, QfFormula};
use combicheck::oracle::{GrowthOracle, SigmaValue};
use combicheck::props::{check_property, CheckMode, Property};
use combicheck::spectrum::TheorySpec;
use combicheck::table::{self, TableRunParams};
use combicheck::three::ThreeVal;
use combicheck::witness::{verify_strong_witness, verify_witness};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

/// Opaque growth-oracle handle.
pub struct CcOracle {
    inner: Arc<GrowthOracle>,
}

/// Opaque theory handle.
pub struct CcTheory {
    inner: TheorySpec,
}

/// Status codes shared by all calls.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    /// success; for decision queries: sat / entailed / property holds
    CcOk = 0,
    /// definite negative: unsat / not entailed / property fails
    CcUnsat = 1,
    /// inconclusive: the growth oracle cannot decide
    CcUnknown = 2,
    /// invalid input or internal error; see cc_last_error
    CcErr = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) -> CcStatus {
    let msg = msg.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).ok();
    });
    CcStatus::CcErr
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn r_str<'a>(ptr: *const c_char) -> Result<&'a str, CcStatus> {
    if ptr.is_null() {
        return Err(set_error("null string argument"));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| set_error("invalid UTF-8"))
}

/// Last error message of this thread, or null. The returned string must be
/// freed with `cc_string_free`.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

/// The default growth oracle: known prefix 0, 1, 4, 6, 13 and the published
/// lower bound for the next value.
#[no_mangle]
pub extern "C" fn cc_oracle_default() -> *mut CcOracle {
    Box::into_raw(Box::new(CcOracle { inner: Arc::new(GrowthOracle::default()) }))
}

/// An oracle extended from JSON (`{"known": [[5, 4098]]}`). Null on error.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cc_oracle_from_json(json: *const c_char) -> *mut CcOracle {
    let Ok(src) = (unsafe { r_str(json) }) else { return std::ptr::null_mut() };
    match GrowthOracle::from_json(src) {
        Ok(o) => Box::into_raw(Box::new(CcOracle { inner: Arc::new(o) })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `oracle` must be null or a pointer from `cc_oracle_default`/`cc_oracle_from_json`.
#[no_mangle]
pub unsafe extern "C" fn cc_oracle_free(oracle: *mut CcOracle) {
    if !oracle.is_null() {
        drop(unsafe { Box::from_raw(oracle) });
    }
}

/// Growth function value: `CC_OK` with the value in `*out`, or `CC_UNKNOWN`
/// with the best lower bound in `*out`.
///
/// # Safety
/// `oracle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cc_sigma(oracle: *const CcOracle, n: u64, out: *mut u64) -> CcStatus {
    if oracle.is_null() || out.is_null() {
        return set_error("null argument");
    }
    match unsafe { &*oracle }.inner.sigma(n) {
        SigmaValue::Value(v) => {
            unsafe { *out = v };
            CcStatus::CcOk
        }
        SigmaValue::Unknown { lower_bound } => {
            unsafe { *out = lower_bound };
            CcStatus::CcUnknown
        }
    }
}

/// Left inverse of the growth function: `CC_OK` with the value, or
/// `CC_UNKNOWN` when the argument exceeds the decidable range.
///
/// # Safety
/// `oracle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cc_sigma_inv(oracle: *const CcOracle, k: u64, out: *mut u64) -> CcStatus {
    if oracle.is_null() || out.is_null() {
        return set_error("null argument");
    }
    match unsafe { &*oracle }.inner.sigma_inv(k) {
        Some(v) => {
            unsafe { *out = v };
            CcStatus::CcOk
        }
        None => CcStatus::CcUnknown,
    }
}

// ---------------------------------------------------------------------------
// Theories
// ---------------------------------------------------------------------------

/// Builds a catalog theory, optionally with operator suffixes:
/// `"T_geq:2"`, `"T_23+fn"`, `"T_sigma+sort+vee"`. Null on error.
///
/// # Safety
/// Pointers must be valid; `name` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_theory_get(
    oracle: *const CcOracle,
    name: *const c_char,
) -> *mut CcTheory {
    if oracle.is_null() {
        set_error("null oracle");
        return std::ptr::null_mut();
    }
    let Ok(name) = (unsafe { r_str(name) }) else { return std::ptr::null_mut() };
    let mut parts = name.split('+');
    let base = parts.next().unwrap();
    let ops: Vec<String> = parts.map(|s| s.to_string()).collect();
    match table::build_cell_theory(base, &ops, &unsafe { &*oracle }.inner) {
        Ok(spec) => Box::into_raw(Box::new(CcTheory { inner: spec })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Loads a theory from the published JSON format. Null on error.
///
/// # Safety
/// Pointers must be valid; `json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_theory_from_json(
    oracle: *const CcOracle,
    json: *const c_char,
) -> *mut CcTheory {
    if oracle.is_null() {
        set_error("null oracle");
        return std::ptr::null_mut();
    }
    let Ok(src) = (unsafe { r_str(json) }) else { return std::ptr::null_mut() };
    match TheorySpec::from_json(src, &unsafe { &*oracle }.inner) {
        Ok(spec) => Box::into_raw(Box::new(CcTheory { inner: spec })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `theory` must be null or a pointer from a `cc_theory_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn cc_theory_free(theory: *mut CcTheory) {
    if !theory.is_null() {
        drop(unsafe { Box::from_raw(theory) });
    }
}

/// Serializes the theory to its JSON format. Free with `cc_string_free`.
///
/// # Safety
/// `theory` must be a valid theory handle.
#[no_mangle]
pub unsafe extern "C" fn cc_theory_to_json(theory: *const CcTheory) -> *mut c_char {
    if theory.is_null() {
        set_error("null theory");
        return std::ptr::null_mut();
    }
    c_string(unsafe { &*theory }.inner.to_json().to_string())
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

fn parse_source(spec: &TheorySpec, src: &str) -> Result<QfFormula, String> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('(') {
        parse_formula_with_decls(src, spec.sig, &BTreeMap::new()).map_err(|e| e.to_string())
    } else {
        let mut lines = src.splitn(2, '\n');
        let header = lines.next().unwrap_or("");
        let body = lines.next().unwrap_or("");
        let decls = parse_declarations(header, spec.sig).map_err(|e| e.to_string())?;
        parse_formula_with_decls(body, spec.sig, &decls).map_err(|e| e.to_string())
    }
}

/// Decides satisfiability. The formula source is an optional declaration
/// header (`x:sigma, u:sigma2`) followed by an s-expression. On `CC_OK` a
/// JSON result (witness measure and model, when finite) is stored in
/// `*result_json` unless it is null.
///
/// # Safety
/// Pointers must be valid; `formula` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_sat(
    theory: *const CcTheory,
    formula: *const c_char,
    domain_bound: u64,
    result_json: *mut *mut c_char,
) -> CcStatus {
    if theory.is_null() {
        return set_error("null theory");
    }
    let spec = &unsafe { &*theory }.inner;
    let Ok(src) = (unsafe { r_str(formula) }) else { return CcStatus::CcErr };
    let phi = match parse_source(spec, src) {
        Ok(f) => f,
        Err(e) => return set_error(e),
    };
    let bounds = Bounds { domain: domain_bound.max(1), ..Bounds::default() };
    match decide::satisfiable(spec, &phi, &bounds) {
        Ok(result) => {
            if !result_json.is_null() {
                let json = serde_json::to_string(&result).unwrap_or_default();
                unsafe { *result_json = c_string(json) };
            }
            match result {
                SatResult::Sat { .. } => CcStatus::CcOk,
                SatResult::Unsat => CcStatus::CcUnsat,
                SatResult::Unknown { .. } => CcStatus::CcUnknown,
            }
        }
        Err(e) => set_error(e.to_string()),
    }
}

/// Entailment of `psi` by `phi` in the theory.
///
/// # Safety
/// Pointers must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cc_entails(
    theory: *const CcTheory,
    phi: *const c_char,
    psi: *const c_char,
    domain_bound: u64,
) -> CcStatus {
    if theory.is_null() {
        return set_error("null theory");
    }
    let spec = &unsafe { &*theory }.inner;
    let (Ok(phi_src), Ok(psi_src)) = (unsafe { r_str(phi) }, unsafe { r_str(psi) }) else {
        return CcStatus::CcErr;
    };
    let (phi, psi) = match (parse_source(spec, phi_src), parse_source(spec, psi_src)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return set_error(e),
    };
    let bounds = Bounds { domain: domain_bound.max(1), ..Bounds::default() };
    match decide::entails(spec, &phi, &psi, &bounds) {
        Ok(ThreeVal::True) => CcStatus::CcOk,
        Ok(ThreeVal::False) => CcStatus::CcUnsat,
        Ok(ThreeVal::Unknown) => CcStatus::CcUnknown,
        Err(e) => set_error(e.to_string()),
    }
}

/// Minimal measure vectors of a formula, as JSON in `*result_json`.
///
/// # Safety
/// Pointers must be valid; `formula` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_mincard(
    theory: *const CcTheory,
    formula: *const c_char,
    domain_bound: u64,
    result_json: *mut *mut c_char,
) -> CcStatus {
    if theory.is_null() {
        return set_error("null theory");
    }
    let spec = &unsafe { &*theory }.inner;
    let Ok(src) = (unsafe { r_str(formula) }) else { return CcStatus::CcErr };
    let phi = match parse_source(spec, src) {
        Ok(f) => f,
        Err(e) => return set_error(e),
    };
    let bounds = Bounds { domain: domain_bound.max(1), ..Bounds::default() };
    match decide::mincard(spec, &phi, &bounds) {
        Ok(result) => {
            if !result_json.is_null() {
                let json = serde_json::to_string(&result).unwrap_or_default();
                unsafe { *result_json = c_string(json) };
            }
            match result {
                MincardResult::Vectors(_) => CcStatus::CcOk,
                MincardResult::Unsat => CcStatus::CcUnsat,
                MincardResult::Unknown { .. } => CcStatus::CcUnknown,
            }
        }
        Err(e) => set_error(e.to_string()),
    }
}

/// Checks one combination property (`"SI"`, `"SM"`, `"CV"`, `"FM"`, `"SF"`;
/// positive `"FW"`/`"SW"` via the theory's catalog witness). The check
/// report is stored as JSON in `*report_json` unless null.
///
/// # Safety
/// Pointers must be valid; `prop` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_check_property(
    theory: *const CcTheory,
    prop: *const c_char,
    report_json: *mut *mut c_char,
) -> CcStatus {
    if theory.is_null() {
        return set_error("null theory");
    }
    let spec = &unsafe { &*theory }.inner;
    let Ok(prop_name) = (unsafe { r_str(prop) }) else { return CcStatus::CcErr };
    let bounds = Bounds::default();
    let verdict_status = |v: ThreeVal| match v {
        ThreeVal::True => CcStatus::CcOk,
        ThreeVal::False => CcStatus::CcUnsat,
        ThreeVal::Unknown => CcStatus::CcUnknown,
    };
    let (verdict, json) = match prop_name {
        "SI" | "SM" | "FM" | "SF" => {
            let p = match prop_name {
                "SI" => Property::Si,
                "SM" => Property::Sm,
                "FM" => Property::Fm,
                _ => Property::Sf,
            };
            let report = check_property(spec, p, CheckMode::ExactSpectrum, &bounds);
            (report.verdict, serde_json::to_string(&report).unwrap_or_default())
        }
        "CV" => {
            let report = check_property(spec, Property::Cv, CheckMode::Corpus, &bounds);
            (report.verdict, serde_json::to_string(&report).unwrap_or_default())
        }
        "FW" | "SW" => {
            let strong = prop_name == "SW";
            let base = spec.name.split('(').next_back().unwrap_or(&spec.name);
            let base = base.trim_end_matches(')');
            let wit = match table::cell_witness(base, spec, strong) {
                Ok(w) => w,
                Err(e) => return set_error(e.to_string()),
            };
            let corpus = Corpus::default_for(spec);
            let n = 48.min(corpus.formulas.len());
            let report = if strong {
                verify_strong_witness(spec, &wit, &corpus.formulas[..n], &bounds)
            } else {
                verify_witness(spec, &wit, &corpus.formulas[..n], &bounds)
            };
            (report.verdict, serde_json::to_string(&report).unwrap_or_default())
        }
        other => return set_error(format!("unknown property `{other}`")),
    };
    if !report_json.is_null() {
        unsafe { *report_json = c_string(json) };
    }
    verdict_status(verdict)
}

/// Runs the full taxonomy-table reproduction. `CC_OK` on PASS, `CC_UNSAT`
/// on mismatches; the report is stored as JSON in `*report_json` unless
/// null.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_table(
    oracle: *const CcOracle,
    report_json: *mut *mut c_char,
) -> CcStatus {
    if oracle.is_null() {
        return set_error("null oracle");
    }
    let report =
        table::reproduce_table(&unsafe { &*oracle }.inner, &TableRunParams::default());
    if !report_json.is_null() {
        let json = serde_json::to_string(&report).unwrap_or_default();
        unsafe { *report_json = c_string(json) };
    }
    if report.pass {
        CcStatus::CcOk
    } else {
        CcStatus::CcUnsat
    }
}

/// Number of catalog theory families.
#[no_mangle]
pub extern "C" fn cc_catalog_len() -> usize {
    catalog::list_families().len()
}

/// Name of the i-th catalog family. Free with `cc_string_free`.
#[no_mangle]
pub extern "C" fn cc_catalog_name(i: usize) -> *mut c_char {
    match catalog::list_families().get(i) {
        Some(info) => c_string(info.alias.to_string()),
        None => std::ptr::null_mut(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn oracle_round_trip() {
        let o = cc_oracle_default();
        let mut out = 0u64;
        unsafe {
            assert_eq!(cc_sigma(o, 4, &mut out) as i32, CcStatus::CcOk as i32);
            assert_eq!(out, 13);
            assert_eq!(cc_sigma(o, 5, &mut out) as i32, CcStatus::CcUnknown as i32);
            assert_eq!(out, 4098);
            assert_eq!(cc_sigma_inv(o, 4097, &mut out) as i32, CcStatus::CcOk as i32);
            assert_eq!(out, 4);
            assert_eq!(cc_sigma_inv(o, 4098, &mut out) as i32, CcStatus::CcUnknown as i32);
            cc_oracle_free(o);
        }
    }

    #[test]
    fn sat_through_the_abi() {
        unsafe {
            let o = cc_oracle_default();
            let t = cc_theory_get(o, cstr("T_leq:1").as_ptr());
            assert!(!t.is_null());
            let mut json: *mut c_char = std::ptr::null_mut();
            let status = cc_sat(t, cstr("(not (= x y))").as_ptr(), 4, &mut json);
            assert_eq!(status as i32, CcStatus::CcUnsat as i32);
            cc_string_free(json);
            let status = cc_sat(t, cstr("(= x y)").as_ptr(), 4, &mut json);
            assert_eq!(status as i32, CcStatus::CcOk as i32);
            let s = CStr::from_ptr(json).to_str().unwrap();
            assert!(s.contains("witness"));
            cc_string_free(json);
            cc_theory_free(t);
            cc_oracle_free(o);
        }
    }

    #[test]
    fn bad_inputs_set_errors() {
        unsafe {
            let o = cc_oracle_default();
            let t = cc_theory_get(o, cstr("T_nonsense").as_ptr());
            assert!(t.is_null());
            let err = cc_last_error();
            assert!(!err.is_null());
            let msg = CStr::from_ptr(err).to_str().unwrap().to_string();
            assert!(msg.contains("T_nonsense"), "{msg}");
            cc_string_free(err);
            cc_oracle_free(o);
        }
    }

    #[test]
    fn theory_json_round_trip() {
        unsafe {
            let o = cc_oracle_default();
            let t = cc_theory_get(o, cstr("T_23").as_ptr());
            let json = cc_theory_to_json(t);
            let src = CStr::from_ptr(json).to_str().unwrap().to_string();
            let t2 = cc_theory_from_json(o, cstr(&src).as_ptr());
            assert!(!t2.is_null());
            // same satisfiability behavior through the round trip
            let phi = cstr("x:sigma, y:sigma\n(not (= x y))");
            let a = cc_sat(t, phi.as_ptr(), 4, std::ptr::null_mut());
            let b = cc_sat(t2, phi.as_ptr(), 4, std::ptr::null_mut());
            assert_eq!(a as i32, b as i32);
            cc_string_free(json);
            cc_theory_free(t);
            cc_theory_free(t2);
            cc_oracle_free(o);
        }
    }

    #[test]
    fn entailment_and_property_checks() {
        unsafe {
            let o = cc_oracle_default();
            let t = cc_theory_get(o, cstr("T_BB_vee").as_ptr());
            let cube = cstr("(and (= y (s x)) (= z (s y)))");
            let disj = cstr("(or (= x z) (= y z))");
            assert_eq!(cc_entails(t, cube.as_ptr(), disj.as_ptr(), 4) as i32, CcStatus::CcOk as i32);
            let mut json: *mut c_char = std::ptr::null_mut();
            let status = cc_check_property(t, cstr("SM").as_ptr(), &mut json);
            assert_eq!(status as i32, CcStatus::CcOk as i32);
            cc_string_free(json);
            let status = cc_check_property(t, cstr("CV").as_ptr(), std::ptr::null_mut());
            assert_eq!(status as i32, CcStatus::CcUnsat as i32);
            cc_theory_free(t);
            cc_oracle_free(o);
        }
    }
}
