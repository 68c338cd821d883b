//! C ABI for the crithom library: run scenarios and read back reports
//! through opaque handles with status codes.  The generated header lives in
//! `include/crithom.h`.
//!
//! Ownership: every `CrithomReport*` returned through an out-pointer must
//! be released with `crithom_report_free`.  Strings returned by accessor
//! functions are owned by the report and valid until it is freed.

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crithom::poly::{PolyElement, TruncatedPolyAlgebra};
use crithom::rat::Rat;
use crithom::scenario::{run, Outcome, Scenario};
use crithom::sparse::SparseMatrix;

/// Status codes shared by every entry point.  Nonnegative values mirror the
/// CLI exit contract; negative values are binding-level failures.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CrithomStatus {
    /// Computation ran and every check passed.
    Ok = 0,
    /// Bad input: unparsable scenario, unknown command, invalid UTF-8.
    Usage = 2,
    /// The computation ran but a reported dimension failed to stabilize.
    Unstable = 3,
    /// An invariant was violated.
    Violation = 4,
    /// A null pointer or malformed argument reached the binding.
    InvalidArgument = -1,
    /// The library panicked; the handle is not usable.
    Panic = -2,
}

fn status_of(outcome: Outcome) -> CrithomStatus {
    match outcome {
        Outcome::Pass => CrithomStatus::Ok,
        Outcome::Usage => CrithomStatus::Usage,
        Outcome::Unstable => CrithomStatus::Unstable,
        Outcome::Violation => CrithomStatus::Violation,
    }
}

/// An opaque, heap-allocated scenario report.
pub struct CrithomReport {
    json: CString,
    status: CrithomStatus,
}

/// Run a scenario document (JSON text) and hand back an opaque report.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated UTF-8 string; `out` must be a
/// valid pointer to a report pointer.
#[no_mangle]
pub unsafe extern "C" fn crithom_run_scenario(
    scenario_json: *const c_char,
    out: *mut *mut CrithomReport,
) -> CrithomStatus {
    if scenario_json.is_null() || out.is_null() {
        return CrithomStatus::InvalidArgument;
    }
    unsafe { *out = ptr::null_mut() };
    let text = match unsafe { CStr::from_ptr(scenario_json) }.to_str() {
        Ok(t) => t,
        Err(_) => return CrithomStatus::Usage,
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let scenario = Scenario::from_json(&doc)?;
        Ok::<_, String>(run(&scenario))
    }));
    match result {
        Err(_) => CrithomStatus::Panic,
        Ok(Err(_)) => CrithomStatus::Usage,
        Ok(Ok((report, outcome))) => {
            let status = status_of(outcome);
            let json = CString::new(serde_json::to_string_pretty(&report).unwrap_or_default())
                .unwrap_or_default();
            let boxed = Box::new(CrithomReport { json, status });
            unsafe { *out = Box::into_raw(boxed) };
            status
        }
    }
}

/// The report body as NUL-terminated JSON, owned by the report.
///
/// # Safety
/// `report` must be a live pointer from `crithom_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn crithom_report_json(report: *const CrithomReport) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    unsafe { (*report).json.as_ptr() }
}

/// The status recorded in the report.
///
/// # Safety
/// `report` must be a live pointer from `crithom_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn crithom_report_status(report: *const CrithomReport) -> CrithomStatus {
    if report.is_null() {
        return CrithomStatus::InvalidArgument;
    }
    unsafe { (*report).status }
}

/// Release a report.
///
/// # Safety
/// `report` must be a pointer from `crithom_run_scenario`, released once.
#[no_mangle]
pub unsafe extern "C" fn crithom_report_free(report: *mut CrithomReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crithom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Exact rank of a sparse rational matrix given by COO triplets with
/// decimal-string entries ("p/q" or integers).
///
/// # Safety
/// `rows_idx`, `cols_idx`, `entries` must point to `nnz` elements each;
/// entries must be NUL-terminated strings; `out_rank` must be valid.
#[no_mangle]
pub unsafe extern "C" fn crithom_sparse_rank(
    rows: u64,
    cols: u64,
    nnz: u64,
    rows_idx: *const u64,
    cols_idx: *const u64,
    entries: *const *const c_char,
    out_rank: *mut u64,
) -> CrithomStatus {
    if out_rank.is_null()
        || (nnz > 0 && (rows_idx.is_null() || cols_idx.is_null() || entries.is_null()))
    {
        return CrithomStatus::InvalidArgument;
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut m = SparseMatrix::zero(rows as usize, cols as usize);
        for k in 0..nnz as usize {
            let r = unsafe { *rows_idx.add(k) } as usize;
            let c = unsafe { *cols_idx.add(k) } as usize;
            if r >= rows as usize || c >= cols as usize {
                return Err(CrithomStatus::InvalidArgument);
            }
            let text = unsafe { CStr::from_ptr(*entries.add(k)) }
                .to_str()
                .map_err(|_| CrithomStatus::Usage)?;
            let value: Rat = text.parse().map_err(|_| CrithomStatus::Usage)?;
            m.add_to(r, c, &value);
        }
        Ok(m.rank() as u64)
    }));
    match result {
        Err(_) => CrithomStatus::Panic,
        Ok(Err(status)) => status,
        Ok(Ok(rank)) => {
            unsafe { *out_rank = rank };
            CrithomStatus::Ok
        }
    }
}

/// Total twisted de Rham cohomology dimension of a potential over Q(u),
/// with the stabilization verdict in `out_stable`.
///
/// # Safety
/// `vars` must point to `nvars` NUL-terminated variable names; `w` must be
/// a NUL-terminated polynomial expression; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crithom_twisted_total_dim(
    vars: *const *const c_char,
    nvars: u64,
    w: *const c_char,
    window: u64,
    out_total: *mut u64,
    out_stable: *mut c_int,
) -> CrithomStatus {
    if vars.is_null() || w.is_null() || out_total.is_null() || out_stable.is_null() {
        return CrithomStatus::InvalidArgument;
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut names = Vec::new();
        for k in 0..nvars as usize {
            let name = unsafe { CStr::from_ptr(*vars.add(k)) }
                .to_str()
                .map_err(|_| CrithomStatus::Usage)?;
            names.push(name);
        }
        let ring = TruncatedPolyAlgebra::even(&names, window as usize + 24);
        let src = unsafe { CStr::from_ptr(w) }.to_str().map_err(|_| CrithomStatus::Usage)?;
        let w = PolyElement::parse(&ring, src).map_err(|_| CrithomStatus::Usage)?;
        let td = crithom::derham::TwistedDeRham::new(&w, window as usize)
            .map_err(|_| CrithomStatus::Usage)?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let report = td.cohomology(3, &mut rng).map_err(|_| CrithomStatus::Usage)?;
        Ok((report.total() as u64, report.stable))
    }));
    match result {
        Err(_) => CrithomStatus::Panic,
        Ok(Err(status)) => status,
        Ok(Ok((total, stable))) => {
            unsafe {
                *out_total = total;
                *out_stable = if stable { 1 } else { 0 };
            }
            CrithomStatus::Ok
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_round_trip() {
        let doc = CString::new(r#"{ "command": "gm-check", "payload": { "family": "x^3 - t*x" } }"#)
            .unwrap();
        let mut report: *mut CrithomReport = ptr::null_mut();
        let status = unsafe { crithom_run_scenario(doc.as_ptr(), &mut report) };
        assert!(matches!(status, CrithomStatus::Ok));
        let json = unsafe { CStr::from_ptr(crithom_report_json(report)) };
        let parsed: serde_json::Value = serde_json::from_str(json.to_str().unwrap()).unwrap();
        assert_eq!(parsed["result"]["flat"], serde_json::json!(true));
        assert!(matches!(unsafe { crithom_report_status(report) }, CrithomStatus::Ok));
        unsafe { crithom_report_free(report) };
    }

    #[test]
    fn bad_input_is_usage() {
        let doc = CString::new("not json").unwrap();
        let mut report: *mut CrithomReport = ptr::null_mut();
        let status = unsafe { crithom_run_scenario(doc.as_ptr(), &mut report) };
        assert!(matches!(status, CrithomStatus::Usage));
        assert!(report.is_null());
        assert!(matches!(
            unsafe { crithom_run_scenario(ptr::null(), &mut report) },
            CrithomStatus::InvalidArgument
        ));
    }

    #[test]
    fn sparse_rank_through_the_boundary() {
        let entries = [
            CString::new("1").unwrap(),
            CString::new("2").unwrap(),
            CString::new("2").unwrap(),
            CString::new("4").unwrap(),
        ];
        let ptrs: Vec<*const c_char> = entries.iter().map(|e| e.as_ptr()).collect();
        let rows = [0u64, 0, 1, 1];
        let cols = [0u64, 1, 0, 1];
        let mut rank = 0u64;
        let status = unsafe {
            crithom_sparse_rank(2, 2, 4, rows.as_ptr(), cols.as_ptr(), ptrs.as_ptr(), &mut rank)
        };
        assert!(matches!(status, CrithomStatus::Ok));
        assert_eq!(rank, 1);
    }

    #[test]
    fn twisted_total_through_the_boundary() {
        let x = CString::new("x").unwrap();
        let vars = [x.as_ptr()];
        let w = CString::new("x^3").unwrap();
        let mut total = 0u64;
        let mut stable = 0;
        let status = unsafe {
            crithom_twisted_total_dim(vars.as_ptr(), 1, w.as_ptr(), 6, &mut total, &mut stable)
        };
        assert!(matches!(status, CrithomStatus::Ok));
        assert_eq!(total, 2);
        assert_eq!(stable, 1);
    }
}
