//! C ABI over the `netmimo` crate.
//!
//! Every fallible function returns an [`NmStatus`]; on failure a message is
//! available from [`nm_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `_free` function. Strings returned by
//! the library are released with [`nm_string_free`].

use netmimo::channel_model::{bessel_j0, QualityPair};
use netmimo::dof_analysis::{self, estimate_dof_slope, region_contains, DofPoint, DofRegion};
use netmimo::harness::{run_experiment, ResultTable, SimConfig};
use netmimo::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    UnknownScheme = 4,
    DegenerateChannel = 5,
    InsufficientPoints = 6,
    Parse = 7,
    OutOfRange = 8,
    Internal = 9,
}

/// Opaque DoF region handle.
pub struct NmDofRegion(DofRegion);

/// Opaque result-table handle.
pub struct NmResultTable(ResultTable);

/// One row of a result table (the scheme label is read separately).
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NmResultRow {
    pub snr_db: f64,
    pub p_linear: f64,
    pub mean_sum_rate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NmStatus, msg: impl Into<String>) -> NmStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> NmStatus {
    match e {
        Error::InvalidParameter { .. } => NmStatus::InvalidParameter,
        Error::UnknownScheme(_) => NmStatus::UnknownScheme,
        Error::DegenerateChannel | Error::NearSingular { .. } => NmStatus::DegenerateChannel,
        Error::InsufficientPoints { .. } => NmStatus::InsufficientPoints,
        Error::Json(_) | Error::Table(_) => NmStatus::Parse,
        _ => NmStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), NmStatus>>(f: F) -> NmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(NmStatus::Internal, "panic inside netmimo"),
    }
}

fn lift<T>(r: netmimo::Result<T>) -> Result<T, NmStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, NmStatus> {
    if s.is_null() {
        return Err(fail(NmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(NmStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn non_null<T>(p: *mut T) -> Result<*mut T, NmStatus> {
    if p.is_null() {
        Err(fail(NmStatus::NullPointer, "null output pointer"))
    } else {
        Ok(p)
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Zeroth-order Bessel function of the first kind.
#[no_mangle]
pub extern "C" fn nm_bessel_j0(x: f64) -> f64 {
    bessel_j0(x)
}

/// Closed-form sum DoF of `scheme` (e.g. `"amat-apzf"`) at `(alpha1, alpha2)`.
///
/// # Safety
/// `scheme` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_theoretical_dof(
    scheme: *const c_char,
    alpha1: f64,
    alpha2: f64,
    out: *mut f64,
) -> NmStatus {
    guard(|| {
        let out = non_null(out)?;
        let name = read_str(scheme)?;
        let qual = lift(QualityPair::new(alpha1, alpha2))?;
        *out = lift(dof_analysis::theoretical_dof_by_name(name, &qual))?;
        Ok(())
    })
}

/// Optimal DoF region for `(alpha1, alpha2)`.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with
/// [`nm_dof_region_free`].
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_new(alpha1: f64, alpha2: f64, out: *mut *mut NmDofRegion) -> NmStatus {
    guard(|| {
        let out = non_null(out)?;
        let qual = lift(QualityPair::new(alpha1, alpha2))?;
        *out = Box::into_raw(Box::new(NmDofRegion(dof_analysis::dof_region(&qual))));
        Ok(())
    })
}

/// # Safety
/// `region` must be NULL or a live handle from [`nm_dof_region_new`].
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_free(region: *mut NmDofRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Number of vertices, or 0 for NULL.
///
/// # Safety
/// `region` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_vertex_count(region: *const NmDofRegion) -> usize {
    region.as_ref().map_or(0, |r| r.0.vertices_exact.len())
}

/// Vertex `index` in counter-clockwise order from the origin.
///
/// # Safety
/// `region` must be a live handle, `d1`/`d2` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_vertex(
    region: *const NmDofRegion,
    index: usize,
    d1: *mut f64,
    d2: *mut f64,
) -> NmStatus {
    guard(|| {
        let r = region
            .as_ref()
            .ok_or_else(|| fail(NmStatus::NullPointer, "null region"))?;
        let (d1, d2) = (non_null(d1)?, non_null(d2)?);
        let v = r.0.vertices();
        let p = v
            .get(index)
            .ok_or_else(|| fail(NmStatus::OutOfRange, format!("vertex {index} of {}", v.len())))?;
        *d1 = p.d1;
        *d2 = p.d2;
        Ok(())
    })
}

/// Membership test with tolerance `tol`.
///
/// # Safety
/// `region` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_contains(
    region: *const NmDofRegion,
    d1: f64,
    d2: f64,
    tol: f64,
    out: *mut bool,
) -> NmStatus {
    guard(|| {
        let r = region
            .as_ref()
            .ok_or_else(|| fail(NmStatus::NullPointer, "null region"))?;
        *non_null(out)? = region_contains(&r.0, &DofPoint::new(d1, d2), tol);
        Ok(())
    })
}

/// Region as JSON (`{"halfspaces":[[a1,a2,b],...],"vertices":[[d1,d2],...]}`).
/// Returns NULL for a NULL handle; free with [`nm_string_free`].
///
/// # Safety
/// `region` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_dof_region_to_json(region: *const NmDofRegion) -> *mut c_char {
    match region.as_ref() {
        Some(r) => into_c_string(r.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// Runs the experiment described by a JSON configuration.
///
/// # Safety
/// `config_json` must be a valid C string and `out` a valid pointer; the
/// handle is released with [`nm_result_table_free`].
#[no_mangle]
pub unsafe extern "C" fn nm_simulate_json(config_json: *const c_char, out: *mut *mut NmResultTable) -> NmStatus {
    guard(|| {
        let out = non_null(out)?;
        let cfg = lift(SimConfig::from_json(read_str(config_json)?))?;
        let table = lift(run_experiment(&cfg))?;
        *out = Box::into_raw(Box::new(NmResultTable(table)));
        Ok(())
    })
}

/// Parses a result CSV.
///
/// # Safety
/// `csv` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_from_csv(csv: *const c_char, out: *mut *mut NmResultTable) -> NmStatus {
    guard(|| {
        let out = non_null(out)?;
        let table = lift(ResultTable::from_csv(read_str(csv)?))?;
        *out = Box::into_raw(Box::new(NmResultTable(table)));
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_free(table: *mut NmResultTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_row_count(table: *const NmResultTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.rows.len())
}

/// Numeric fields of row `index`.
///
/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_row(
    table: *const NmResultTable,
    index: usize,
    out: *mut NmResultRow,
) -> NmStatus {
    guard(|| {
        let t = table
            .as_ref()
            .ok_or_else(|| fail(NmStatus::NullPointer, "null table"))?;
        let out = non_null(out)?;
        let r =
            t.0.rows
                .get(index)
                .ok_or_else(|| fail(NmStatus::OutOfRange, format!("row {index} of {}", t.0.rows.len())))?;
        *out = NmResultRow {
            snr_db: r.snr_db,
            p_linear: r.p_linear,
            mean_sum_rate: r.mean_sum_rate,
            std_error: r.stderr,
            trials: r.trials,
            seed: r.seed,
        };
        Ok(())
    })
}

/// Scheme label of row `index`, or NULL when out of range; free with
/// [`nm_string_free`].
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_row_scheme(table: *const NmResultTable, index: usize) -> *mut c_char {
    match table.as_ref().and_then(|t| t.0.rows.get(index)) {
        Some(r) => into_c_string(r.scheme.clone()),
        None => ptr::null_mut(),
    }
}

/// Table in the CSV output format, or NULL for a NULL handle; free with
/// [`nm_string_free`].
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_to_csv(table: *const NmResultTable) -> *mut c_char {
    match table.as_ref() {
        Some(t) => into_c_string(t.0.to_csv()),
        None => ptr::null_mut(),
    }
}

/// Fitted DoF slope of `scheme` over its top `window` SNR points.
///
/// # Safety
/// `table` must be a live handle, `scheme` a valid C string, `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_result_table_slope(
    table: *const NmResultTable,
    scheme: *const c_char,
    window: usize,
    out: *mut f64,
) -> NmStatus {
    guard(|| {
        let t = table
            .as_ref()
            .ok_or_else(|| fail(NmStatus::NullPointer, "null table"))?;
        let out = non_null(out)?;
        let curve = lift(t.0.curve(read_str(scheme)?))?;
        *out = lift(estimate_dof_slope(&curve, window))?;
        Ok(())
    })
}
