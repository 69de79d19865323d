//! C ABI over `retrofit-core`.
//!
//! Every entry point returns an [`RfStatus`]; on failure a message is kept
//! per thread and can be read with [`rf_last_error`]. Strings handed out by
//! this library must be released with [`rf_string_free`], models with
//! [`rf_model_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use retrofit_core::estimate::{estimate, DwellingProfile, EstimateError, EstimateRequest};
use retrofit_core::model::BareHomeModel;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// JSON did not parse or did not match the expected shape.
    InvalidJson = 3,
    /// Input parsed but is out of range or inconsistent.
    InvalidInput = 4,
    /// Model artifact could not be read or failed its checksum.
    Model = 5,
    /// The estimate could not be computed for this input.
    Domain = 6,
    /// A Rust panic was caught; the library state is still usable.
    Panic = 7,
}

/// Opaque handle to a loaded bare-home model.
pub struct RfModel {
    inner: BareHomeModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RfStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RfStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(RfStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(RfStatus::NullArgument, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

fn parse<T: serde::de::DeserializeOwned>(json: &str, what: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure(RfStatus::InvalidJson, format!("{what} at {path}: {}", e.into_inner()))
    })
}

unsafe fn into_c(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(RfStatus::Panic, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn boxed(model: BareHomeModel, out: *mut *mut RfModel) {
    // SAFETY: callers checked `out` for NULL.
    unsafe { *out = Box::into_raw(Box::new(RfModel { inner: model })) };
}

unsafe fn model_ref<'a>(m: *const RfModel) -> Result<&'a BareHomeModel, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| Failure(RfStatus::NullArgument, "model is NULL".into()))
}

/// Last error message on this thread, or NULL after a successful call.
/// The pointer stays valid until the next call into this library on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a model artifact from `path`, verifying its checksum.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_model_load(path: *const c_char, out: *mut *mut RfModel) -> RfStatus {
    guard(|| {
        check_out(out, "out")?;
        let p = text(path, "path")?;
        let m = BareHomeModel::load(Path::new(p)).map_err(|e| Failure(RfStatus::Model, format!("{p}: {e}")))?;
        boxed(m, out);
        Ok(())
    })
}

/// Parses a model artifact from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_model_from_json(json: *const c_char, out: *mut *mut RfModel) -> RfStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = BareHomeModel::from_json(text(json, "json")?).map_err(|e| Failure(RfStatus::Model, e.to_string()))?;
        boxed(m, out);
        Ok(())
    })
}

/// The built-in published London model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_model_table1(out: *mut *mut RfModel) -> RfStatus {
    guard(|| {
        check_out(out, "out")?;
        boxed(BareHomeModel::table1(), out);
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from one of the `rf_model_*` constructors and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_model_free(model: *mut RfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serializes the model artifact; free the result with [`rf_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_model_to_json(model: *const RfModel, out: *mut *mut c_char) -> RfStatus {
    guard(|| {
        check_out(out, "out")?;
        let s = model_ref(model)?.to_json().map_err(|e| Failure(RfStatus::Model, e.to_string()))?;
        into_c(s, out)
    })
}

fn dwelling(json: &str) -> Result<DwellingProfile, Failure> {
    let d: DwellingProfile = parse(json, "dwelling")?;
    d.validate().map_err(|e| match e {
        EstimateError::Invalid { field, message } => Failure(RfStatus::InvalidInput, format!("{field}: {message}")),
        other => Failure(RfStatus::InvalidInput, other.to_string()),
    })?;
    Ok(d)
}

/// Regression prediction for one dwelling, kWh/month, clamped at zero.
/// `dwelling_json` uses the `dwelling` object of the estimate request.
///
/// # Safety
/// `model` must be a live handle, `dwelling_json` NUL-terminated and
/// `out_kwh_month` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_model_predict_ebar(
    model: *const RfModel,
    dwelling_json: *const c_char,
    out_kwh_month: *mut f64,
) -> RfStatus {
    guard(|| {
        check_out(out_kwh_month, "out_kwh_month")?;
        let m = model_ref(model)?;
        let d = dwelling(text(dwelling_json, "dwelling_json")?)?;
        let p = m.predict_ebar(&d.record()).map_err(|e| Failure(RfStatus::InvalidInput, e.to_string()))?;
        *out_kwh_month = p.ebar;
        Ok(())
    })
}

/// Bare-home annual demand E0 for one dwelling, kWh/yr.
///
/// # Safety
/// As for [`rf_model_predict_ebar`].
#[no_mangle]
pub unsafe extern "C" fn rf_model_bare_e0(
    model: *const RfModel,
    dwelling_json: *const c_char,
    out_kwh_year: *mut f64,
) -> RfStatus {
    guard(|| {
        check_out(out_kwh_year, "out_kwh_year")?;
        let m = model_ref(model)?;
        let d = dwelling(text(dwelling_json, "dwelling_json")?)?;
        let e = m.bare_e0(&d.record()).map_err(|e| Failure(RfStatus::InvalidInput, e.to_string()))?;
        *out_kwh_year = e.e0_year;
        Ok(())
    })
}

/// Runs an estimate request (the same JSON the HTTP `/estimate` endpoint
/// takes) and writes the response JSON to `out_json`. `model` may be NULL
/// when the request carries its own baseline or a preset.
///
/// # Safety
/// `model` must be NULL or a live handle, `request_json` NUL-terminated and
/// `out_json` a valid pointer. Free the result with [`rf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rf_estimate_json(
    model: *const RfModel,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let req: EstimateRequest = parse(text(request_json, "request_json")?, "request")?;
        let m = model.as_ref().map(|m| &m.inner);
        let resp = estimate(&req, m).map_err(|e| match e {
            EstimateError::Invalid { field, message } => Failure(RfStatus::InvalidInput, format!("{field}: {message}")),
            other => Failure(RfStatus::Domain, other.to_string()),
        })?;
        into_c(serde_json::to_string(&resp).expect("response serializes"), out_json)
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
