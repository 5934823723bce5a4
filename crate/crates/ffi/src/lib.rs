//! C ABI over `omnigame`.
//!
//! Models live behind an opaque `OmniModel` handle. Every fallible call
//! returns an `OmniStatus`; on failure the message is kept per thread and
//! can be fetched with `omni_last_error`. Budgets α are passed as strings
//! (`"7/2"`, `"3.5"`) so they stay exact; rates come back as `i64` fractions
//! and fail with `OMNI_STATUS_OVERFLOW` when they do not fit.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_traits::ToPrimitive;
use omnigame::rational::ratio;
use omnigame::{
    dilworth_truncate, greedy_vertex, min_sum_rate, parse_model, parse_rational, shapley,
    AllocationError, GameSpec, ModelKind, Rational, RateVector, SourceModel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmniStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidModel = 4,
    InvalidArgument = 5,
    CoreEmpty = 6,
    BufferTooSmall = 7,
    Overflow = 8,
    Panic = 9,
}

/// `numerator / denominator` in lowest terms, denominator > 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmniRational {
    pub numerator: i64,
    pub denominator: i64,
}

/// Opaque model handle.
pub struct OmniModel {
    inner: SourceModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: OmniStatus, message: impl Into<String>) -> OmniStatus {
    set_error(message);
    status
}

/// Runs `body`, clearing the last error first and mapping panics.
fn guarded(body: impl FnOnce() -> Result<(), (OmniStatus, String)>) -> OmniStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OmniStatus::Ok,
        Ok(Err((status, message))) => fail(status, message),
        Err(_) => fail(OmniStatus::Panic, "internal panic"),
    }
}

type Failure = (OmniStatus, String);

unsafe fn model_ref<'a>(model: *const OmniModel) -> Result<&'a SourceModel, Failure> {
    model
        .as_ref()
        .map(|m| &m.inner)
        .ok_or((OmniStatus::NullPointer, "model handle is NULL".into()))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err((OmniStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (OmniStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn alpha_arg(alpha: *const c_char) -> Result<Rational, Failure> {
    let text = c_str(alpha, "alpha")?;
    parse_rational(text).map_err(|e| (OmniStatus::Parse, e.to_string()))
}

fn to_c(value: &Rational) -> Result<OmniRational, Failure> {
    match (value.numer().to_i64(), value.denom().to_i64()) {
        (Some(numerator), Some(denominator)) => Ok(OmniRational { numerator, denominator }),
        _ => Err((OmniStatus::Overflow, format!("{value} does not fit in 64 bits"))),
    }
}

fn from_c(value: OmniRational) -> Result<Rational, Failure> {
    if value.denominator == 0 {
        return Err((OmniStatus::InvalidArgument, "zero denominator".into()));
    }
    Ok(ratio(value.numerator, value.denominator))
}

unsafe fn write_rates(rates: &RateVector, out: *mut OmniRational, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err((OmniStatus::NullPointer, "output buffer is NULL".into()));
    }
    if len < rates.len() {
        return Err((
            OmniStatus::BufferTooSmall,
            format!("need {} entries, buffer holds {len}", rates.len()),
        ));
    }
    let converted = rates.rates().iter().map(to_c).collect::<Result<Vec<_>, _>>()?;
    ptr::copy_nonoverlapping(converted.as_ptr(), out, converted.len());
    Ok(())
}

fn game(model: &SourceModel, alpha: Rational) -> Result<GameSpec<'_>, Failure> {
    GameSpec::new(model, alpha).map_err(|e| (OmniStatus::InvalidArgument, e.to_string()))
}

fn allocation_failure(e: AllocationError) -> Failure {
    let status = match e {
        AllocationError::CoreEmpty { .. } => OmniStatus::CoreEmpty,
        _ => OmniStatus::InvalidArgument,
    };
    (status, e.to_string())
}

/// Parses a JSON model (packets or entropy table) into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omni_model_from_json(json: *const c_char, out: *mut *mut OmniModel) -> OmniStatus {
    guarded(|| {
        if out.is_null() {
            return Err((OmniStatus::NullPointer, "out is NULL".into()));
        }
        *out = ptr::null_mut();
        let text = c_str(json, "json")?;
        let model = parse_model(text).map_err(|e| {
            let status = if e.is_invalid_model() {
                OmniStatus::InvalidModel
            } else {
                OmniStatus::Parse
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(OmniModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `omni_model_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn omni_model_free(model: *mut OmniModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of users, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn omni_model_num_users(model: *const OmniModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_users())
}

/// Minimum sum-rate; `integer` selects the integer-rate model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omni_min_sum_rate(
    model: *const OmniModel,
    integer: bool,
    out: *mut OmniRational,
) -> OmniStatus {
    guarded(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or((OmniStatus::NullPointer, "out is NULL".to_owned()))?;
        let kind = if integer {
            ModelKind::NonAsymptotic
        } else {
            ModelKind::Asymptotic
        };
        *out = to_c(&min_sum_rate(model, kind).r_co)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle, `alpha` a NUL-terminated string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn omni_core_nonempty(
    model: *const OmniModel,
    alpha: *const c_char,
    out: *mut bool,
) -> OmniStatus {
    guarded(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or((OmniStatus::NullPointer, "out is NULL".to_owned()))?;
        let g = game(model, alpha_arg(alpha)?)?;
        *out = omnigame::core_nonempty(&g).nonempty;
        Ok(())
    })
}

/// Core membership of `rates[0..len]`; `integer` also requires integral rates.
///
/// # Safety
/// `rates` must point to `len` readable entries; other pointers as above.
#[no_mangle]
pub unsafe extern "C" fn omni_in_core(
    model: *const OmniModel,
    alpha: *const c_char,
    rates: *const OmniRational,
    len: usize,
    integer: bool,
    out: *mut bool,
) -> OmniStatus {
    guarded(|| {
        let model = model_ref(model)?;
        let out = out.as_mut().ok_or((OmniStatus::NullPointer, "out is NULL".to_owned()))?;
        if rates.is_null() {
            return Err((OmniStatus::NullPointer, "rates is NULL".into()));
        }
        let values = std::slice::from_raw_parts(rates, len)
            .iter()
            .map(|&r| from_c(r))
            .collect::<Result<Vec<_>, _>>()?;
        let r = RateVector::new(values).map_err(|e| (OmniStatus::InvalidArgument, e.to_string()))?;
        let g = game(model, alpha_arg(alpha)?)?;
        let m = g
            .in_core(&r, integer)
            .map_err(|e| (OmniStatus::InvalidArgument, e.to_string()))?;
        *out = m.is_member();
        Ok(())
    })
}

/// Shapley value of the convex game at α, written to `out[0..num_users]`.
///
/// # Safety
/// `out` must point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn omni_shapley(
    model: *const OmniModel,
    alpha: *const c_char,
    out: *mut OmniRational,
    len: usize,
) -> OmniStatus {
    guarded(|| {
        let model = model_ref(model)?;
        let g = game(model, alpha_arg(alpha)?)?;
        let a = shapley(&dilworth_truncate(&g)).map_err(allocation_failure)?;
        write_rates(&a.rates, out, len)
    })
}

/// Greedy core vertex for the zero-based join order `order[0..num_users]`.
///
/// # Safety
/// `order` must point to `num_users` readable entries and `out` to `len`
/// writable entries.
#[no_mangle]
pub unsafe extern "C" fn omni_greedy_vertex(
    model: *const OmniModel,
    alpha: *const c_char,
    order: *const usize,
    out: *mut OmniRational,
    len: usize,
) -> OmniStatus {
    guarded(|| {
        let model = model_ref(model)?;
        if order.is_null() {
            return Err((OmniStatus::NullPointer, "order is NULL".into()));
        }
        let order = std::slice::from_raw_parts(order, model.num_users());
        let g = game(model, alpha_arg(alpha)?)?;
        let a = greedy_vertex(&dilworth_truncate(&g), order).map_err(allocation_failure)?;
        write_rates(&a.rates, out, len)
    })
}

/// Copy of the last error message on this thread, or NULL if the last call
/// succeeded. Free it with `omni_string_free`.
#[no_mangle]
pub extern "C" fn omni_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(ptr::null_mut(), CString::into_raw))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn omni_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
