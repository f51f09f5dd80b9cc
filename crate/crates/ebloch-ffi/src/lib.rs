//! C interface to `ebloch`.
//!
//! Objects are opaque handles created from the same JSON documents the
//! command line reads and released with the matching `_free` function.
//! Every fallible call returns an [`EblochStatus`]; the message of the most
//! recent failure on the calling thread is available from
//! [`ebloch_last_error`]. Strings returned by the library are owned by the
//! caller and released with [`ebloch_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ebloch::cochain::manifold_invariant;
use ebloch::extbloch::ExtBlochSum;
use ebloch::extgroup::MultBasis;
use ebloch::field::NumberField;
use ebloch::fixtures::{self, ElementSpec, FieldSpec, TriangulationSpec};
use ebloch::numeric::{fmt_real, Precision};
use ebloch::regulator::reg_vector;
use ebloch::torsion::{certify_order, profile};
use ebloch::Error;

/// Status codes. The numeric values of the error cases agree with the exit
/// codes of the command line where they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EblochStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    MathError = 3,
    PrecisionExhausted = 4,
    Panic = 5,
}

/// A number field.
pub struct EblochField {
    nf: NumberField,
}

/// An element of the extended pre-Bloch group with its basis.
pub struct EblochElement {
    basis: MultBasis,
    sum: ExtBlochSum,
}

/// A flattened triangulation.
pub struct EblochTriangulation {
    t: ebloch::cochain::FlattenedTriangulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EblochStatus {
    match e.exit_code() {
        2 => EblochStatus::InvalidInput,
        4 => EblochStatus::PrecisionExhausted,
        _ => EblochStatus::MathError,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> EblochStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EblochStatus::Ok,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("null argument: {what}"));
            EblochStatus::NullArgument
        }
        Ok(Err(FfiError::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EblochStatus::Panic
        }
    }
}

enum FfiError {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError::Lib(e)
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Lib(Error::InvalidInput(format!("{what} is not UTF-8"))))
}

unsafe fn dir_arg(p: *const c_char) -> Result<PathBuf, FfiError> {
    if p.is_null() {
        return Ok(PathBuf::from("."));
    }
    Ok(PathBuf::from(str_arg(p, "base_dir")?))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, FfiError> {
    p.as_mut().ok_or(FfiError::Null(what))
}

fn precision(digits: u32) -> Result<Precision, FfiError> {
    if digits < 20 {
        return Err(FfiError::Lib(Error::InvalidInput("precision must be at least 20 digits".into())));
    }
    Ok(Precision::new(digits))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ebloch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ebloch_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a field document `{"poly": [...], ...}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_field_from_json(json: *const c_char, out_field: *mut *mut EblochField) -> EblochStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let spec: FieldSpec = fixtures::parse_str(str_arg(json, "json")?)?;
        *slot = Box::into_raw(Box::new(EblochField { nf: spec.build()? }));
        Ok(())
    })
}

/// # Safety
/// `field` must come from [`ebloch_field_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ebloch_field_free(field: *mut EblochField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Degree, signature (r1, r2) and the order of the roots of unity.
///
/// # Safety
/// `field` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_field_info(
    field: *const EblochField,
    degree: *mut u32,
    r1: *mut u32,
    r2: *mut u32,
    roots_of_unity: *mut u64,
) -> EblochStatus {
    guard(|| {
        let nf = &handle(field, "field")?.nf;
        let (a, b) = nf.signature();
        *out(degree, "degree")? = nf.degree() as u32;
        *out(r1, "r1")? = a as u32;
        *out(r2, "r2")? = b as u32;
        *out(roots_of_unity, "roots_of_unity")? = nf.torsion_order();
        Ok(())
    })
}

/// w_F = 2 Π p^ν_p.
///
/// # Safety
/// `field` must be a live handle and `w` writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_field_torsion_w(field: *const EblochField, w: *mut u64) -> EblochStatus {
    guard(|| {
        let nf = &handle(field, "field")?.nf;
        *out(w, "w")? = profile(nf)?.w;
        Ok(())
    })
}

/// Parse an element document. A `field` given as a path is resolved against
/// `base_dir` (the working directory when null).
///
/// # Safety
/// `json` and, when not null, `base_dir` must be nul-terminated strings;
/// `out_element` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out_element: *mut *mut EblochElement,
) -> EblochStatus {
    guard(|| {
        let slot = out(out_element, "out_element")?;
        *slot = ptr::null_mut();
        let spec: ElementSpec = fixtures::parse_str(str_arg(json, "json")?)?;
        let fx = spec.build(&dir_arg(base_dir)?)?;
        *slot = Box::into_raw(Box::new(EblochElement { basis: fx.basis, sum: fx.element }));
        Ok(())
    })
}

/// # Safety
/// `element` must come from [`ebloch_element_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_free(element: *mut EblochElement) {
    if !element.is_null() {
        drop(Box::from_raw(element));
    }
}

/// Whether ν̂ vanishes; `caveat` is set when a negative answer is only
/// relative to the basis.
///
/// # Safety
/// `element` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_in_bhat(element: *const EblochElement, in_bhat: *mut bool, caveat: *mut bool) -> EblochStatus {
    guard(|| {
        let el = handle(element, "element")?;
        let v = el.sum.is_in_bhat(&el.basis);
        *out(in_bhat, "in_bhat")? = v.is_zero;
        *out(caveat, "caveat")? = v.caveat;
        Ok(())
    })
}

/// Number of regulator slots: real embeddings, then one per conjugate pair.
///
/// # Safety
/// `element` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_slot_count(element: *const EblochElement, count: *mut u32) -> EblochStatus {
    guard(|| {
        let el = handle(element, "element")?;
        *out(count, "count")? = el.basis.field().slot_count() as u32;
        Ok(())
    })
}

/// The regulator at `slot` as decimal strings with `digits` places; the
/// real part in [-2π², 2π²) when `symmetric`, else in [0, 4π²).
///
/// # Safety
/// `element` must be a live handle; `re` and `im` must be writable. The
/// returned strings are released with [`ebloch_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_regulator(
    element: *const EblochElement,
    slot: u32,
    digits: u32,
    symmetric: bool,
    re: *mut *mut c_char,
    im: *mut *mut c_char,
) -> EblochStatus {
    guard(|| {
        let el = handle(element, "element")?;
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let values = reg_vector(&el.basis, &el.sum, precision(digits)?)?;
        let v = values
            .get(slot as usize)
            .ok_or_else(|| Error::InvalidInput(format!("slot {slot} out of range")))?;
        let z = if symmetric { v.value.symmetric() } else { v.value.canonical() };
        *re = owned_string(fmt_real(&z.re, digits as usize));
        *im = owned_string(fmt_real(&z.im, digits as usize));
        Ok(())
    })
}

/// Certified lower bound for the order of the element.
///
/// # Safety
/// `element` must be a live handle and `order` writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_element_certify_order(element: *const EblochElement, digits: u32, order: *mut u64) -> EblochStatus {
    guard(|| {
        let el = handle(element, "element")?;
        *out(order, "order")? = certify_order(&el.basis, &el.sum, precision(digits)?)?;
        Ok(())
    })
}

/// Parse a triangulation document; see [`ebloch_element_from_json`] for
/// `base_dir`.
///
/// # Safety
/// As for [`ebloch_element_from_json`].
#[no_mangle]
pub unsafe extern "C" fn ebloch_triangulation_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out_tri: *mut *mut EblochTriangulation,
) -> EblochStatus {
    guard(|| {
        let slot = out(out_tri, "out_tri")?;
        *slot = ptr::null_mut();
        let spec: TriangulationSpec = fixtures::parse_str(str_arg(json, "json")?)?;
        *slot = Box::into_raw(Box::new(EblochTriangulation { t: spec.build(&dir_arg(base_dir)?)? }));
        Ok(())
    })
}

/// # Safety
/// `tri` must come from [`ebloch_triangulation_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ebloch_triangulation_free(tri: *mut EblochTriangulation) {
    if !tri.is_null() {
        drop(Box::from_raw(tri));
    }
}

/// Imaginary part of the regulator at the first slot, as a decimal string.
/// Fails with `MathError` when the edge conditions do not hold or the
/// translates are odd.
///
/// # Safety
/// `tri` must be a live handle and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn ebloch_triangulation_volume(tri: *const EblochTriangulation, digits: u32, im: *mut *mut c_char) -> EblochStatus {
    guard(|| {
        let t = &handle(tri, "tri")?.t;
        let im = out(im, "im")?;
        let inv = manifold_invariant(t, precision(digits)?)?;
        let v = inv
            .regulators
            .first()
            .ok_or_else(|| Error::NotApplicable("odd translates: no regulator".into()))?;
        *im = owned_string(fmt_real(&v.value.value.im, digits as usize));
        Ok(())
    })
}
