//! C ABI over `relcalc`.
//!
//! Relations are opaque handles created from a JSON relation spec and released
//! with `relcalc_relation_free`. Every fallible call returns a
//! `RelcalcStatus`; on failure `relcalc_last_error` describes the problem.
//! Strings returned by the library are released with `relcalc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use relcalc::decomposition::classify;
use relcalc::relspec::{AnyRelation, RelationSpec};
use relcalc::report::{analyze_spec, check_conditioning, check_rank, StoneMethod};
use relcalc::stone::characteristic_matrix;
use relcalc::{Classification, Field, LinearRelation, RelError, Scalar, ToleranceConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelcalcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed spec, wrong dimensions or an unmet precondition.
    Input = 3,
    /// A rank or equality decision sat too close to its tolerance.
    Degenerate = 4,
    /// The output buffer is shorter than required.
    BufferTooSmall = 5,
    /// Internal error; the handle should not be used again.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelcalcClass {
    Regular = 0,
    Singular = 1,
    MaximallySingular = 2,
    Mixed = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelcalcTolerances {
    pub rank: f64,
    pub orth: f64,
    pub eq: f64,
    pub num: f64,
    pub var: f64,
}

/// Ambient dimensions and the dimensions of graph, domain, range, kernel and
/// multivalued part.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RelcalcDims {
    pub dim_h: usize,
    pub dim_k: usize,
    pub graph: usize,
    pub dom: usize,
    pub ran: usize,
    pub ker: usize,
    pub mul: usize,
    pub is_complex: bool,
}

/// The three properties are not exclusive; `label` picks one.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelcalcClassification {
    pub label: RelcalcClass,
    pub is_regular: bool,
    pub is_singular: bool,
    pub is_maximally_singular: bool,
}

/// Opaque relation handle.
pub struct RelcalcRelation {
    spec: RelationSpec,
    relation: AnyRelation,
    cfg: ToleranceConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &RelError) -> RelcalcStatus {
    match e {
        RelError::Input(_)
        | RelError::DimensionMismatch(_)
        | RelError::EmptyAmbient
        | RelError::NotInGraph(_)
        | RelError::Precondition(_) => RelcalcStatus::Input,
        _ => RelcalcStatus::Degenerate,
    }
}

/// Runs `body`, recording errors and turning panics into `Panic`.
fn guard(body: impl FnOnce() -> Result<(), (RelcalcStatus, String)>) -> RelcalcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RelcalcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            set_error(format!("panic: {msg}"));
            RelcalcStatus::Panic
        }
    }
}

fn fail(e: RelError) -> (RelcalcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RelcalcStatus, String) {
    (RelcalcStatus::NullArgument, format!("{what} is null"))
}

unsafe fn handle<'a>(
    rel: *const RelcalcRelation,
) -> Result<&'a RelcalcRelation, (RelcalcStatus, String)> {
    rel.as_ref().ok_or_else(|| null("relation"))
}

fn checked<T: Scalar>(
    spec: &RelationSpec,
    cfg: &ToleranceConfig,
) -> relcalc::Result<LinearRelation<T>> {
    check_rank(&spec.pairs::<T>()?, spec.dim_h, spec.dim_k, cfg)?;
    let t = spec.to_relation(cfg)?;
    check_conditioning(&t, cfg)?;
    Ok(t)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn relcalc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn relcalc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn relcalc_tolerances_default() -> RelcalcTolerances {
    let c = ToleranceConfig::default();
    RelcalcTolerances {
        rank: c.rank,
        orth: c.orth,
        eq: c.eq,
        num: c.num,
        var: c.var,
    }
}

/// Builds a relation from a JSON relation spec. `tolerances` may be null for
/// the defaults. On success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string, `tolerances` null or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn relcalc_relation_from_json(
    json: *const c_char,
    tolerances: *const RelcalcTolerances,
    out: *mut *mut RelcalcRelation,
) -> RelcalcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (RelcalcStatus::InvalidUtf8, format!("json: {e}")))?;
        let cfg = match tolerances.as_ref() {
            None => ToleranceConfig::default(),
            Some(t) => ToleranceConfig {
                rank: t.rank,
                orth: t.orth,
                eq: t.eq,
                num: t.num,
                var: t.var,
            },
        };
        cfg.validate().map_err(fail)?;
        let spec = RelationSpec::from_json(text).map_err(fail)?;
        let relation = match spec.field {
            Field::Real => AnyRelation::Real(checked(&spec, &cfg).map_err(fail)?),
            Field::Complex => AnyRelation::Complex(checked(&spec, &cfg).map_err(fail)?),
        };
        *out = Box::into_raw(Box::new(RelcalcRelation {
            spec,
            relation,
            cfg,
        }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `rel` must come from `relcalc_relation_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relcalc_relation_free(rel: *mut RelcalcRelation) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

fn dims_of<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> RelcalcDims {
    let [dom, ran, ker, mul] = t.parts(cfg).dims();
    RelcalcDims {
        dim_h: t.dim_h(),
        dim_k: t.dim_k(),
        graph: t.graph_dim(),
        dom,
        ran,
        ker,
        mul,
        is_complex: T::FIELD == Field::Complex,
    }
}

/// # Safety
/// `rel` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn relcalc_relation_dims(
    rel: *const RelcalcRelation,
    out: *mut RelcalcDims,
) -> RelcalcStatus {
    guard(|| {
        let r = handle(rel)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match &r.relation {
            AnyRelation::Real(t) => dims_of(t, &r.cfg),
            AnyRelation::Complex(t) => dims_of(t, &r.cfg),
        };
        Ok(())
    })
}

/// # Safety
/// `rel` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn relcalc_classify(
    rel: *const RelcalcRelation,
    out: *mut RelcalcClassification,
) -> RelcalcStatus {
    guard(|| {
        let r = handle(rel)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let report = match &r.relation {
            AnyRelation::Real(t) => classify(t, &r.cfg),
            AnyRelation::Complex(t) => classify(t, &r.cfg),
        }
        .map_err(fail)?;
        *out = RelcalcClassification {
            label: match report.classification {
                Classification::Regular => RelcalcClass::Regular,
                Classification::Singular => RelcalcClass::Singular,
                Classification::MaximallySingular => RelcalcClass::MaximallySingular,
                Classification::Mixed => RelcalcClass::Mixed,
            },
            is_regular: report.flags.is_regular,
            is_singular: report.flags.is_singular,
            is_maximally_singular: report.flags.is_maximally_singular,
        };
        Ok(())
    })
}

fn write_matrix<T: Scalar>(
    a: &DMatrix<T>,
    re: &mut [f64],
    mut im: Option<&mut [f64]>,
    to_parts: impl Fn(T) -> (f64, f64),
) {
    let cols = a.ncols();
    for i in 0..a.nrows() {
        for j in 0..cols {
            let (r, c) = to_parts(a[(i, j)]);
            re[i * cols + j] = r;
            if let Some(im) = im.as_deref_mut() {
                im[i * cols + j] = c;
            }
        }
    }
}

/// Writes the characteristic matrix `R` (order `dim_h + dim_k`) row-major
/// into `re`, and its imaginary part into `im` unless `im` is null. Both
/// buffers must hold `len >= (dim_h + dim_k)^2` doubles.
///
/// # Safety
/// `rel` must be valid; `re` (and `im` when non-null) must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn relcalc_characteristic_matrix(
    rel: *const RelcalcRelation,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> RelcalcStatus {
    guard(|| {
        let r = handle(rel)?;
        if re.is_null() {
            return Err(null("re"));
        }
        let order = r.spec.dim_h + r.spec.dim_k;
        if len < order * order {
            return Err((
                RelcalcStatus::BufferTooSmall,
                format!("need {} entries, got {len}", order * order),
            ));
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, len));
        match &r.relation {
            AnyRelation::Real(t) => {
                write_matrix(&characteristic_matrix(t).assembled(), re, im, |x| (x, 0.0))
            }
            AnyRelation::Complex(t) => write_matrix(
                &characteristic_matrix(t).assembled(),
                re,
                im,
                |x: Complex64| (x.re, x.im),
            ),
        }
        Ok(())
    })
}

/// Full analysis report as JSON. On success `*out` owns a string to be
/// released with `relcalc_string_free`.
///
/// # Safety
/// `rel` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn relcalc_analyze_json(
    rel: *const RelcalcRelation,
    seed: u64,
    out: *mut *mut c_char,
) -> RelcalcStatus {
    guard(|| {
        let r = handle(rel)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let report = analyze_spec(&r.spec, StoneMethod::Both, seed, &r.cfg).map_err(fail)?;
        let text =
            CString::new(report.to_json()).map_err(|e| (RelcalcStatus::Panic, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relcalc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
