//! C ABI over the anaflow engine.
//!
//! Fields and certificates are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! an [`AnaflowStatus`]; the message of the most recent failure on the
//! calling thread is available from [`anaflow_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use anaflow::algebra::WeightSequence;
use anaflow::expr::{Expression, VectorField};
use anaflow::extension::radius_at;
use anaflow::flow::{certify, flow_eval, CertifyOptions, FlowCertificate};
use anaflow::geometry::{CompactBox, Polydisc};
use anaflow::oracle::rk4_flow;
use anaflow::seminorm::{seminorm_function, SeminormConfig};
use anaflow::timevarying::{StepField, TimeInterval};
use anaflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnaflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Invalid = 4,
    Domain = 5,
    NotExtendable = 6,
    TailUnreachable = 7,
    BlowUp = 8,
    Mismatch = 9,
    BufferTooSmall = 10,
    Panic = 11,
    Other = 12,
}

/// A (possibly piecewise constant in time) vector field.
pub struct AnaflowField {
    inner: StepField,
}

/// A convergence certificate together with the field it was issued for.
pub struct AnaflowCertificate {
    inner: FlowCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AnaflowStatus {
    match e {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } => AnaflowStatus::Syntax,
        Error::Invalid(_) | Error::Io(_) => AnaflowStatus::Invalid,
        Error::Domain { .. } => AnaflowStatus::Domain,
        Error::NotExtendable { .. } => AnaflowStatus::NotExtendable,
        Error::TailUnreachable { .. } => AnaflowStatus::TailUnreachable,
        Error::BlowUp { .. } => AnaflowStatus::BlowUp,
        Error::Mismatch(_) | Error::CertificateMismatch(_) => AnaflowStatus::Mismatch,
        _ => AnaflowStatus::Other,
    }
}

enum Fail {
    Status(AnaflowStatus, String),
    Engine(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AnaflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnaflowStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            AnaflowStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(AnaflowStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(AnaflowStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Version string of the engine; static, never freed.
#[no_mangle]
pub extern "C" fn anaflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// including the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn anaflow_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Parses `n` component expressions into a field on `[t0, t1]`.
///
/// # Safety
/// `components` must point to `n` NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_field_parse(
    components: *const *const c_char,
    n: usize,
    t0: f64,
    t1: f64,
    out: *mut *mut AnaflowField,
) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if components.is_null() {
            return Err(null("components"));
        }
        let texts = (0..n)
            .map(|i| str_arg(*components.add(i), "component"))
            .collect::<Result<Vec<_>, _>>()?;
        let x = VectorField::parse(&texts)?;
        let inner = StepField::constant(x, TimeInterval::new(t0, t1)?)?;
        *out = Box::into_raw(Box::new(AnaflowField { inner }));
        Ok(())
    })
}

/// Reads a step field from its JSON form
/// (`{"n", "breakpoints", "pieces": [{"components": [...]}]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_field_from_json(json: *const c_char, out: *mut *mut AnaflowField) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let inner = StepField::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(AnaflowField { inner }));
        Ok(())
    })
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anaflow_field_dim(field: *const AnaflowField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.dim())
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anaflow_field_free(field: *mut AnaflowField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Certifies the flow over the whole span of `field` for initial points in
/// the box `[lo, hi]` (each of length `n`), with polydiscs of radius
/// `radius` and the coordinate `x1` as observable.
///
/// # Safety
/// `field` must be live; `lo` and `hi` must hold `n` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_certify(
    field: *const AnaflowField,
    lo: *const f64,
    hi: *const f64,
    n: usize,
    radius: f64,
    target_tail: f64,
    out: *mut *mut AnaflowCertificate,
) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let x = &field.as_ref().ok_or_else(|| null("field"))?.inner;
        let k = CompactBox::new(slice_arg(lo, n, "lo")?.to_vec(), slice_arg(hi, n, "hi")?.to_vec())?;
        let v = Polydisc::new(k.clone(), radius)?;
        let f = Expression::var(x.dim(), 0);
        let inner = certify(x, x.span(), &k, &v, &f, target_tail, &CertifyOptions::default())?;
        *out = Box::into_raw(Box::new(AnaflowCertificate { inner }));
        Ok(())
    })
}

/// Number of certified subintervals, or 0 for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anaflow_certificate_subintervals(cert: *const AnaflowCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.inner.subintervals.len())
}

/// Sum of the per-subinterval tail bounds, or NaN for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anaflow_certificate_total_tail(cert: *const AnaflowCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.total_tail)
}

/// The certificate as JSON; release with [`anaflow_string_free`].
///
/// # Safety
/// `cert` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_certificate_to_json(
    cert: *const AnaflowCertificate,
    out: *mut *mut c_char,
) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = &cert.as_ref().ok_or_else(|| null("cert"))?.inner;
        let text = serde_json::to_string(c).map_err(|e| Fail::Status(AnaflowStatus::Other, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| Fail::Status(AnaflowStatus::Other, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `cert` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anaflow_certificate_free(cert: *mut AnaflowCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn anaflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Series flow from `(t0, x0)` to `t`. Writes `n` coordinates to `point`
/// and the residual bound to `residual`.
///
/// # Safety
/// Handles must be live; `x0` and `point` must hold `n` doubles;
/// `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_flow_eval(
    field: *const AnaflowField,
    cert: *const AnaflowCertificate,
    t0: f64,
    t: f64,
    x0: *const f64,
    n: usize,
    point: *mut f64,
    residual: *mut f64,
) -> AnaflowStatus {
    guard(|| {
        let x = &field.as_ref().ok_or_else(|| null("field"))?.inner;
        let c = &cert.as_ref().ok_or_else(|| null("cert"))?.inner;
        let residual = out_arg(residual, "residual")?;
        if point.is_null() {
            return Err(null("point"));
        }
        if n != x.dim() {
            return Err(Fail::Status(AnaflowStatus::Mismatch, format!("expected {} coordinates, got {n}", x.dim())));
        }
        let p = flow_eval(x, t0, t, slice_arg(x0, n, "x0")?, c)?;
        slice::from_raw_parts_mut(point, n).copy_from_slice(&p.point);
        *residual = p.residual_bound;
        Ok(())
    })
}

/// Classical RK4 reference flow with `steps` steps.
///
/// # Safety
/// `field` must be live; `x0` and `point` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn anaflow_rk4_flow(
    field: *const AnaflowField,
    t0: f64,
    t: f64,
    x0: *const f64,
    n: usize,
    steps: usize,
    point: *mut f64,
) -> AnaflowStatus {
    guard(|| {
        let x = &field.as_ref().ok_or_else(|| null("field"))?.inner;
        if point.is_null() {
            return Err(null("point"));
        }
        if n != x.dim() {
            return Err(Fail::Status(AnaflowStatus::Mismatch, format!("expected {} coordinates, got {n}", x.dim())));
        }
        let y = rk4_flow(x, t0, t, slice_arg(x0, n, "x0")?, steps)?;
        slice::from_raw_parts_mut(point, n).copy_from_slice(&y);
        Ok(())
    })
}

/// `p_{K,a}(f)` for `a_m = d ratio^m` on the box `[lo, hi]` sampled with
/// `grid` points per axis, truncated at `max_order`.
///
/// # Safety
/// `expr` must be NUL-terminated; `lo`, `hi` must hold `n` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_seminorm(
    expr: *const c_char,
    lo: *const f64,
    hi: *const f64,
    n: usize,
    grid: usize,
    d: f64,
    ratio: f64,
    max_order: usize,
    t: f64,
    out: *mut f64,
) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = Expression::parse(str_arg(expr, "expr")?, n)?;
        let k = CompactBox::new(slice_arg(lo, n, "lo")?.to_vec(), slice_arg(hi, n, "hi")?.to_vec())?.with_grid(grid);
        let a = WeightSequence::geometric(d, ratio, max_order)?;
        let cfg = SeminormConfig {
            max_order,
            majorant: None,
        };
        *out = seminorm_function(&f, &k, &a, t, &cfg)?.value;
        Ok(())
    })
}

/// Estimated distance from `x0` to the nearest complex singularity of
/// `expr`; `INFINITY` for entire functions.
///
/// # Safety
/// `expr` must be NUL-terminated; `x0` must hold `n` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn anaflow_radius_at(
    expr: *const c_char,
    x0: *const f64,
    n: usize,
    t: f64,
    out: *mut f64,
) -> AnaflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = Expression::parse(str_arg(expr, "expr")?, n)?;
        *out = radius_at(&f, slice_arg(x0, n, "x0")?, t, anaflow::extension::DEFAULT_RADIUS_ORDER)?;
        Ok(())
    })
}
