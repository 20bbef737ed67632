//! C ABI over the margulis library: opaque handles, integer status codes,
//! and caller-provided buffers. The header `include/margulis.h` is generated
//! at build time.
//!
//! Thread safety: handles are immutable after construction apart from
//! interior caches guarded by locks, so sharing a handle across threads is
//! safe; freeing a handle while another thread uses it is not.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use margulis::cf::{AngleSpec, CFAngle};
use margulis::hyperbolic::{self, Point4};
use margulis::region::Region;
use margulis::Error;

/// Status codes returned by every fallible function.
pub const MARGULIS_OK: i32 = 0;
/// Malformed spec string or argument out of domain.
pub const MARGULIS_ERR_INPUT: i32 = 1;
/// An internal cross-validation oracle rejected a computed result.
pub const MARGULIS_ERR_VALIDATION: i32 = 2;
/// The requested quantity cannot be certified within the precision budget.
pub const MARGULIS_ERR_PRECISION: i32 = 3;
/// A required pointer argument was null.
pub const MARGULIS_ERR_NULL: i32 = 4;
/// A caller-provided buffer was too small; the required length is reported.
pub const MARGULIS_ERR_BUFFER: i32 = 5;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::InvalidAngle(_) | Error::InvalidArgument(_) => MARGULIS_ERR_INPUT,
        Error::CrossValidation(_) => MARGULIS_ERR_VALIDATION,
        Error::PrecisionBudget(_) | Error::DepthExceeded { .. } => MARGULIS_ERR_PRECISION,
    }
}

fn fail(e: Error) -> i32 {
    let code = status_of(&e);
    set_error(e.to_string());
    code
}

/// Message for the most recent error on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn margulis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Opaque handle to a parsed rotation angle.
pub struct MargulisAngle {
    inner: CFAngle,
}

/// Opaque handle to a Margulis-region computation (angle + threshold ε).
pub struct MargulisRegion {
    inner: Region,
}

/// Parse an angle spec ("1,2,2", "pre:[2];per:[1,3]", "rat:1/3", or a
/// decimal). `depth` 0 selects the default working depth; `guard_depth` 0
/// selects `depth + 10`.
#[no_mangle]
pub unsafe extern "C" fn margulis_angle_parse(
    spec: *const c_char,
    depth: usize,
    guard_depth: usize,
    out: *mut *mut MargulisAngle,
) -> i32 {
    if spec.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    let text = match CStr::from_ptr(spec).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("spec is not valid UTF-8".into());
            return MARGULIS_ERR_INPUT;
        }
    };
    let parsed = AngleSpec::parse_str(text).and_then(|s| {
        CFAngle::parse(
            &s,
            (depth > 0).then_some(depth),
            (guard_depth > 0).then_some(guard_depth),
            None,
        )
    });
    match parsed {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(MargulisAngle { inner }));
            MARGULIS_OK
        }
        Err(e) => fail(e),
    }
}

/// Free an angle handle (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn margulis_angle_free(angle: *mut MargulisAngle) {
    if !angle.is_null() {
        drop(Box::from_raw(angle));
    }
}

/// ‖kθ‖, the distance from kθ to 2πZ.
#[no_mangle]
pub unsafe extern "C" fn margulis_angle_norm(
    angle: *const MargulisAngle,
    k: u64,
    out: *mut f64,
) -> i32 {
    if angle.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    match (*angle).inner.angle_norm(k) {
        Ok(v) => {
            *out = v;
            MARGULIS_OK
        }
        Err(e) => fail(e),
    }
}

/// Closest-return moments up to `k_max`, written into `buf`. On success
/// `*len` is the number written; on MARGULIS_ERR_BUFFER it is the required
/// capacity.
#[no_mangle]
pub unsafe extern "C" fn margulis_closest_returns(
    angle: *const MargulisAngle,
    k_max: u64,
    buf: *mut u64,
    cap: usize,
    len: *mut usize,
) -> i32 {
    if angle.is_null() || buf.is_null() || len.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    let returns = match (*angle).inner.closest_returns(k_max) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    *len = returns.len();
    if returns.len() > cap {
        set_error(format!("need capacity {}, got {cap}", returns.len()));
        return MARGULIS_ERR_BUFFER;
    }
    ptr::copy_nonoverlapping(returns.as_ptr(), buf, returns.len());
    MARGULIS_OK
}

/// Build a region from a spec string and threshold ε. `depth`/`guard_depth`
/// 0 select defaults.
#[no_mangle]
pub unsafe extern "C" fn margulis_region_new(
    spec: *const c_char,
    epsilon: f64,
    depth: usize,
    guard_depth: usize,
    out: *mut *mut MargulisRegion,
) -> i32 {
    if out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    let mut angle: *mut MargulisAngle = ptr::null_mut();
    let code = margulis_angle_parse(spec, depth, guard_depth, &mut angle);
    if code != MARGULIS_OK {
        return code;
    }
    let inner = Box::from_raw(angle).inner;
    match Region::new(inner, epsilon) {
        Ok(region) => {
            *out = Box::into_raw(Box::new(MargulisRegion { inner: region }));
            MARGULIS_OK
        }
        Err(e) => fail(e),
    }
}

/// Free a region handle (null is a no-op).
#[no_mangle]
pub unsafe extern "C" fn margulis_region_free(region: *mut MargulisRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Boundary value b(r) and a minimizing index k.
#[no_mangle]
pub unsafe extern "C" fn margulis_envelope_value(
    region: *const MargulisRegion,
    r: f64,
    b_out: *mut f64,
    k_out: *mut u64,
) -> i32 {
    if region.is_null() || b_out.is_null() || k_out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    match (*region).inner.envelope_value(r) {
        Ok((b, k)) => {
            *b_out = b;
            *k_out = k;
            MARGULIS_OK
        }
        Err(e) => fail(e),
    }
}

/// u_k(r) for one curve of the family.
#[no_mangle]
pub unsafe extern "C" fn margulis_curve_value(
    region: *const MargulisRegion,
    k: u64,
    r: f64,
    out: *mut f64,
) -> i32 {
    if region.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    match (*region).inner.curve_value(k, r) {
        Ok(v) => {
            *out = v;
            MARGULIS_OK
        }
        Err(e) => fail(e),
    }
}

/// Piece decomposition of b on [0, r_max]. Piece m is `indices[m]` active on
/// [breakpoints[m], breakpoints[m+1]); `breakpoints` must hold one more
/// entry than `indices`. On success `*len` is the piece count; on
/// MARGULIS_ERR_BUFFER it is the required capacity for `indices`.
#[no_mangle]
pub unsafe extern "C" fn margulis_decompose(
    region: *const MargulisRegion,
    r_max: f64,
    indices: *mut u64,
    breakpoints: *mut f64,
    cap: usize,
    len: *mut usize,
) -> i32 {
    if region.is_null() || indices.is_null() || breakpoints.is_null() || len.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    let dec = match (*region).inner.decompose(r_max) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    *len = dec.indices.len();
    if dec.indices.len() > cap {
        set_error(format!("need capacity {}, got {cap}", dec.indices.len()));
        return MARGULIS_ERR_BUFFER;
    }
    ptr::copy_nonoverlapping(dec.indices.as_ptr(), indices, dec.indices.len());
    ptr::copy_nonoverlapping(dec.breakpoints.as_ptr(), breakpoints, dec.breakpoints.len());
    MARGULIS_OK
}

/// Hyperbolic distance between upper-half-space points (heights must be
/// positive).
#[no_mangle]
pub unsafe extern "C" fn margulis_dist(
    x1: f64,
    y1: f64,
    z1: f64,
    u1: f64,
    x2: f64,
    y2: f64,
    z2: f64,
    u2: f64,
    out: *mut f64,
) -> i32 {
    if out.is_null() {
        set_error("null pointer argument".into());
        return MARGULIS_ERR_NULL;
    }
    let p = match Point4::new(x1, y1, z1, u1) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let q = match Point4::new(x2, y2, z2, u2) {
        Ok(q) => q,
        Err(e) => return fail(e),
    };
    *out = hyperbolic::dist(p, q);
    MARGULIS_OK
}

/// Height profile a(r) of the model region.
#[no_mangle]
pub extern "C" fn margulis_profile_a(r: f64) -> f64 {
    hyperbolic::profile_a(r)
}
