//! C ABI over `blocking_jacobi`.
//!
//! Every fallible function returns a `BjStatus`; results come back through
//! out-pointers. Objects are opaque handles freed with their `*_free`
//! function. Strings returned as `char *` are owned by the caller and freed
//! with `bj_string_free`. After a non-OK status, `bj_last_error` gives a
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blocking_jacobi::gfp::{self, Gfp};
use blocking_jacobi::identities::{check_by_id, IdentityReport};
use blocking_jacobi::normalizers::{s_even, s_k, s_odd};
use blocking_jacobi::series::{product_rhs, FactorSpec, TruncatedSeries};
use blocking_jacobi::standup::OmegaState;
use blocking_jacobi::Error;
use num_traits::ToPrimitive;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Parameter = 4,
    InvalidState = 5,
    InvalidGfp = 6,
    InvalidRates = 7,
    Series = 8,
    NonConvergence = 9,
    OutOfRange = 10,
    Overflow = 11,
    Panic = 12,
}

/// Product sides available to `bj_series_product`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BjProduct {
    K2Plus = 0,
    K2Minus = 1,
    KExclusion = 2,
    JacobiShifted = 3,
    JacobiClassical = 4,
}

/// A truncated series in q~, t and z with integer coefficients.
pub struct BjSeries {
    inner: TruncatedSeries,
}

/// A generalized Frobenius partition.
pub struct BjGfp {
    inner: Gfp,
}

/// A stood-up state (omega_{-1}, omega_{-2}, ...) in class m.
pub struct BjOmega {
    inner: OmegaState,
}

/// Result of an identity check.
pub struct BjReport {
    inner: IdentityReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> BjStatus {
    match e {
        Error::Parse(_) => BjStatus::Parse,
        Error::Parameter(_) | Error::ClassMismatch { .. } => BjStatus::Parameter,
        Error::InvalidState(_) => BjStatus::InvalidState,
        Error::InvalidGfp(_) | Error::InvalidDiagram(_) => BjStatus::InvalidGfp,
        Error::InvalidRates(_) | Error::Reducible(_) => BjStatus::InvalidRates,
        Error::DivergentProduct { .. }
        | Error::SubstitutionBound { .. }
        | Error::InsufficientOrder { .. }
        | Error::NotZFree(_) => BjStatus::Series,
        Error::NonStabilization(_) | Error::NonConvergence(_) => BjStatus::NonConvergence,
    }
}

fn fail(status: BjStatus, msg: impl Into<String>) -> BjStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BjStatus>) -> BjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BjStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BjStatus::Panic, msg)
        }
    }
}

fn lib<T>(r: blocking_jacobi::Result<T>) -> Result<T, BjStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), BjStatus> {
    if p.is_null() {
        Err(fail(BjStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, BjStatus> {
    nonnull(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| fail(BjStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const u32, len: usize, what: &str) -> Result<&'a [u32], BjStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    nonnull(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn bj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// S_even to q~-order `order`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bj_series_s_even(order: u32, out: *mut *mut BjSeries) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        put(out, BjSeries { inner: lib(s_even(order))?.series });
        Ok(())
    })
}

/// S_odd to q~-order `order`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bj_series_s_odd(order: u32, out: *mut *mut BjSeries) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        put(out, BjSeries { inner: lib(s_odd(order))?.series });
        Ok(())
    })
}

/// k-exclusion normalizer of class m to q-order `order`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bj_series_s_k(k: u32, m: u32, order: u32, out: *mut *mut BjSeries) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        put(out, BjSeries { inner: lib(s_k(k, m, order))?.series });
        Ok(())
    })
}

/// Expansion of a product side; `k` is used only by `KExclusion`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bj_series_product(
    product: BjProduct,
    k: u32,
    order: u32,
    out: *mut *mut BjSeries,
) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        let spec = match product {
            BjProduct::K2Plus => FactorSpec::k2(1),
            BjProduct::K2Minus => FactorSpec::k2(-1),
            BjProduct::KExclusion => {
                if k == 0 {
                    return Err(fail(BjStatus::Parameter, "k must be positive"));
                }
                FactorSpec::k_exclusion(k)
            }
            BjProduct::JacobiShifted => FactorSpec::jacobi_shifted(),
            BjProduct::JacobiClassical => FactorSpec::jacobi_classical(),
        };
        put(out, BjSeries { inner: lib(product_rhs(&spec, order))? });
        Ok(())
    })
}

/// Number of nonzero terms.
///
/// # Safety
/// `s` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_series_len(s: *const BjSeries) -> usize {
    s.as_ref().map_or(0, |s| s.inner.len())
}

/// Truncation order in q~.
///
/// # Safety
/// `s` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_series_order(s: *const BjSeries) -> u32 {
    s.as_ref().map_or(0, |s| s.inner.order())
}

/// The `index`-th term in canonical order. The coefficient is written to
/// `coeff` when it fits in 64 bits; otherwise `Overflow` is returned and
/// `bj_series_coeff_string` gives the exact value.
///
/// # Safety
/// `s` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_series_term(
    s: *const BjSeries,
    index: usize,
    dq: *mut u32,
    dt: *mut u32,
    dz: *mut i32,
    coeff: *mut i64,
) -> BjStatus {
    guard(|| {
        nonnull(s, "series")?;
        for (p, name) in [(dq as *const u8, "dq"), (dt.cast(), "dt"), (dz.cast(), "dz"), (coeff.cast(), "coeff")] {
            nonnull(p, name)?;
        }
        let (m, c) = (*s)
            .inner
            .terms()
            .iter()
            .nth(index)
            .ok_or_else(|| fail(BjStatus::OutOfRange, format!("term {index} out of range")))?;
        *dq = m.dq;
        *dt = m.dt;
        *dz = m.dz;
        *coeff = c.to_i64().ok_or_else(|| fail(BjStatus::Overflow, format!("coefficient {c} exceeds 64 bits")))?;
        Ok(())
    })
}

/// Exact decimal coefficient of the `index`-th term; free with `bj_string_free`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_series_coeff_string(s: *const BjSeries, index: usize, out: *mut *mut c_char) -> BjStatus {
    guard(|| {
        nonnull(s, "series")?;
        nonnull(out, "out")?;
        let (_, c) = (*s)
            .inner
            .terms()
            .iter()
            .nth(index)
            .ok_or_else(|| fail(BjStatus::OutOfRange, format!("term {index} out of range")))?;
        *out = owned_string(c.to_string());
        Ok(())
    })
}

/// JSON records `[{dq, dt, dz, coeff}]`; free with `bj_string_free`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_series_to_json(s: *const BjSeries, out: *mut *mut c_char) -> BjStatus {
    guard(|| {
        nonnull(s, "series")?;
        nonnull(out, "out")?;
        *out = owned_string((*s).inner.to_json());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bj_series_free(s: *mut BjSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Builds a GFP with repetition bound `k` from its two rows.
///
/// # Safety
/// Row pointers must reference `*_len` values (may be null when the length is 0).
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_new(
    k: u32,
    top: *const u32,
    top_len: usize,
    bottom: *const u32,
    bottom_len: usize,
    out: *mut *mut BjGfp,
) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        let top = slice_arg(top, top_len, "top")?.to_vec();
        let bottom = slice_arg(bottom, bottom_len, "bottom")?.to_vec();
        put(out, BjGfp { inner: lib(Gfp::new(k, top, bottom))? });
        Ok(())
    })
}

/// Parses "(a b ; c d)".
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_parse(text: *const c_char, k: u32, out: *mut *mut BjGfp) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        let t = str_arg(text, "text")?;
        put(out, BjGfp { inner: lib(blocking_jacobi::cli::parse_gfp(t, k))? });
        Ok(())
    })
}

/// Offset (top length minus bottom length).
///
/// # Safety
/// `g` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_offset(g: *const BjGfp) -> i64 {
    g.as_ref().map_or(0, |g| g.inner.offset())
}

/// Weight (row count plus all entries).
///
/// # Safety
/// `g` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_weight(g: *const BjGfp) -> u64 {
    g.as_ref().map_or(0, |g| g.inner.weight())
}

/// "(a b ; c d)"; free with `bj_string_free`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_to_string(g: *const BjGfp, out: *mut *mut c_char) -> BjStatus {
    guard(|| {
        nonnull(g, "gfp")?;
        nonnull(out, "out")?;
        *out = owned_string((*g).inner.to_string());
        Ok(())
    })
}

/// Moves a GFP to another offset of the same class mod k.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_phi(g: *const BjGfp, new_offset: i64, out: *mut *mut BjGfp) -> BjStatus {
    guard(|| {
        nonnull(g, "gfp")?;
        nonnull(out, "out")?;
        put(out, BjGfp { inner: lib(gfp::phi_to_offset(&(*g).inner, new_offset))? });
        Ok(())
    })
}

/// Frobenius symbol of an ordinary partition.
///
/// # Safety
/// `parts` must reference `len` values.
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_frobenius(parts: *const u32, len: usize, out: *mut *mut BjGfp) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        put(out, BjGfp { inner: lib(gfp::frobenius(slice_arg(parts, len, "parts")?))? });
        Ok(())
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bj_gfp_free(g: *mut BjGfp) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Stood-up state of class `m` from omega_{-1}, omega_{-2}, ...
///
/// # Safety
/// `vals` must reference `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_omega_new(
    k: u32,
    m: u32,
    vals: *const u32,
    len: usize,
    out: *mut *mut BjOmega,
) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        let v = slice_arg(vals, len, "vals")?.to_vec();
        put(out, BjOmega { inner: lib(OmegaState::new(k, m, v))? });
        Ok(())
    })
}

/// Number of stored sites after canonicalization.
///
/// # Safety
/// `w` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_omega_len(w: *const BjOmega) -> usize {
    w.as_ref().map_or(0, |w| w.inner.vals().len())
}

/// Copies up to `cap` stored values into `buf` and writes the full length to `len`.
///
/// # Safety
/// `w` must be a live handle; `buf` must hold `cap` values; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_omega_values(w: *const BjOmega, buf: *mut u32, cap: usize, len: *mut usize) -> BjStatus {
    guard(|| {
        nonnull(w, "omega")?;
        nonnull(len, "len")?;
        let v = (*w).inner.vals();
        *len = v.len();
        let n = v.len().min(cap);
        if n > 0 {
            nonnull(buf, "buf")?;
            ptr::copy_nonoverlapping(v.as_ptr(), buf, n);
        }
        Ok(())
    })
}

/// # Safety
/// `w` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bj_omega_free(w: *mut BjOmega) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Bijection from stood-up states to GFPs.
///
/// # Safety
/// `w` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_psi(w: *const BjOmega, out: *mut *mut BjGfp) -> BjStatus {
    guard(|| {
        nonnull(w, "omega")?;
        nonnull(out, "out")?;
        put(out, BjGfp { inner: lib(gfp::psi(&(*w).inner))? });
        Ok(())
    })
}

/// Inverse of `bj_psi`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_psi_inverse(g: *const BjGfp, out: *mut *mut BjOmega) -> BjStatus {
    guard(|| {
        nonnull(g, "gfp")?;
        nonnull(out, "out")?;
        put(out, BjOmega { inner: lib(gfp::psi_inverse(&(*g).inner))? });
        Ok(())
    })
}

/// Runs an identity check by id (same ids as the command line).
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_verify(id: *const c_char, order: u32, z_window: u32, out: *mut *mut BjReport) -> BjStatus {
    guard(|| {
        nonnull(out, "out")?;
        let id = str_arg(id, "id")?;
        put(out, BjReport { inner: lib(check_by_id(id, order, z_window))? });
        Ok(())
    })
}

/// Whether both sides agreed on every compared coefficient.
///
/// # Safety
/// `r` must be a live handle or null (returns false).
#[no_mangle]
pub unsafe extern "C" fn bj_report_equal(r: *const BjReport) -> bool {
    r.as_ref().is_some_and(|r| r.inner.equal)
}

/// Number of coefficient-series comparisons made.
///
/// # Safety
/// `r` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bj_report_comparisons(r: *const BjReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.comparisons)
}

/// Report as JSON; free with `bj_string_free`.
///
/// # Safety
/// `r` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bj_report_to_json(r: *const BjReport, out: *mut *mut c_char) -> BjStatus {
    guard(|| {
        nonnull(r, "report")?;
        nonnull(out, "out")?;
        *out = owned_string((*r).inner.to_json());
        Ok(())
    })
}

/// # Safety
/// `r` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bj_report_free(r: *mut BjReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
