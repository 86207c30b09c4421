//! C ABI over the xscale parameter algebra, test functions and norm engine.
//!
//! Every entry point returns an [`XsStatus`]; on failure a message is kept per
//! thread and can be copied out with [`xs_last_error_message`]. Test functions
//! are opaque [`XsFunction`] handles released with [`xs_function_free`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use xscale::function::{make_angular, make_power_bump, make_radial_bump};
use xscale::lab::{evaluate_instance, LabConfig, Verdict};
use xscale::norm::{weighted_gradient_xnorm, x_norm};
use xscale::params::{
    ckn_targets, compatibility_residual, holder_index, interpolate_pair, sobolev_conjugate, validate_admissible,
};
use xscale::{AnnularDomain, CknTuple, Error, InequalityKind, QuadratureSpec, ReciprocalExponent, SpaceSpec, TestFunction};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument lies outside the domain of the operation.
    Domain = 2,
    /// The parameter tuple fails the admissibility checks of the kind.
    Inadmissible = 3,
    /// Quadrature did not reach its target; the best estimate is still written.
    Accuracy = 4,
    /// Internal failure; the call had no effect.
    Panic = 5,
}

/// Inequality statements, in the order of the library's kind list.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XsKind {
    ClassicalHardy = 0,
    LocalizedHardy = 1,
    GeneralizedSobolev = 2,
    Interpolation = 3,
    HardySobolev = 4,
    GeneralizedCkn = 5,
    EndpointLog = 6,
    EndpointCkn = 7,
    TrudingerMoser = 8,
    KMethod = 9,
}

impl From<XsKind> for InequalityKind {
    fn from(k: XsKind) -> Self {
        InequalityKind::ALL[k as usize]
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XsVerdict {
    Bounded = 0,
    Violated = 1,
    Inconclusive = 2,
}

/// Parameter tuple with reciprocal exponents `s = 1/p`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsTuple {
    pub s_p: f64,
    pub s_r: f64,
    pub s_q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda: f64,
    pub theta: f64,
    pub n: u32,
}

impl From<XsTuple> for CknTuple {
    fn from(t: XsTuple) -> Self {
        CknTuple {
            s_p: ReciprocalExponent::new(t.s_p),
            s_r: ReciprocalExponent::new(t.s_r),
            s_q: ReciprocalExponent::new(t.s_q),
            a: t.a,
            b: t.b,
            c: t.c,
            lambda: t.lambda,
            theta: t.theta,
            n: t.n as usize,
        }
    }
}

/// Quadrature settings; start from [`xs_quadrature_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsQuadrature {
    pub radial_nodes: u32,
    pub sphere_points: u32,
    pub refinement_levels: u32,
    pub target_rel_err: f64,
    pub pair_budget: u32,
    pub seed: u64,
}

impl From<XsQuadrature> for QuadratureSpec {
    fn from(q: XsQuadrature) -> Self {
        QuadratureSpec {
            radial_nodes: q.radial_nodes as usize,
            sphere_points: q.sphere_points as usize,
            refinement_levels: q.refinement_levels as usize,
            target_rel_err: q.target_rel_err,
            pair_budget: q.pair_budget as usize,
            seed: q.seed,
        }
    }
}

/// Norm value with its error estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsNorm {
    pub value: f64,
    pub err_estimate: f64,
    /// Nonzero when the value is a sampled lower bound (sup and Hölder norms).
    pub is_lower_bound: u8,
}

/// Summary of one inequality evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_err: f64,
    /// Upper bound on the best constant, or NaN when none is known.
    pub reference_bound: f64,
    pub verdict: XsVerdict,
}

/// Opaque test function handle.
pub struct XsFunction(TestFunction);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> XsStatus {
    match e {
        Error::Inadmissible(_) => XsStatus::Inadmissible,
        Error::Accuracy { .. } => XsStatus::Accuracy,
        _ => XsStatus::Domain,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), XsStatus>) -> XsStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            XsStatus::Panic
        }
    }
}

fn fail(e: Error) -> XsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null() -> XsStatus {
    set_error("null pointer argument");
    XsStatus::NullPointer
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, v: T) -> Result<(), XsStatus> {
    if p.is_null() {
        return Err(null());
    }
    unsafe { p.write(v) };
    Ok(())
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, XsStatus> {
    unsafe { p.as_ref() }.ok_or_else(null)
}

fn domain(n: u32, rho_in: f64, rho_out: f64) -> Result<AnnularDomain, XsStatus> {
    AnnularDomain::new(n as usize, rho_in, rho_out).map_err(fail)
}

fn quadrature(q: *const XsQuadrature) -> QuadratureSpec {
    // SAFETY: callers pass null or a valid pointer
    unsafe { q.as_ref() }.map_or_else(QuadratureSpec::default, |q| (*q).into())
}

fn norm_out(r: xscale::NormResult) -> XsNorm {
    XsNorm { value: r.value, err_estimate: r.err_estimate, is_lower_bound: u8::from(r.is_lower_bound) }
}

/// Copies the calling thread's last error message, NUL-terminated, into `buf`.
///
/// Returns the message length without the terminator; when that is at least `len`
/// the message was truncated. `buf` may be null to query the length.
///
/// # Safety
/// `buf` is null or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn xs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: n + 1 ≤ len bytes are writable
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                buf.add(n).write(0);
            }
        }
        msg.len()
    })
}

/// Default quadrature settings.
#[no_mangle]
pub extern "C" fn xs_quadrature_default() -> XsQuadrature {
    let q = QuadratureSpec::default();
    XsQuadrature {
        radial_nodes: q.radial_nodes as u32,
        sphere_points: q.sphere_points as u32,
        refinement_levels: q.refinement_levels as u32,
        target_rel_err: q.target_rel_err,
        pair_budget: q.pair_budget as u32,
        seed: q.seed,
    }
}

/// Derivative count and Hölder exponent of a negative reciprocal exponent `s`.
///
/// # Safety
/// `k1` and `alpha` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_holder_index(s: f64, n: u32, k1: *mut u32, alpha: *mut f64) -> XsStatus {
    guard(|| {
        let h = holder_index(ReciprocalExponent::new(s), n as usize).map_err(fail)?;
        unsafe {
            write(k1, h.k1)?;
            write(alpha, h.alpha)
        }
    })
}

/// `1/p* = 1/p − 1/n`.
#[no_mangle]
pub extern "C" fn xs_sobolev_conjugate(s: f64, n: u32) -> f64 {
    sobolev_conjugate(ReciprocalExponent::new(s), n.max(1) as usize).value()
}

/// Interpolated pair `1/q = (1−λ)/p + λ/r`, `b = (1−λ)a + λc`.
///
/// # Safety
/// `s_q` and `b` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_interpolate_pair(
    s_p: f64,
    s_r: f64,
    a: f64,
    c: f64,
    lambda: f64,
    s_q: *mut f64,
    b: *mut f64,
) -> XsStatus {
    guard(|| {
        let (q, bb) =
            interpolate_pair(ReciprocalExponent::new(s_p), ReciprocalExponent::new(s_r), a, c, lambda).map_err(fail)?;
        unsafe {
            write(s_q, q.value())?;
            write(b, bb)
        }
    })
}

/// Target pair `(1/q, b)` of the weighted interpolation inequality with a gradient term.
///
/// # Safety
/// `s_q` and `b` are valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn xs_ckn_targets(
    s_p: f64,
    s_r: f64,
    a: f64,
    c: f64,
    lambda: f64,
    theta: f64,
    n: u32,
    s_q: *mut f64,
    b: *mut f64,
) -> XsStatus {
    guard(|| {
        let (q, bb) =
            ckn_targets(ReciprocalExponent::new(s_p), ReciprocalExponent::new(s_r), a, c, lambda, theta, n as usize)
                .map_err(fail)?;
        unsafe {
            write(s_q, q.value())?;
            write(b, bb)
        }
    })
}

/// Dimensional-balance residual of a tuple (zero for compatible tuples).
///
/// # Safety
/// `tuple` is valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_compatibility_residual(tuple: *const XsTuple, out: *mut f64) -> XsStatus {
    guard(|| unsafe {
        let t = *borrow(tuple)?;
        write(out, compatibility_residual(&t.into()))
    })
}

/// Number of admissibility violations of `tuple` for `kind`; zero means admissible.
/// The violations are joined into the last error message.
///
/// # Safety
/// `tuple` is valid for reads and `count` for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_validate_admissible(kind: XsKind, tuple: *const XsTuple, count: *mut u32) -> XsStatus {
    guard(|| unsafe {
        let t = *borrow(tuple)?;
        let v = validate_admissible(kind.into(), &t.into());
        write(count, v.len() as u32)?;
        set_error(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
        Ok(())
    })
}

fn boxed(u: TestFunction, out: *mut *mut XsFunction) -> Result<(), XsStatus> {
    let ptr = Box::into_raw(Box::new(XsFunction(u)));
    // SAFETY: checked by `write`; on failure the box is reclaimed
    match unsafe { write(out, ptr) } {
        Ok(()) => Ok(()),
        Err(s) => {
            drop(unsafe { Box::from_raw(ptr) });
            Err(s)
        }
    }
}

/// Smooth radial bump `exp(−σ/(1 − t²))` on the annulus `rho_in < |x| < rho_out` in dimension `n`.
///
/// # Safety
/// `out` is valid for writes; the handle must be released with [`xs_function_free`].
#[no_mangle]
pub unsafe extern "C" fn xs_function_radial_bump(
    n: u32,
    rho_in: f64,
    rho_out: f64,
    sharpness: f64,
    out: *mut *mut XsFunction,
) -> XsStatus {
    guard(|| boxed(make_radial_bump(domain(n, rho_in, rho_out)?, sharpness).map_err(fail)?, out))
}

/// `|x|^β` with smooth cutoffs over a fraction `cut_fraction` of the log-radius range at both ends.
///
/// # Safety
/// `out` is valid for writes; the handle must be released with [`xs_function_free`].
#[no_mangle]
pub unsafe extern "C" fn xs_function_power_bump(
    n: u32,
    rho_in: f64,
    rho_out: f64,
    beta: f64,
    cut_fraction: f64,
    out: *mut *mut XsFunction,
) -> XsStatus {
    guard(|| boxed(make_power_bump(domain(n, rho_in, rho_out)?, beta, cut_fraction).map_err(fail)?, out))
}

/// Multiplies a radial function by `Re[(x₁ + i x₂)^m]/|x|^m`.
///
/// # Safety
/// `base` is a live handle and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_function_angular(base: *const XsFunction, mode: u32, out: *mut *mut XsFunction) -> XsStatus {
    guard(|| {
        let b = unsafe { borrow(base)? };
        boxed(make_angular(&b.0, mode).map_err(fail)?, out)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `f` is null or a handle not yet released.
#[no_mangle]
pub unsafe extern "C" fn xs_function_free(f: *mut XsFunction) {
    if !f.is_null() {
        drop(unsafe { Box::from_raw(f) });
    }
}

fn point<'a>(x: *const f64, dim: u32, f: &XsFunction) -> Result<&'a [f64], XsStatus> {
    if x.is_null() {
        return Err(null());
    }
    if dim as usize != f.0.support.n {
        set_error(format!("point has {dim} coordinates, function lives in dimension {}", f.0.support.n));
        return Err(XsStatus::Domain);
    }
    // SAFETY: x is valid for `dim` reads per the caller contract
    Ok(unsafe { std::slice::from_raw_parts(x, dim as usize) })
}

/// `u(x)` for a point with `dim` coordinates.
///
/// # Safety
/// `f` is a live handle, `x` is valid for `dim` reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_function_eval(f: *const XsFunction, x: *const f64, dim: u32, out: *mut f64) -> XsStatus {
    guard(|| unsafe {
        let f = borrow(f)?;
        let x = point(x, dim, f)?;
        write(out, f.0.evaluate(x))
    })
}

/// `∇u(x)` written to `grad` (`dim` entries).
///
/// # Safety
/// `f` is a live handle, `x` is valid for `dim` reads and `grad` for `dim` writes.
#[no_mangle]
pub unsafe extern "C" fn xs_function_gradient(f: *const XsFunction, x: *const f64, dim: u32, grad: *mut f64) -> XsStatus {
    guard(|| unsafe {
        let f = borrow(f)?;
        let x = point(x, dim, f)?;
        if grad.is_null() {
            return Err(null());
        }
        let out = std::slice::from_raw_parts_mut(grad, dim as usize);
        f.0.gradient_into(x, out);
        Ok(())
    })
}

/// Writes the result, also on accuracy failure (then holding the best estimate).
fn norm_result(r: xscale::Result<xscale::NormResult>, out: *mut XsNorm) -> Result<(), XsStatus> {
    match r {
        Ok(v) => unsafe { write(out, norm_out(v)) },
        Err(Error::Accuracy { message, best }) => {
            unsafe { write(out, norm_out(best))? };
            Err(fail(Error::Accuracy { message, best }))
        }
        Err(e) => Err(fail(e)),
    }
}

/// `‖|x|^{−a} u‖` on the scale at `s = 1/p ∈ (−1/n, 1]` over the function's own annulus.
/// `quad` may be null for defaults.
///
/// # Safety
/// `f` is a live handle, `quad` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_x_norm(
    f: *const XsFunction,
    s: f64,
    a: f64,
    quad: *const XsQuadrature,
    out: *mut XsNorm,
) -> XsStatus {
    guard(|| {
        let f = unsafe { borrow(f)? };
        let spec = SpaceSpec::zero(s, a);
        norm_result(x_norm(&f.0, &spec, &f.0.support, &quadrature(quad)), out)
    })
}

/// `‖|x|^{−a} ∇u‖` on the scale at `s = 1/p`.
///
/// # Safety
/// `f` is a live handle, `quad` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_gradient_xnorm(
    f: *const XsFunction,
    s: f64,
    a: f64,
    quad: *const XsQuadrature,
    out: *mut XsNorm,
) -> XsStatus {
    guard(|| {
        let f = unsafe { borrow(f)? };
        let r = weighted_gradient_xnorm(&f.0, a, ReciprocalExponent::new(s), &f.0.support, &quadrature(quad));
        norm_result(r, out)
    })
}

/// Evaluates one inequality on a test function with default lab settings and the given quadrature.
///
/// # Safety
/// `tuple` and `f` are valid, `quad` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xs_evaluate_instance(
    kind: XsKind,
    tuple: *const XsTuple,
    f: *const XsFunction,
    quad: *const XsQuadrature,
    out: *mut XsReport,
) -> XsStatus {
    guard(|| {
        let (t, f) = unsafe { (*borrow(tuple)?, borrow(f)?) };
        let cfg = LabConfig { quadrature: quadrature(quad), ..Default::default() };
        let r = evaluate_instance(kind.into(), &t.into(), &f.0, &f.0.support, &cfg).map_err(fail)?;
        let verdict = match r.verdict {
            Verdict::Bounded => XsVerdict::Bounded,
            Verdict::Violated => XsVerdict::Violated,
            Verdict::Inconclusive => XsVerdict::Inconclusive,
        };
        let rep = XsReport {
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.empirical_ratio,
            ratio_err: r.ratio_err,
            reference_bound: r.reference_bound.unwrap_or(f64::NAN),
            verdict,
        };
        unsafe { write(out, rep) }
    })
}
