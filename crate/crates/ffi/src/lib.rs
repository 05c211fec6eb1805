//! C ABI for the amplify-dp accountants.
//!
//! Kernels and distributions cross the boundary as opaque handles created
//! by `adp_*_new` and released by the matching `adp_*_free`. Every fallible
//! function returns an [`AdpStatus`] and writes its result through an out
//! pointer; on failure `adp_last_error_message` describes the error for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use amplify_dp::diffusion::{ou_rdp, plan_ou, OuParams};
use amplify_dp::divergences::{
    hockey_stick, renyi_discrete, renyi_gaussian, total_variation, DpGuarantee,
};
use amplify_dp::iteration::{
    contraction_coeff, iterated_laplace_bound, sgd_epsilon_at_index, SgdConfig,
};
use amplify_dp::mixing::{
    amplify, dobrushin_coeff, doeblin_coeff, eps_dobrushin_coeff, eps_tilde, pushforward,
    ultra_coeff, DiscreteKernel, MixingCondition,
};
use amplify_dp::{DiscreteDist, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidKernel = 3,
    InvalidDistribution = 4,
    DimensionMismatch = 5,
    NumericalFailure = 6,
    /// A bug inside the library; the message carries the panic text.
    Panic = 7,
}

/// Row-stochastic matrix.
pub struct AdpKernel(DiscreteKernel);

/// Discrete distribution over the labels `0..n`.
pub struct AdpDist(DiscreteDist);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdpGuarantee {
    pub epsilon: f64,
    pub delta: f64,
}

/// The four mixing coefficients of a kernel. `eps_dobrushin` is measured at
/// the order requested by the caller.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdpCoefficients {
    pub eps_dobrushin: f64,
    pub dobrushin: f64,
    pub doeblin: f64,
    pub ultra: f64,
}

/// Amplified guarantees of `K ∘ M` under each mixing condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdpAmplification {
    pub dobrushin: AdpGuarantee,
    pub eps_dobrushin: AdpGuarantee,
    pub doeblin: AdpGuarantee,
    pub ultra: AdpGuarantee,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdpSgdConfig {
    pub n: usize,
    pub lipschitz: f64,
    pub beta: f64,
    pub rho: f64,
    pub eta: f64,
    pub sigma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdpOuParams {
    pub theta: f64,
    pub rho: f64,
    pub t: f64,
    pub delta: f64,
    pub radius: f64,
    pub d: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> AdpStatus {
    match err {
        Error::InvalidKernel { .. } => AdpStatus::InvalidKernel,
        Error::InvalidDistribution(_) | Error::SupportMismatch(_) => AdpStatus::InvalidDistribution,
        Error::DimensionMismatch { .. } => AdpStatus::DimensionMismatch,
        Error::QuadratureNonConvergence { .. } => AdpStatus::NumericalFailure,
        Error::InvalidParameter { .. } | Error::MissingCoordinates(_) => AdpStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Fail>>(body: F) -> AdpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AdpStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(&format!("`{name}` is a null pointer"));
            AdpStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            AdpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn adp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn adp_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version has no interior NUL"),
        };
    VERSION.as_ptr()
}

/// Builds a kernel from `n_inputs * n_outputs` row-major entries. Rows may
/// be off unit mass by at most 1e-9 and are renormalized.
///
/// # Safety
/// `rows` must point to `n_inputs * n_outputs` readable doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_kernel_new(
    rows: *const f64,
    n_inputs: usize,
    n_outputs: usize,
    out: *mut *mut AdpKernel,
) -> AdpStatus {
    guard(|| {
        let len = n_inputs
            .checked_mul(n_outputs)
            .ok_or_else(|| Error::InvalidParameter {
                name: "n_outputs",
                reason: "matrix size overflows".into(),
            })?;
        let flat = read_slice(rows, len, "rows")?;
        let matrix: Vec<Vec<f64>> = if n_outputs == 0 {
            vec![Vec::new(); n_inputs]
        } else {
            flat.chunks(n_outputs).map(<[f64]>::to_vec).collect()
        };
        let labels = |n: usize| (0..n).map(|i| i.to_string().as_str().into()).collect();
        let kernel = DiscreteKernel::with_tolerance(
            labels(n_inputs),
            labels(n_outputs),
            matrix,
            amplify_dp::mixing::INPUT_ROW_SUM_TOL,
        )?;
        write(out, Box::into_raw(Box::new(AdpKernel(kernel))), "out")
    })
}

/// # Safety
/// `kernel` must come from `adp_kernel_new` and not be freed already; null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn adp_kernel_free(kernel: *mut AdpKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_kernel_coefficients(
    kernel: *const AdpKernel,
    eps: f64,
    out: *mut AdpCoefficients,
) -> AdpStatus {
    guard(|| {
        let k = &deref(kernel, "kernel")?.0;
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("must be >= 0, got {eps}"),
            }
            .into());
        }
        let c = AdpCoefficients {
            eps_dobrushin: eps_dobrushin_coeff(k, eps),
            dobrushin: dobrushin_coeff(k),
            doeblin: doeblin_coeff(k).gamma,
            ultra: ultra_coeff(k),
        };
        write(out, c, "out")
    })
}

/// Amplifies an `(ε, δ)` guarantee by post-processing with `kernel` under
/// each mixing condition. The (γ,ε)-Dobrushin coefficient is measured at
/// `log(1 + (e^ε − 1)/δ)`.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_amplify(
    kernel: *const AdpKernel,
    epsilon: f64,
    delta: f64,
    out: *mut AdpAmplification,
) -> AdpStatus {
    guard(|| {
        let k = &deref(kernel, "kernel")?.0;
        let g = DpGuarantee::new(epsilon, delta)?;
        let conv = |c: MixingCondition| -> Result<AdpGuarantee, Error> {
            let a = amplify(&g, c)?;
            Ok(AdpGuarantee {
                epsilon: a.epsilon,
                delta: a.delta,
            })
        };
        let result = AdpAmplification {
            dobrushin: conv(MixingCondition::Dobrushin(dobrushin_coeff(k)))?,
            eps_dobrushin: conv(MixingCondition::EpsDobrushin(eps_dobrushin_coeff(
                k,
                eps_tilde(&g),
            )))?,
            doeblin: conv(MixingCondition::Doeblin(doeblin_coeff(k).gamma))?,
            ultra: conv(MixingCondition::Ultra(ultra_coeff(k)))?,
        };
        write(out, result, "out")
    })
}

/// Builds a distribution over the labels `0..n`; `probs` must sum to 1
/// within 1e-12.
///
/// # Safety
/// `probs` must point to `n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_dist_new(
    probs: *const f64,
    n: usize,
    out: *mut *mut AdpDist,
) -> AdpStatus {
    guard(|| {
        let p = read_slice(probs, n, "probs")?;
        let d = DiscreteDist::from_probs(p.to_vec())?;
        write(out, Box::into_raw(Box::new(AdpDist(d))), "out")
    })
}

/// # Safety
/// `dist` must come from this library and not be freed already; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn adp_dist_free(dist: *mut AdpDist) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of support points; 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn adp_dist_len(dist: *const AdpDist) -> usize {
    dist.as_ref().map_or(0, |d| d.0.len())
}

/// Copies the probabilities into `buf`, which must hold `len` doubles with
/// `len` equal to `adp_dist_len(dist)`.
///
/// # Safety
/// `dist` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn adp_dist_probs(
    dist: *const AdpDist,
    buf: *mut f64,
    len: usize,
) -> AdpStatus {
    guard(|| {
        let d = &deref(dist, "dist")?.0;
        if len != d.len() {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                got: len,
            }
            .into());
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        ptr::copy_nonoverlapping(d.probs().as_ptr(), buf, len);
        Ok(())
    })
}

/// `μK` as a new handle.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_pushforward(
    mu: *const AdpDist,
    kernel: *const AdpKernel,
    out: *mut *mut AdpDist,
) -> AdpStatus {
    guard(|| {
        let d = pushforward(&deref(mu, "mu")?.0, &deref(kernel, "kernel")?.0)?;
        write(out, Box::into_raw(Box::new(AdpDist(d))), "out")
    })
}

/// `D_{e^ε}(μ‖ν)`; `eps` may be `INFINITY`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_hockey_stick(
    mu: *const AdpDist,
    nu: *const AdpDist,
    eps: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        let (mu, nu) = (&deref(mu, "mu")?.0, &deref(nu, "nu")?.0);
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("must be >= 0, got {eps}"),
            }
            .into());
        }
        write(out, hockey_stick(mu, nu, eps), "out")
    })
}

/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_total_variation(
    mu: *const AdpDist,
    nu: *const AdpDist,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        write(
            out,
            total_variation(&deref(mu, "mu")?.0, &deref(nu, "nu")?.0),
            "out",
        )
    })
}

/// Rényi divergence of order `alpha > 1` (`INFINITY` allowed).
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_renyi_discrete(
    mu: *const AdpDist,
    nu: *const AdpDist,
    alpha: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        let v = renyi_discrete(&deref(mu, "mu")?.0, &deref(nu, "nu")?.0, alpha)?;
        write(out, v, "out")
    })
}

/// `α‖u − v‖²/(2σ²)` for two points of dimension `dim`.
///
/// # Safety
/// `u` and `v` must point to `dim` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_renyi_gaussian(
    u: *const f64,
    v: *const f64,
    dim: usize,
    sigma2: f64,
    alpha: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        let r = renyi_gaussian(
            read_slice(u, dim, "u")?,
            read_slice(v, dim, "v")?,
            sigma2,
            alpha,
        )?;
        write(out, r, "out")
    })
}

/// Optimized two-stage Laplace Rényi bound.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_iterated_laplace_bound(
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        write(
            out,
            iterated_laplace_bound(delta, lambda1, lambda2, alpha)?.epsilon,
            "out",
        )
    })
}

/// Contraction factor of a gradient step on a β-smooth ρ-strongly convex loss.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_contraction_coeff(
    beta: f64,
    rho: f64,
    eta: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| write(out, contraction_coeff(beta, rho, eta)?, "out"))
}

/// Per-unit-order privacy loss `ε_i` of noisy projected SGD at the 1-based
/// index `i`; the RDP level at order α is `α·ε_i`.
///
/// # Safety
/// `cfg` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_sgd_epsilon(
    cfg: *const AdpSgdConfig,
    i: usize,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let cfg = SgdConfig {
            n: c.n,
            lipschitz: c.lipschitz,
            beta: c.beta,
            rho: c.rho,
            eta: c.eta,
            sigma: c.sigma,
            d: 1,
            radius: 1.0,
        };
        write(out, sgd_epsilon_at_index(&cfg, i)?, "out")
    })
}

fn ou_from(p: &AdpOuParams) -> Result<OuParams, Error> {
    OuParams::new(p.theta, p.rho, p.t, p.delta, p.radius, p.d)
}

/// RDP level `αΛ(t)` of the Ornstein-Uhlenbeck mechanism.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adp_ou_rdp(
    params: *const AdpOuParams,
    alpha: f64,
    out: *mut f64,
) -> AdpStatus {
    guard(|| {
        let p = ou_from(deref(params, "params")?)?;
        write(out, ou_rdp(&p, alpha)?.epsilon, "out")
    })
}

/// OU parameters at `t = 1` meeting the RDP slope `epsilon`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adp_plan_ou(
    epsilon: f64,
    delta: f64,
    radius: f64,
    d: usize,
    out: *mut AdpOuParams,
) -> AdpStatus {
    guard(|| {
        let p = plan_ou(epsilon, delta, radius, d)?;
        let c = AdpOuParams {
            theta: p.theta,
            rho: p.rho,
            t: p.t,
            delta: p.delta,
            radius: p.radius,
            d: p.d,
        };
        write(out, c, "out")
    })
}
