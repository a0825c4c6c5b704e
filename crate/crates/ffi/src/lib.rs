//! C ABI for `dmu-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every function returns a [`DmuStatus`];
//! on failure [`dmu_last_error_message`] describes the cause on the calling
//! thread. Panics are caught and reported as `DMU_STATUS_PANIC`.
//!
//! Strings returned through `char **` out-parameters are owned by the caller
//! and must be released with [`dmu_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dmu_core::carleson::{dmu_carleson_test, h2_box_sup, rkt_scan, BoxScanConfig, RktGridConfig};
use dmu_core::{
    AnalyticFunction, AtomicBoundaryMeasure, BoundaryPoint, DirichletSpace, Error, KernelSource,
    PlanarMeasure, Poly, C64,
};

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDisk = 3,
    Numerical = 4,
    Parse = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Polynomial with complex coefficients.
pub struct DmuPoly(Poly);

/// Finite atomic measure on the unit circle.
pub struct DmuMeasure(AtomicBoundaryMeasure);

/// Reproducing kernels of `D(μ)`: closed form for one atom, Gram-truncated
/// otherwise.
pub struct DmuKernel(KernelSource);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(DmuStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::OutsideDisk { .. } => DmuStatus::OutsideDisk,
            _ if e.is_numerical() => DmuStatus::Numerical,
            _ => DmuStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> DmuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmuStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
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
            DmuStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DmuStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(DmuStatus::Parse, format!("{what} is not UTF-8: {e}")))
}

fn parse<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T, Fail> {
    serde_json::from_str(s).map_err(|e| Fail(DmuStatus::Parse, format!("invalid {what}: {e}")))
}

fn give_string(s: String, dst: &mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail(DmuStatus::InvalidArgument, e.to_string()))?;
    *dst = c.into_raw();
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dmu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread, or null if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dmu_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dmu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Polynomial from `len` coefficients in ascending degree.
///
/// # Safety
/// `re` and `im` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_poly_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    out_poly: *mut *mut DmuPoly,
) -> DmuStatus {
    guard(|| {
        let dst = out(out_poly, "out_poly")?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        if let Some(c) = re.iter().chain(im).find(|c| !c.is_finite()) {
            return Err(Fail(
                DmuStatus::InvalidArgument,
                format!("coefficient {c} is not finite"),
            ));
        }
        let coeffs = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        *dst = Box::into_raw(Box::new(DmuPoly(Poly::new(coeffs))));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dmu_poly_free(p: *mut DmuPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of stored coefficients (degree + 1, or 0 for the zero polynomial).
///
/// # Safety
/// `p` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn dmu_poly_len(p: *const DmuPoly, out_len: *mut usize) -> DmuStatus {
    guard(|| {
        *out(out_len, "out_len")? = get(p, "poly")?.0.coeffs().len();
        Ok(())
    })
}

/// Copy the coefficients into `re`/`im`, which hold `cap` doubles each.
///
/// # Safety
/// `p` must be a valid handle; `re` and `im` must be writable for `cap`.
#[no_mangle]
pub unsafe extern "C" fn dmu_poly_coeffs(
    p: *const DmuPoly,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> DmuStatus {
    guard(|| {
        let c = get(p, "poly")?.0.coeffs();
        if c.len() > cap {
            return Err(Fail(
                DmuStatus::BufferTooSmall,
                format!("need {} coefficients, capacity {cap}", c.len()),
            ));
        }
        if c.is_empty() {
            return Ok(());
        }
        if re.is_null() || im.is_null() {
            return Err(null("coefficient buffer"));
        }
        for (k, z) in c.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `p` must be a valid handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_poly_eval(
    p: *const DmuPoly,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DmuStatus {
    guard(|| {
        let v = get(p, "poly")?.0.eval(C64::new(re, im));
        *out(out_re, "out_re")? = v.re;
        *out(out_im, "out_im")? = v.im;
        Ok(())
    })
}

/// Measure `Σ masses[j] δ_{exp(i angles[j])}`.
///
/// # Safety
/// `angles` and `masses` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_measure_new(
    angles: *const f64,
    masses: *const f64,
    len: usize,
    out_measure: *mut *mut DmuMeasure,
) -> DmuStatus {
    guard(|| {
        let dst = out(out_measure, "out_measure")?;
        let (a, m) = (slice(angles, len, "angles")?, slice(masses, len, "masses")?);
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(Fail(
                DmuStatus::InvalidArgument,
                format!("angle {x} is not finite"),
            ));
        }
        let atoms = a
            .iter()
            .zip(m)
            .map(|(&t, &w)| (BoundaryPoint::new(t), w))
            .collect();
        let mu = AtomicBoundaryMeasure::new(atoms)?;
        *dst = Box::into_raw(Box::new(DmuMeasure(mu)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dmu_measure_free(m: *mut DmuMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `‖f‖²_μ`, `‖f‖²_{H²}` and `D_μ(f)`. Any output may be null.
///
/// # Safety
/// Handles must be valid; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_norm(
    mu: *const DmuMeasure,
    f: *const DmuPoly,
    out_norm_sq: *mut f64,
    out_h2_norm_sq: *mut f64,
    out_dirichlet: *mut f64,
) -> DmuStatus {
    guard(|| {
        let (mu, f) = (get(mu, "measure")?, get(f, "poly")?);
        let space = DirichletSpace::new(mu.0.clone());
        let d = space.dirichlet(&f.0);
        let h2 = f.0.h2_norm_sq();
        for (p, v) in [(out_norm_sq, h2 + d), (out_h2_norm_sq, h2), (out_dirichlet, d)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Local Dirichlet integral `D_λ(f)` at `λ = exp(i angle)`.
///
/// # Safety
/// `f` must be valid; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_local_dirichlet(
    f: *const DmuPoly,
    angle: f64,
    out_value: *mut f64,
) -> DmuStatus {
    guard(|| {
        let f = get(f, "poly")?;
        if !angle.is_finite() {
            return Err(Fail(DmuStatus::InvalidArgument, format!("angle {angle} is not finite")));
        }
        *out(out_value, "out_value")? = dmu_core::local_dirichlet(&f.0, BoundaryPoint::new(angle));
        Ok(())
    })
}

/// `f = p + ∏(z - λ_j) g`; both outputs are new handles.
///
/// # Safety
/// Handles must be valid; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_decompose(
    mu: *const DmuMeasure,
    f: *const DmuPoly,
    out_p: *mut *mut DmuPoly,
    out_g: *mut *mut DmuPoly,
) -> DmuStatus {
    guard(|| {
        let (mu, f) = (get(mu, "measure")?, get(f, "poly")?);
        let (dp, dg) = (out(out_p, "out_p")?, out(out_g, "out_g")?);
        let d = DirichletSpace::new(mu.0.clone()).decompose(&f.0)?;
        *dp = Box::into_raw(Box::new(DmuPoly(d.p)));
        *dg = Box::into_raw(Box::new(DmuPoly(d.g)));
        Ok(())
    })
}

/// Kernel family of `D(μ)`. For more than one atom the kernels are truncated
/// at `degree`, or at the automatic degree for `|w| ≤ r_max` when `degree`
/// is 0.
///
/// # Safety
/// `mu` must be valid; `out_kernel` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_kernel_new(
    mu: *const DmuMeasure,
    degree: usize,
    r_max: f64,
    out_kernel: *mut *mut DmuKernel,
) -> DmuStatus {
    guard(|| {
        let mu = get(mu, "measure")?;
        let dst = out(out_kernel, "out_kernel")?;
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Fail(
                DmuStatus::InvalidArgument,
                format!("r_max must lie in (0, 1), got {r_max}"),
            ));
        }
        let n = (degree > 0).then_some(degree);
        if n.is_some_and(|n| n > dmu_core::carleson::MAX_TRUNCATION_DEGREE) {
            return Err(Fail(
                DmuStatus::InvalidArgument,
                format!("degree {degree} exceeds the truncation limit"),
            ));
        }
        let src = KernelSource::for_measure(&mu.0, r_max, n)?;
        *dst = Box::into_raw(Box::new(DmuKernel(src)));
        Ok(())
    })
}

/// # Safety
/// `k` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dmu_kernel_free(k: *mut DmuKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Truncation degree, or 0 for the closed-form one-atom kernel.
///
/// # Safety
/// `k` must be valid; `out_degree` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_kernel_degree(k: *const DmuKernel, out_degree: *mut usize) -> DmuStatus {
    guard(|| {
        *out(out_degree, "out_degree")? = match &get(k, "kernel")?.0 {
            KernelSource::OneAtom(_) => 0,
            KernelSource::Truncated(t) => t.degree(),
        };
        Ok(())
    })
}

/// `k_w(z)`.
///
/// # Safety
/// `k` must be valid; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_kernel_eval(
    k: *const DmuKernel,
    w_re: f64,
    w_im: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DmuStatus {
    guard(|| {
        let k = get(k, "kernel")?;
        let (dr, di) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let z = C64::new(z_re, z_im);
        if z.norm().is_nan() || z.norm() >= 1.0 {
            return Err(Error::OutsideDisk {
                re: z.re,
                im: z.im,
                modulus: z.norm(),
            }
            .into());
        }
        let v = k.0.section(C64::new(w_re, w_im))?.eval(z);
        *dr = v.re;
        *di = v.im;
        Ok(())
    })
}

/// `‖k_w‖²_μ`.
///
/// # Safety
/// `k` must be valid; `out_norm_sq` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_kernel_norm_sq(
    k: *const DmuKernel,
    w_re: f64,
    w_im: f64,
    out_norm_sq: *mut f64,
) -> DmuStatus {
    guard(|| {
        let k = get(k, "kernel")?;
        let dst = out(out_norm_sq, "out_norm_sq")?;
        *dst = k.0.section(C64::new(w_re, w_im))?.norm_sq();
        Ok(())
    })
}

/// Carleson box scan of a planar measure given as JSON. With `mu_json` null
/// the `H²` condition is tested, otherwise the `D(μ)` condition. `config_json`
/// may be null for the default grid. Writes the scan report as JSON.
///
/// # Safety
/// Non-null strings must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_carleson_json(
    nu_json: *const c_char,
    mu_json: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DmuStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        let nu: PlanarMeasure = parse(c_str(nu_json, "nu_json")?, "planar measure")?;
        let cfg: BoxScanConfig = if config_json.is_null() {
            BoxScanConfig::default()
        } else {
            parse(c_str(config_json, "config_json")?, "scan config")?
        };
        let report = if mu_json.is_null() {
            h2_box_sup(&nu, &cfg)?
        } else {
            let mu: AtomicBoundaryMeasure = parse(c_str(mu_json, "mu_json")?, "boundary measure")?;
            dmu_carleson_test(&nu, &mu, &cfg)?
        };
        give_string(serde_json::to_string(&report).expect("reports serialize"), dst)
    })
}

/// Reproducing-kernel scan of `ν` in `D(μ)`, both given as JSON.
/// `config_json` may be null for the default grid of `μ`.
///
/// # Safety
/// Non-null strings must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmu_rkt_json(
    nu_json: *const c_char,
    mu_json: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DmuStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        let nu: PlanarMeasure = parse(c_str(nu_json, "nu_json")?, "planar measure")?;
        let mu: AtomicBoundaryMeasure = parse(c_str(mu_json, "mu_json")?, "boundary measure")?;
        let cfg: RktGridConfig = if config_json.is_null() {
            RktGridConfig::default_for(&mu)
        } else {
            parse(c_str(config_json, "config_json")?, "kernel grid config")?
        };
        let report = rkt_scan(&nu, &mu, &cfg)?;
        give_string(serde_json::to_string(&report).expect("reports serialize"), dst)
    })
}
