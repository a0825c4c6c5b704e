//! Reproducing kernels of `D(μ)`.
//!
//! For one atom `μ = α δ_λ` the space coincides isometrically with the
//! de Branges–Rovnyak space `H(b_λ)`,
//! `b_λ(z) = (1-a₀) λ̄ z / (1 - a₀ λ̄ z)` with `a₀` the smaller root of
//! `(a₀-1)² = α a₀`, so `k_w(z) = (1 - conj(b(w)) b(z)) / (1 - w̄ z)`.
//! For several atoms the kernel is approximated by the reproducing kernel
//! of the polynomials of degree `≤ N`, obtained from the monomial Gram matrix.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dirichlet::DirichletSpace;
use crate::error::{Error, Result};
use crate::hardy::{BoundaryPoint, Poly, C64};
use crate::linalg::Cholesky;
use crate::measures::{check_inside, AnalyticFunction, AtomicBoundaryMeasure};

/// Smaller root of `(a - 1)² = α a`, i.e. of `a² - (2+α) a + 1 = 0`.
///
/// Computed as `2 / ((2+α) + sqrt(α(4+α)))`, which avoids cancellation for
/// large `α`.
pub fn solve_a0(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    Ok(2.0 / ((2.0 + alpha) + (alpha * (4.0 + alpha)).sqrt()))
}

/// Closed-form kernel data for `μ = α δ_λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneAtomKernelModel {
    pub lambda: BoundaryPoint,
    pub alpha: f64,
    pub a0: f64,
}

impl OneAtomKernelModel {
    pub fn new(lambda: BoundaryPoint, alpha: f64) -> Result<Self> {
        Ok(OneAtomKernelModel {
            lambda,
            alpha,
            a0: solve_a0(alpha)?,
        })
    }

    /// The model of a single-atom measure.
    pub fn from_measure(mu: &AtomicBoundaryMeasure) -> Result<Self> {
        if mu.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "closed-form kernel needs exactly one atom, got {}",
                mu.len()
            )));
        }
        Self::new(mu.points()[0], mu.masses()[0])
    }

    /// `b_λ(z)`.
    pub fn b(&self, z: C64) -> C64 {
        let u = self.lambda.point().conj() * z;
        u * (1.0 - self.a0) / (1.0 - u * self.a0)
    }

    /// `1 - |b_λ(z)|²` in the cancellation-free form
    /// `((1-a)(1-|z|²) + a|λ - z|²) / |1 - a λ̄ z|²`.
    pub fn one_minus_b_sq(&self, z: C64) -> f64 {
        let a = self.a0;
        let lam = self.lambda.point();
        let num = (1.0 - a) * (1.0 - z.norm_sqr()) + a * (lam - z).norm_sqr();
        num / (1.0 - lam.conj() * z * a).norm_sqr()
    }

    /// `k_w(z) = (1 - conj(b(w)) b(z)) / (1 - w̄ z)`.
    pub fn kernel(&self, w: C64, z: C64) -> C64 {
        (1.0 - self.b(w).conj() * self.b(z)) / (1.0 - w.conj() * z)
    }

    /// `‖k_w‖²_μ = k_w(w) = (1 - |b(w)|²) / (1 - |w|²)`.
    pub fn norm_sq(&self, w: C64) -> f64 {
        self.one_minus_b_sq(w) / (1.0 - w.norm_sqr())
    }

    /// `(1 - |b_λ(z)|²) - a₀|z - λ|²/|λ - a₀ z|²`, evaluated literally.
    pub fn inf4_margin(&self, z: C64) -> f64 {
        let lam = self.lambda.point();
        let b = self.b(z);
        (1.0 - b.norm_sqr()) - self.a0 * (z - lam).norm_sqr() / (lam - z * self.a0).norm_sqr()
    }

    /// `(1 - |w|²) / (1 - |b_λ(w)|²)`.
    pub fn angular_ratio(&self, w: C64) -> f64 {
        (1.0 - w.norm_sqr()) / self.one_minus_b_sq(w)
    }

    /// `k_w` as an analytic function of `z`.
    pub fn section(&self, w: C64) -> OneAtomKernel {
        OneAtomKernel { model: *self, w }
    }
}

/// `z ↦ k_w(z)` for a one-atom model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneAtomKernel {
    pub model: OneAtomKernelModel,
    pub w: C64,
}

impl AnalyticFunction for OneAtomKernel {
    fn eval(&self, z: C64) -> C64 {
        self.model.kernel(self.w, z)
    }

    /// `1 - β b(z)` has coefficients `1, -β(1-a) a^{k-1} λ̄^k`; dividing by
    /// `1 - w̄ z` is the recurrence `K_m = c_m + w̄ K_{m-1}`.
    fn taylor(&self, tol: f64) -> Vec<C64> {
        const MAX_TERMS: usize = 20_000_000;
        let a = self.model.a0;
        let lam_bar = self.model.lambda.point().conj();
        let beta = self.model.b(self.w).conj();
        let wb = self.w.conj();
        let rho = self.w.norm().max(a);
        let mut out = vec![C64::new(1.0, 0.0)];
        let mut c = -beta * (1.0 - a) * lam_bar;
        let mut geo = 1.0;
        let mut peak: f64 = 1.0;
        for m in 1..MAX_TERMS {
            let k = c + wb * out[m - 1];
            peak = peak.max(k.norm());
            out.push(k);
            c *= lam_bar * a;
            geo *= rho;
            if geo < tol && k.norm() < tol * peak {
                break;
            }
        }
        out
    }
}

/// Default for `|w|^N` at the largest requested `|w|`. Kernel coefficients
/// decay like `|w|^m`, so the neglected part of `‖k_w‖²` is about `tol²`
/// relative.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-4;

/// `ceil(ln(tol)/ln(r_max)) + 20`, the truncation degree used when kernels
/// are needed up to `|w| ≤ r_max`.
pub fn default_degree(r_max: f64, tol: f64) -> usize {
    let r = r_max.clamp(1e-3, 1.0 - 1e-12);
    (tol.ln() / r.ln()).ceil().max(0.0) as usize + 20
}

/// Reproducing kernels of the polynomials of degree `≤ N` in `D(μ)`, sharing
/// one Cholesky factor of the Gram matrix.
#[derive(Clone, Debug)]
pub struct TruncatedKernelSpace {
    space: DirichletSpace,
    degree: usize,
    factor: Cholesky,
}

impl TruncatedKernelSpace {
    pub fn new(mu: AtomicBoundaryMeasure, degree: usize) -> Result<Self> {
        let space = DirichletSpace::new(mu);
        let factor = space.gram_matrix(degree).cholesky()?;
        Ok(TruncatedKernelSpace {
            space,
            degree,
            factor,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn space(&self) -> &DirichletSpace {
        &self.space
    }

    /// Solve `G conj(c) = (w^m)_m`, so that `⟨z^m, k⟩_μ = w^m` for `m ≤ N`.
    pub fn kernel(&self, w: C64) -> Result<TruncatedKernel> {
        check_inside(w)?;
        let mut rhs = Vec::with_capacity(self.degree + 1);
        let mut pw = C64::new(1.0, 0.0);
        for _ in 0..=self.degree {
            rhs.push(pw);
            pw *= w;
        }
        let x = self.factor.solve(&rhs);
        Ok(TruncatedKernel {
            w,
            degree: self.degree,
            coeffs: Poly::new(x.into_iter().map(|c| c.conj()).collect()),
        })
    }
}

/// The degree-`N` kernel section `k_w^{μ,N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedKernel {
    pub w: C64,
    pub degree: usize,
    pub coeffs: Poly,
}

impl TruncatedKernel {
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.eval(z)
    }

    /// `‖k‖²_μ = k(w)`, exact on the truncated space.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.eval(self.w).re
    }
}

impl AnalyticFunction for TruncatedKernel {
    fn eval(&self, z: C64) -> C64 {
        self.coeffs.eval(z)
    }

    fn taylor(&self, _tol: f64) -> Vec<C64> {
        self.coeffs.coeffs().to_vec()
    }
}

/// One-shot truncated kernel; factors the Gram matrix each call.
pub fn truncated_kernel(mu: &AtomicBoundaryMeasure, w: C64, degree: usize) -> Result<TruncatedKernel> {
    TruncatedKernelSpace::new(mu.clone(), degree)?.kernel(w)
}

/// Unit-norm element of `M_j ⊖ z M_j` within the polynomials of degree
/// `≤ degree`, where `M_j = {f : f(λ_i) = 0 for i ≠ j}`.
///
/// `φ = q - P_{zM_j} q` with `q = ∏_{i≠j} (z - λ_i)`.
pub fn wandering_element(mu: &AtomicBoundaryMeasure, j: usize, degree: usize) -> Result<Poly> {
    if j >= mu.len() {
        return Err(Error::InvalidParameter(format!(
            "atom index {j} out of range for {} atoms",
            mu.len()
        )));
    }
    let others: Vec<BoundaryPoint> = mu
        .points()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, p)| *p)
        .collect();
    if degree < others.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} too small for {} atoms",
            mu.len()
        )));
    }
    let space = DirichletSpace::new(mu.clone());
    let q = Poly::from_roots(&others);
    let basis: Vec<Poly> = (0..degree - others.len())
        .map(|k| &Poly::monomial(k + 1) * &q)
        .collect();
    let d = basis.len();
    let mut h = vec![C64::new(0.0, 0.0); d * d];
    for a in 0..d {
        for b in 0..=a {
            let v = space.inner(&basis[a], &basis[b]);
            h[a * d + b] = v;
            h[b * d + a] = v.conj();
        }
    }
    // Σ_b c_b ⟨e_b, e_a⟩ = ⟨q, e_a⟩, i.e. H conj(c) = conj(⟨q, e_a⟩).
    let rhs: Vec<C64> = basis.iter().map(|e| space.inner(&q, e).conj()).collect();
    let x = Cholesky::factor(&h, d)?.solve(&rhs);
    let mut phi = q;
    for (c, e) in x.iter().zip(&basis) {
        phi = &phi - &e.scale(c.conj());
    }
    let norm = space.norm(&phi);
    Ok(phi.scale(C64::new(1.0 / norm, 0.0)))
}

/// `a_j = α_j |φ_j(λ_j)|²` for the [`wandering_element`] `φ_j`; with
/// `μ_j = a_j δ_{λ_j}` the quotient `k^{μ_j}/k^μ` is positive definite.
pub fn extremal_mass(mu: &AtomicBoundaryMeasure, j: usize, degree: usize) -> Result<f64> {
    let phi = wandering_element(mu, j, degree)?;
    Ok(mu.masses()[j] * phi.eval(mu.points()[j].point()).norm_sqr())
}

/// Where kernels come from: the closed form for one atom, Gram truncation
/// otherwise.
#[derive(Clone, Debug)]
pub enum KernelSource {
    OneAtom(OneAtomKernelModel),
    Truncated(Arc<TruncatedKernelSpace>),
}

/// A kernel `k_w` from either source.
#[derive(Clone, Debug)]
pub enum KernelSection {
    OneAtom(OneAtomKernel),
    Truncated(TruncatedKernel),
}

impl KernelSection {
    pub fn norm_sq(&self) -> f64 {
        match self {
            KernelSection::OneAtom(k) => k.model.norm_sq(k.w),
            KernelSection::Truncated(k) => k.norm_sq(),
        }
    }

    pub fn w(&self) -> C64 {
        match self {
            KernelSection::OneAtom(k) => k.w,
            KernelSection::Truncated(k) => k.w,
        }
    }
}

impl AnalyticFunction for KernelSection {
    fn eval(&self, z: C64) -> C64 {
        match self {
            KernelSection::OneAtom(k) => k.eval(z),
            KernelSection::Truncated(k) => k.eval(z),
        }
    }

    fn taylor(&self, tol: f64) -> Vec<C64> {
        match self {
            KernelSection::OneAtom(k) => k.taylor(tol),
            KernelSection::Truncated(k) => k.taylor(tol),
        }
    }
}

impl KernelSource {
    /// Closed form for one atom; otherwise a truncated space of degree
    /// `degree`, or [`default_degree`]`(r_max, DEFAULT_KERNEL_TOL)` when `None`.
    pub fn for_measure(mu: &AtomicBoundaryMeasure, r_max: f64, degree: Option<usize>) -> Result<Self> {
        if mu.len() == 1 {
            return Ok(KernelSource::OneAtom(OneAtomKernelModel::from_measure(mu)?));
        }
        let n = degree.unwrap_or_else(|| default_degree(r_max, DEFAULT_KERNEL_TOL));
        Ok(KernelSource::Truncated(Arc::new(TruncatedKernelSpace::new(
            mu.clone(),
            n,
        )?)))
    }

    pub fn section(&self, w: C64) -> Result<KernelSection> {
        check_inside(w)?;
        Ok(match self {
            KernelSource::OneAtom(m) => KernelSection::OneAtom(m.section(w)),
            KernelSource::Truncated(t) => KernelSection::Truncated(t.kernel(w)?),
        })
    }
}

/// Kernel of the weighted Dirichlet space `D_α`, `0 ≤ α ≤ 1`:
/// `(1 - w̄z)^{-α}` for `α > 0` and `log(1/(1 - w̄z)) / (w̄z)` for `α = 0`.
pub fn weighted_dirichlet_kernel(alpha: f64, w: C64, z: C64) -> Result<C64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "weighted Dirichlet kernel needs 0 <= alpha <= 1, got {alpha}"
        )));
    }
    let u = w.conj() * z;
    let one = C64::new(1.0, 0.0);
    if alpha > 0.0 {
        return Ok(((one - u).ln() * -alpha).exp());
    }
    if u.norm() < 0.25 {
        // log(1/(1-u))/u = Σ u^k/(k+1)
        let mut term = one;
        let mut s = C64::new(0.0, 0.0);
        for k in 0..20 {
            s += term / (k + 1) as f64;
            term *= u;
        }
        Ok(s)
    } else {
        Ok(-(one - u).ln() / u)
    }
}
