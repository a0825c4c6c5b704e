//! The space `D(μ)` for finitely atomic `μ`.
//!
//! `‖f‖²_μ = ‖f‖²₂ + D_μ(f)` with `D_μ(f) = Σ α_j D_{λ_j}(f)` and
//! `D_λ(f) = ‖(f - f(λ))/(z - λ)‖²₂`. The area form
//! `∫ |f'|² P_μ dA` is computed independently by quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{lagrange_interp, BoundaryPoint, Poly, C64};
use crate::linalg::Cholesky;
use crate::measures::AtomicBoundaryMeasure;
use crate::quadrature::{DiskQuadrature, Integral};

/// `D_λ(f)`.
pub fn local_dirichlet(f: &Poly, lambda: BoundaryPoint) -> f64 {
    f.divided_quotient(lambda).h2_norm_sq()
}

/// Polarized local Dirichlet form `⟨Δ_λ f, Δ_λ g⟩₂`.
pub fn local_dirichlet_form(f: &Poly, g: &Poly, lambda: BoundaryPoint) -> C64 {
    f.divided_quotient(lambda)
        .h2_inner(&g.divided_quotient(lambda))
}

/// `f = p + ∏(z - λ_j) g` with `deg p ≤ n - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub p: Poly,
    pub g: Poly,
}

impl Decomposition {
    /// `p + ∏(z - λ_j) g`.
    pub fn reconstruct(&self, roots: &[BoundaryPoint]) -> Poly {
        &self.p + &(&Poly::from_roots(roots) * &self.g)
    }
}

/// Monomial Gram matrix `G[m][k] = ⟨z^m, z^k⟩_μ` for `0 ≤ m, k ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<C64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, m: usize, k: usize) -> C64 {
        self.entries[m * self.size + k]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.entries.chunks(self.size).map(<[C64]>::to_vec).collect()
    }

    /// Largest `|G[m][k] - conj(G[k][m])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size;
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in 0..m {
                worst = worst.max((self.get(m, k) - self.get(k, m).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(&self.entries, self.size)
    }
}

/// The Hilbert space `D(μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpace {
    mu: AtomicBoundaryMeasure,
}

impl DirichletSpace {
    pub fn new(mu: AtomicBoundaryMeasure) -> Self {
        DirichletSpace { mu }
    }

    pub fn mu(&self) -> &AtomicBoundaryMeasure {
        &self.mu
    }

    /// `D_μ(f) = Σ α_j D_{λ_j}(f)`.
    pub fn dirichlet(&self, f: &Poly) -> f64 {
        self.mu.atoms().map(|(p, m)| m * local_dirichlet(f, p)).sum()
    }

    /// `Σ α_j ⟨Δ_j f, Δ_j g⟩₂`.
    pub fn dirichlet_form(&self, f: &Poly, g: &Poly) -> C64 {
        self.mu
            .atoms()
            .map(|(p, m)| local_dirichlet_form(f, g, p) * m)
            .sum()
    }

    /// `∫ |f'|² P_μ dA` by quadrature, one Poisson-adapted rule per atom
    /// (see [`DiskQuadrature::poisson_weighted`]).
    pub fn dirichlet_area(&self, f: &Poly, n_r: usize, n_theta: usize) -> Result<f64> {
        let df = f.derivative();
        if df.is_zero() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (p, m) in self.mu.atoms() {
            let rule = DiskQuadrature::poisson_weighted(n_r, n_theta, p)?;
            total += m * rule.integrate(|z| df.eval(z).norm_sqr());
        }
        Ok(total)
    }

    /// [`dirichlet_area`](Self::dirichlet_area) with angular and radial
    /// doubling from `n_start` until successive values agree to
    /// `tol · (1 + value)`.
    pub fn dirichlet_area_converged(
        &self,
        f: &Poly,
        n_start: usize,
        n_max: usize,
        tol: f64,
    ) -> Result<Integral> {
        let mut n = n_start.max(4);
        let mut prev = self.dirichlet_area(f, n, n)?;
        loop {
            n *= 2;
            let next = self.dirichlet_area(f, n, n)?;
            let err = (next - prev).abs();
            if err <= tol * (1.0 + next.abs()) {
                return Ok(Integral { value: next, error: err });
            }
            if n >= n_max {
                return Err(Error::QuadratureNotConverged {
                    estimate: next,
                    error: err,
                });
            }
            prev = next;
        }
    }

    pub fn norm_sq(&self, f: &Poly) -> f64 {
        f.h2_norm_sq() + self.dirichlet(f)
    }

    pub fn norm(&self, f: &Poly) -> f64 {
        self.norm_sq(f).sqrt()
    }

    pub fn inner(&self, f: &Poly, g: &Poly) -> C64 {
        f.h2_inner(g) + self.dirichlet_form(f, g)
    }

    /// `f = p + ∏(z - λ_j) g`: `p` interpolates `f` at the atoms, then the
    /// atoms are divided out of `f - p`.
    pub fn decompose(&self, f: &Poly) -> Result<Decomposition> {
        let nodes = self.mu.points();
        let values: Vec<C64> = nodes.iter().map(|l| f.eval(l.point())).collect();
        let p = lagrange_interp(nodes, &values)?;
        let g = (f - &p).divide_out_roots(nodes)?;
        Ok(Decomposition { p, g })
    }

    /// `G[m][k] = δ_{mk} + Σ_j α_j min(m, k) λ_j^{m-k}`.
    pub fn gram_matrix(&self, degree: usize) -> GramMatrix {
        let n = degree + 1;
        let atoms: Vec<(f64, f64)> = self.mu.atoms().map(|(p, m)| (p.angle(), m)).collect();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        entries.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
            for (k, entry) in row.iter_mut().enumerate() {
                let lo = m.min(k) as f64;
                let mut v = if m == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                if lo > 0.0 {
                    let e = m as f64 - k as f64;
                    for &(angle, a) in &atoms {
                        v += C64::from_polar(a * lo, angle * e);
                    }
                }
                *entry = v;
            }
        });
        GramMatrix { size: n, entries }
    }

    /// Gram matrix assembled from [`DirichletSpace::inner`] on monomials.
    pub fn gram_matrix_direct(&self, degree: usize) -> GramMatrix {
        let n = degree + 1;
        let monos: Vec<Poly> = (0..n).map(Poly::monomial).collect();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        entries.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
            for (k, entry) in row.iter_mut().enumerate() {
                *entry = self.inner(&monos[m], &monos[k]);
            }
        });
        GramMatrix { size: n, entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn delta(angle: f64, mass: f64) -> DirichletSpace {
        DirichletSpace::new(AtomicBoundaryMeasure::single(angle, mass).unwrap())
    }

    fn two_atoms() -> DirichletSpace {
        DirichletSpace::new(
            AtomicBoundaryMeasure::new(vec![
                (BoundaryPoint::new(0.0), 1.0),
                (BoundaryPoint::new(PI), 1.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn local_dirichlet_examples() {
        let one = BoundaryPoint::one();
        assert_eq!(local_dirichlet(&Poly::monomial(1), one), 1.0);
        assert_eq!(local_dirichlet(&Poly::monomial(2), one), 2.0);
        assert_eq!(local_dirichlet(&Poly::constant(c(3.0, 1.0)), one), 0.0);
    }

    #[test]
    fn local_form_examples() {
        let lam = BoundaryPoint::new(0.9);
        for n in 0..8 {
            let z = Poly::monomial(n);
            let v = local_dirichlet_form(&z, &z, lam);
            assert!((v - c(n as f64, 0.0)).norm() < 1e-13);
        }
        let v = local_dirichlet_form(&Poly::monomial(2), &Poly::monomial(3), lam);
        assert!((v - lam.point().conj() * 2.0).norm() < 1e-14);
        let v = local_dirichlet_form(&Poly::constant(c(1.0, 0.0)), &Poly::monomial(4), lam);
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn dirichlet_mu_examples() {
        assert!((two_atoms().dirichlet(&Poly::monomial(1)) - 2.0).abs() < 1e-15);
        assert_eq!(two_atoms().dirichlet(&Poly::constant(c(1.0, 0.0))), 0.0);
        assert!((delta(0.0, 2.0).dirichlet(&Poly::monomial(2)) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let d1 = delta(0.0, 1.0);
        assert!((d1.norm_sq(&Poly::monomial(1)) - 2.0).abs() < 1e-15);
        assert!((d1.norm_sq(&Poly::constant(c(1.0, 0.0))) - 1.0).abs() < 1e-15);
        let dl = delta(2.2, 1.0);
        let v = dl.inner(&Poly::monomial(2), &Poly::monomial(3));
        let lam = BoundaryPoint::new(2.2).point();
        assert!((v - lam.conj() * 2.0).norm() < 1e-14);
    }

    #[test]
    fn area_form_examples() {
        let d1 = delta(0.0, 1.0);
        let v = d1.dirichlet_area(&Poly::monomial(1), 64, 64).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        assert_eq!(d1.dirichlet_area(&Poly::constant(c(2.0, 0.0)), 16, 16).unwrap(), 0.0);
    }

    #[test]
    fn decompose_examples() {
        let sp = two_atoms();
        let f = Poly::from_real(&[-1.0, 0.0, 1.0]);
        let d = sp.decompose(&f).unwrap();
        assert!(d.p.h2_norm() < 1e-15);
        assert!(d.g.max_coeff_diff(&Poly::from_real(&[1.0])) < 1e-15);

        let one = Poly::constant(c(1.0, 0.0));
        let d = sp.decompose(&one).unwrap();
        assert!(d.p.max_coeff_diff(&one) < 1e-15);
        assert!(d.g.h2_norm() < 1e-15);

        let d = delta(0.0, 1.0).decompose(&Poly::monomial(3)).unwrap();
        assert!(d.p.max_coeff_diff(&one) < 1e-15);
        assert!(d.g.max_coeff_diff(&Poly::from_real(&[1.0, 1.0, 1.0])) < 1e-15);
    }

    #[test]
    fn gram_examples() {
        let g = delta(0.0, 1.0).gram_matrix(6);
        for m in 0..=6 {
            assert!((g.get(m, m) - c(1.0 + m as f64, 0.0)).norm() < 1e-15);
        }
        let sp = two_atoms();
        let g = sp.gram_matrix(5);
        for m in 1..=5 {
            assert_eq!(g.get(m, 0), c(0.0, 0.0));
            assert_eq!(g.get(0, m), c(0.0, 0.0));
        }
        let g = delta(PI / 2.0, 1.0).gram_matrix(4);
        assert!((g.get(3, 2) - c(0.0, 2.0)).norm() < 1e-15);
        assert!(g.hermitian_defect() < 1e-14);
        assert!(g.cholesky().is_ok());
    }
}
