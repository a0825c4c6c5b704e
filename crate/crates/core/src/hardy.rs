//! Analytic polynomials as elements of the Hardy space H².
//!
//! A [`Poly`] is the exact representative of every function the crate
//! manipulates; H² inner products are coefficient sums, and the local
//! Dirichlet machinery is built on [`Poly::divided_quotient`].

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Two boundary points closer than this (as a chord) are treated as equal.
pub const TAU_NODE: f64 = 1e-9;

/// Relative threshold used when checking that a polynomial vanishes at a point.
pub const ROOT_REL_TOL: f64 = 1e-9;

/// A point of the unit circle, stored by its angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        BoundaryPoint { angle: a }
    }

    /// The point `1`.
    pub fn one() -> Self {
        BoundaryPoint { angle: 0.0 }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `exp(i·angle)`, unimodular by construction.
    pub fn point(&self) -> C64 {
        C64::from_polar(1.0, self.angle)
    }

    /// Chord length `|e^{ia} - e^{ib}|`, computed from the angle difference so
    /// that it is invariant under common rotations.
    pub fn chord(&self, other: &BoundaryPoint) -> f64 {
        chord_between(self.angle, other.angle)
    }

    pub fn rotated(&self, by: f64) -> Self {
        BoundaryPoint::new(self.angle + by)
    }
}

pub(crate) fn chord_between(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) / 2.0).sin().abs()
}

impl Serialize for BoundaryPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.angle)
    }
}

impl<'de> Deserialize<'de> for BoundaryPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let angle = f64::deserialize(d)?;
        if !angle.is_finite() {
            return Err(serde::de::Error::custom("boundary angle must be finite"));
        }
        Ok(BoundaryPoint::new(angle))
    }
}

/// Check that no two points are within [`TAU_NODE`] of each other.
pub fn check_distinct(points: &[BoundaryPoint]) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a.chord(b) <= TAU_NODE {
                return Err(Error::DuplicateNodes {
                    first: a.angle(),
                    second: b.angle(),
                });
            }
        }
    }
    Ok(())
}

/// Analytic polynomial with ascending coefficients: `coeffs[k]` multiplies `z^k`.
///
/// Exact-zero trailing coefficients are stripped on construction, so the
/// zero polynomial has no coefficients at all.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = C64::new(1.0, 0.0);
        Poly { coeffs }
    }

    /// `∏ (z - λ_j)`.
    pub fn from_roots(roots: &[BoundaryPoint]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(C64::new(1.0, 0.0)), |acc, r| acc.mul_linear(r.point()))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation; `z` is not restricted to the disk.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `⟨p, q⟩_{H²} = Σ p_k conj(q_k)`.
    pub fn h2_inner(&self, other: &Poly) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn h2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn h2_norm(&self) -> f64 {
        self.h2_norm_sq().sqrt()
    }

    /// The quotient `q` with `(z - λ) q(z) = p(z) - p(λ)`, by synthetic division.
    ///
    /// `q_j = Σ_{k>j} p_k λ^{k-1-j}`; constants give the zero polynomial.
    pub fn divided_quotient(&self, lambda: BoundaryPoint) -> Poly {
        let (q, _) = self.synthetic_division(lambda.point());
        q
    }

    /// Quotient and remainder of division by `(z - a)`.
    fn synthetic_division(&self, a: C64) -> (Poly, C64) {
        let n = self.coeffs.len();
        if n <= 1 {
            return (Poly::zero(), self.coeff(0));
        }
        let mut q = vec![C64::new(0.0, 0.0); n - 1];
        let mut acc = self.coeffs[n - 1];
        for j in (0..n - 1).rev() {
            q[j] = acc;
            acc = acc * a + self.coeffs[j];
        }
        (Poly::new(q), acc)
    }

    /// Divide out `∏ (z - λ_j)`; every `λ_j` must be a root up to
    /// `1e-9 · (1 + ‖p‖₂)`.
    pub fn divide_out_roots(&self, roots: &[BoundaryPoint]) -> Result<Poly> {
        let mut current = self.clone();
        for &root in roots {
            let tol = ROOT_REL_TOL * (1.0 + current.h2_norm());
            let (q, residual) = current.synthetic_division(root.point());
            if residual.norm() > tol {
                return Err(Error::NotARoot {
                    angle: root.angle(),
                    residual: residual.norm(),
                });
            }
            current = q;
        }
        Ok(current)
    }

    /// Multiply by `(z - a)`.
    pub fn mul_linear(&self, a: C64) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] += c;
            out[k] -= a * c;
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Rotate the argument: returns `z ↦ p(e^{-iθ} z)`.
    pub fn rotate_argument(&self, theta: f64) -> Poly {
        let step = C64::from_polar(1.0, -theta);
        let mut factor = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * factor);
            factor *= step;
        }
        Poly::new(out)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("coefficients must be finite"));
        }
        Ok(Poly::new(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect()))
    }
}

/// Unique polynomial of degree `≤ n-1` through `(λ_j, v_j)`, built from the
/// Lagrange basis `∏_{k≠j} (z - λ_k)/(λ_j - λ_k)`.
pub fn lagrange_interp(nodes: &[BoundaryPoint], values: &[C64]) -> Result<Poly> {
    if nodes.is_empty() {
        return Err(Error::Empty("interpolation nodes"));
    }
    if nodes.len() != values.len() {
        return Err(Error::LengthMismatch {
            nodes: nodes.len(),
            values: values.len(),
        });
    }
    check_distinct(nodes)?;
    let pts: Vec<C64> = nodes.iter().map(BoundaryPoint::point).collect();
    let mut acc = Poly::zero();
    for (j, (&lj, &vj)) in pts.iter().zip(values).enumerate() {
        if vj == C64::new(0.0, 0.0) {
            continue;
        }
        let mut basis = Poly::constant(C64::new(1.0, 0.0));
        let mut denom = C64::new(1.0, 0.0);
        for (k, &lk) in pts.iter().enumerate() {
            if k != j {
                basis = basis.mul_linear(lk);
                denom *= lj - lk;
            }
        }
        acc = &acc + &basis.scale(vj / denom);
    }
    Ok(acc)
}

/// Szegő kernel of H²: `1 / (1 - conj(w) z)`.
pub fn szego_kernel(w: C64, z: C64) -> C64 {
    C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - w.conj() * z)
}
