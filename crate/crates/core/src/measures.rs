//! Boundary measures `μ`, planar test measures `ν` and Carleson boxes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{check_distinct, chord_between, BoundaryPoint, Poly, C64};
use crate::quadrature::{adaptive_gk, gauss_legendre_on, AdaptiveTol, DiskQuadrature, Integral};

/// `μ = Σ α_j δ_{λ_j}` on the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomicMeasureRepr", into = "AtomicMeasureRepr")]
pub struct AtomicBoundaryMeasure {
    points: Vec<BoundaryPoint>,
    masses: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryAtomRepr {
    angle: BoundaryPoint,
    mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomicMeasureRepr {
    atoms: Vec<BoundaryAtomRepr>,
}

impl TryFrom<AtomicMeasureRepr> for AtomicBoundaryMeasure {
    type Error = Error;
    fn try_from(r: AtomicMeasureRepr) -> Result<Self> {
        AtomicBoundaryMeasure::new(r.atoms.into_iter().map(|a| (a.angle, a.mass)).collect())
    }
}

impl From<AtomicBoundaryMeasure> for AtomicMeasureRepr {
    fn from(m: AtomicBoundaryMeasure) -> Self {
        AtomicMeasureRepr {
            atoms: m
                .points
                .into_iter()
                .zip(m.masses)
                .map(|(angle, mass)| BoundaryAtomRepr { angle, mass })
                .collect(),
        }
    }
}

impl AtomicBoundaryMeasure {
    pub fn new(atoms: Vec<(BoundaryPoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("boundary measure atoms"));
        }
        if let Some(&(p, m)) = atoms.iter().find(|(_, m)| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "atom at angle {} has non-positive mass {m}",
                p.angle()
            )));
        }
        let (points, masses): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        check_distinct(&points)?;
        Ok(AtomicBoundaryMeasure { points, masses })
    }

    /// `mass · δ_{e^{i angle}}`.
    pub fn single(angle: f64, mass: f64) -> Result<Self> {
        Self::new(vec![(BoundaryPoint::new(angle), mass)])
    }

    pub fn points(&self) -> &[BoundaryPoint] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (BoundaryPoint, f64)> + '_ {
        self.points.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn rotated(&self, by: f64) -> Self {
        AtomicBoundaryMeasure {
            points: self.points.iter().map(|p| p.rotated(by)).collect(),
            masses: self.masses.clone(),
        }
    }

    /// `P_μ(z) = Σ α_j (1-|z|²)/|λ_j - z|²`.
    pub fn poisson_extension(&self, z: C64) -> Result<f64> {
        check_inside(z)?;
        Ok(self.poisson_unchecked(z))
    }

    pub(crate) fn poisson_unchecked(&self, z: C64) -> f64 {
        let one_minus = 1.0 - z.norm_sqr();
        self.atoms()
            .map(|(p, m)| m * one_minus / (p.point() - z).norm_sqr())
            .sum()
    }
}

pub(crate) fn check_inside(z: C64) -> Result<()> {
    let modulus = z.norm();
    if modulus < 1.0 && modulus.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDisk {
            re: z.re,
            im: z.im,
            modulus,
        })
    }
}

/// A point mass of a planar measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarAtom {
    pub re: f64,
    pub im: f64,
    pub mass: f64,
}

impl PlanarAtom {
    pub fn new(z: C64, mass: f64) -> Self {
        PlanarAtom {
            re: z.re,
            im: z.im,
            mass,
        }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// The named families of test measures on the open disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanarFamily {
    /// Finitely many point masses inside the disk.
    Atoms { atoms: Vec<PlanarAtom> },
    /// `(1-r)^{-α} dr` on the segment `[0, e^{iθ})`.
    RadialPower { alpha: f64, theta: f64 },
    /// `scale · dA` with `dA` the normalized area measure.
    Area { scale: f64 },
}

/// A planar measure `ν` from one of the [`PlanarFamily`] families, optionally
/// carrying the density `∏ |z - λ_j|²` symbolically.
///
/// Atom families absorb the density into their masses, so only ray and area
/// families ever have a non-empty `weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanarFamily", into = "PlanarFamily")]
pub struct PlanarMeasure {
    family: PlanarFamily,
    weight: Vec<BoundaryPoint>,
}

impl TryFrom<PlanarFamily> for PlanarMeasure {
    type Error = Error;
    fn try_from(family: PlanarFamily) -> Result<Self> {
        PlanarMeasure::new(family)
    }
}

impl From<PlanarMeasure> for PlanarFamily {
    fn from(m: PlanarMeasure) -> Self {
        m.family
    }
}

impl PlanarMeasure {
    pub fn new(family: PlanarFamily) -> Result<Self> {
        match &family {
            PlanarFamily::Atoms { atoms } => {
                for a in atoms {
                    check_inside(a.z())?;
                    if !(a.mass.is_finite() && a.mass > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "planar atom mass must be positive, got {}",
                            a.mass
                        )));
                    }
                }
            }
            PlanarFamily::RadialPower { alpha, theta } => {
                if !(alpha.is_finite() && (0.0..1.0).contains(alpha)) || !theta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "radial power needs 0 <= alpha < 1 and finite theta, got alpha = {alpha}, theta = {theta}"
                    )));
                }
            }
            PlanarFamily::Area { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "area scale must be positive, got {scale}"
                    )));
                }
            }
        }
        Ok(PlanarMeasure {
            family,
            weight: Vec::new(),
        })
    }

    pub fn atoms(atoms: Vec<(C64, f64)>) -> Result<Self> {
        Self::new(PlanarFamily::Atoms {
            atoms: atoms.into_iter().map(|(z, m)| PlanarAtom::new(z, m)).collect(),
        })
    }

    pub fn radial_power(alpha: f64, theta: f64) -> Result<Self> {
        Self::new(PlanarFamily::RadialPower { alpha, theta })
    }

    pub fn area(scale: f64) -> Result<Self> {
        Self::new(PlanarFamily::Area { scale })
    }

    pub fn family(&self) -> &PlanarFamily {
        &self.family
    }

    /// Points `λ_j` of the carried density `∏ |z - λ_j|²`.
    pub fn weight_points(&self) -> &[BoundaryPoint] {
        &self.weight
    }

    /// The carried density at `z`.
    pub fn weight_at(&self, z: C64) -> f64 {
        self.weight.iter().map(|p| (z - p.point()).norm_sqr()).product()
    }

    /// `∏ |z - λ_j|² dν`.
    pub fn weight_by_product(&self, lambdas: &[BoundaryPoint]) -> Result<PlanarMeasure> {
        check_distinct(lambdas)?;
        let weight_at =
            |z: C64| -> f64 { lambdas.iter().map(|p| (z - p.point()).norm_sqr()).product() };
        Ok(match &self.family {
            PlanarFamily::Atoms { atoms } => PlanarMeasure {
                family: PlanarFamily::Atoms {
                    atoms: atoms
                        .iter()
                        .map(|a| PlanarAtom::new(a.z(), a.mass * weight_at(a.z())))
                        .filter(|a| a.mass > 0.0)
                        .collect(),
                },
                weight: Vec::new(),
            },
            _ => {
                let mut weight = self.weight.clone();
                weight.extend_from_slice(lambdas);
                PlanarMeasure {
                    family: self.family.clone(),
                    weight,
                }
            }
        })
    }

    /// Rotate the support by `by` radians.
    pub fn rotated(&self, by: f64) -> PlanarMeasure {
        let rot = C64::from_polar(1.0, by);
        let family = match &self.family {
            PlanarFamily::Atoms { atoms } => PlanarFamily::Atoms {
                atoms: atoms
                    .iter()
                    .map(|a| PlanarAtom::new(a.z() * rot, a.mass))
                    .collect(),
            },
            PlanarFamily::RadialPower { alpha, theta } => PlanarFamily::RadialPower {
                alpha: *alpha,
                theta: theta + by,
            },
            PlanarFamily::Area { scale } => PlanarFamily::Area { scale: *scale },
        };
        PlanarMeasure {
            family,
            weight: self.weight.iter().map(|p| p.rotated(by)).collect(),
        }
    }

    /// Same family with every mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<PlanarMeasure> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let family = match &self.family {
            PlanarFamily::Atoms { atoms } => PlanarFamily::Atoms {
                atoms: atoms
                    .iter()
                    .map(|a| PlanarAtom::new(a.z(), a.mass * factor))
                    .collect(),
            },
            PlanarFamily::Area { scale } => PlanarFamily::Area {
                scale: scale * factor,
            },
            PlanarFamily::RadialPower { .. } => {
                return Err(Error::InvalidParameter(
                    "radial power measures have no mass parameter".into(),
                ))
            }
        };
        Ok(PlanarMeasure {
            family,
            weight: self.weight.clone(),
        })
    }

    /// Boundary directions where the measure is concentrated: atom
    /// arguments, the ray angle, and the weight points.
    pub fn feature_angles(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.family {
            PlanarFamily::Atoms { atoms } => atoms
                .iter()
                .filter(|a| a.z().norm() > 0.0)
                .map(|a| BoundaryPoint::new(a.z().arg()).angle())
                .collect(),
            PlanarFamily::RadialPower { theta, .. } => vec![BoundaryPoint::new(*theta).angle()],
            PlanarFamily::Area { .. } => Vec::new(),
        };
        out.extend(self.weight.iter().map(BoundaryPoint::angle));
        out
    }

    /// Total mass of the measure, including any carried density.
    pub fn total_mass(&self) -> f64 {
        match &self.family {
            PlanarFamily::Atoms { atoms } => atoms.iter().map(|a| a.mass).sum(),
            PlanarFamily::RadialPower { alpha, theta } => {
                radial_segment_mass(*alpha, *theta, &self.weight, 1.0)
            }
            PlanarFamily::Area { scale } => {
                // ∫ |Π|² dA = Σ |Π_k|² / (k+1) for the product polynomial Π.
                let pi = Poly::from_roots(&self.weight);
                scale * area_abs_sq(pi.coeffs())
            }
        }
    }

    /// `ν(S(ζ, h))`.
    ///
    /// Atoms are summed exactly. Rays use the closed form
    /// `∫_{1-h}^1 (1-r)^{-α} W(r) dr` with the weight expanded as a
    /// polynomial in `1-r`. Area boxes use a Gauss–Legendre rule on the polar
    /// rectangle, refined until it stabilizes.
    pub fn box_mass(&self, b: &CarlesonBox) -> f64 {
        match &self.family {
            PlanarFamily::Atoms { atoms } => atoms
                .iter()
                .filter(|a| b.contains(a.z()))
                .map(|a| a.mass)
                .sum(),
            PlanarFamily::RadialPower { alpha, theta } => {
                if chord_between(*theta, b.zeta.angle()) < b.h / 2.0 {
                    radial_segment_mass(*alpha, *theta, &self.weight, b.h)
                } else {
                    0.0
                }
            }
            PlanarFamily::Area { scale } => scale * self.area_box_mass(b),
        }
    }

    fn area_box_mass(&self, b: &CarlesonBox) -> f64 {
        let delta = b.half_angle();
        if self.weight.is_empty() {
            let annulus = 1.0 - (1.0 - b.h) * (1.0 - b.h);
            return annulus * delta / PI;
        }
        // W(re^{iφ}) r is a polynomial in r of degree 2n+1; the angular factor
        // is analytic on the short arc.
        let n_r = self.weight.len() + 2;
        let radial = gauss_legendre_on(n_r, 1.0 - b.h, 1.0);
        let phi0 = b.zeta.angle();
        let eval = |n_phi: usize| -> f64 {
            let angular = gauss_legendre_on(n_phi, phi0 - delta, phi0 + delta);
            let mut s = 0.0;
            for &(r, wr) in &radial {
                for &(phi, wp) in &angular {
                    s += wr * wp * r * self.weight_at(C64::from_polar(r, phi));
                }
            }
            s / PI
        };
        let mut n_phi = 8;
        let mut prev = eval(n_phi);
        while n_phi < 512 {
            n_phi *= 2;
            let next = eval(n_phi);
            if (next - prev).abs() <= 1e-14 * next.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            prev = next;
        }
        prev
    }

    /// `∫ f dν` for a nonnegative `f`.
    ///
    /// Exact for atoms; adaptive Gauss–Kronrod in `u = (1-r)^{1-α}` along a
    /// ray, which makes the endpoint weight bounded; tensor polar rule with
    /// doubling refinement on the area family.
    pub fn integrate<F: Fn(C64) -> f64 + Sync>(&self, f: F, tol: f64) -> Result<Integral> {
        self.integrate_near(f, tol, None)
    }

    /// [`integrate`](Self::integrate) for integrands concentrated at distance
    /// about `scale` from the circle; along a ray this seeds breakpoints near
    /// `1 - r = scale`.
    pub fn integrate_near<F: Fn(C64) -> f64 + Sync>(
        &self,
        f: F,
        tol: f64,
        scale: Option<f64>,
    ) -> Result<Integral> {
        match &self.family {
            PlanarFamily::Atoms { atoms } => Ok(Integral::exact(
                atoms.iter().map(|a| a.mass * f(a.z())).sum(),
            )),
            PlanarFamily::RadialPower { alpha, theta } => {
                let dir = C64::from_polar(1.0, *theta);
                let expo = 1.0 / (1.0 - alpha);
                let g = |u: f64| {
                    let r = 1.0 - u.powf(expo);
                    let z = dir * r;
                    self.weight_at(z) * f(z)
                };
                let at = AdaptiveTol {
                    abs: tol * 1e-3,
                    rel: tol,
                    ..AdaptiveTol::default()
                };
                let breaks: Vec<f64> = match scale {
                    Some(h) if h > 0.0 && h < 1.0 => [0.125, 0.5, 1.0, 2.0, 8.0]
                        .iter()
                        .map(|m| m * h)
                        .filter(|s| *s < 1.0)
                        .map(|s| s.powf(1.0 - alpha))
                        .rev()
                        .collect(),
                    _ => Vec::new(),
                };
                let res = adaptive_gk(g, 0.0, 1.0, &breaks, at)?;
                Ok(Integral {
                    value: res.value / (1.0 - alpha),
                    error: res.error / (1.0 - alpha),
                })
            }
            PlanarFamily::Area { scale } => {
                let integrand = |z: C64| self.weight_at(z) * f(z);
                let mut n = 16;
                let mut prev = DiskQuadrature::new(n, n)?.integrate(integrand);
                loop {
                    n *= 2;
                    let next = DiskQuadrature::new(n, n)?.integrate(integrand);
                    let err = (next - prev).abs();
                    if err <= tol * next.abs().max(1.0) {
                        return Ok(Integral {
                            value: scale * next,
                            error: scale * err,
                        });
                    }
                    if n >= 1024 {
                        return Err(Error::QuadratureNotConverged {
                            estimate: scale * next,
                            error: scale * err,
                        });
                    }
                    prev = next;
                }
            }
        }
    }

    /// `∫ |F|² dν` for an analytic `F`.
    ///
    /// On the area family this is exact through Taylor coefficients,
    /// `∫ |G|² dA = Σ |G_k|²/(k+1)` with `G = Π·F` absorbing the carried
    /// density, so sharply peaked kernels need no spatial resolution.
    pub fn integrate_abs_sq(&self, f: &dyn AnalyticFunction, tol: f64) -> Result<Integral> {
        self.integrate_abs_sq_near(f, tol, None)
    }

    /// [`integrate_abs_sq`](Self::integrate_abs_sq) with the scale hint of
    /// [`integrate_near`](Self::integrate_near).
    pub fn integrate_abs_sq_near(
        &self,
        f: &dyn AnalyticFunction,
        tol: f64,
        scale: Option<f64>,
    ) -> Result<Integral> {
        match &self.family {
            PlanarFamily::Area { scale } => {
                let series = Poly::new(f.taylor(1e-12));
                let g = &Poly::from_roots(&self.weight) * &series;
                Ok(Integral::exact(scale * area_abs_sq(g.coeffs())))
            }
            _ => self.integrate_near(|z| f.eval(z).norm_sqr(), tol, scale),
        }
    }
}

/// `Σ |c_k|² / (k+1)`, the normalized-area integral of `|Σ c_k z^k|²`.
pub(crate) fn area_abs_sq(coeffs: &[C64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() / (k + 1) as f64)
        .sum()
}

/// `∫_{1-h}^{1} (1-r)^{-α} ∏_j |r e^{iθ} - λ_j|² dr`, in closed form.
///
/// With `s = 1 - r` each factor is `s² - 2(1-c)s + 2(1-c)`, `c = cos(θ - φ_j)`,
/// and `∫_0^h s^{k-α} ds = h^{k+1-α}/(k+1-α)`.
fn radial_segment_mass(alpha: f64, theta: f64, weight: &[BoundaryPoint], h: f64) -> f64 {
    let mut q = vec![1.0];
    for p in weight {
        let one_minus_c = 1.0 - (theta - p.angle()).cos();
        let factor = [2.0 * one_minus_c, -2.0 * one_minus_c, 1.0];
        let mut next = vec![0.0; q.len() + 2];
        for (i, &a) in q.iter().enumerate() {
            for (j, &b) in factor.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        q = next;
    }
    q.iter()
        .enumerate()
        .map(|(k, &qk)| {
            let e = k as f64 + 1.0 - alpha;
            qk * h.powf(e) / e
        })
        .sum()
}

/// An analytic function on the disk that can also report its Taylor series.
pub trait AnalyticFunction: Sync {
    fn eval(&self, z: C64) -> C64;

    /// Taylor coefficients at the origin, truncated once the remaining tail
    /// is below `tol` relative to the leading coefficients.
    fn taylor(&self, tol: f64) -> Vec<C64>;
}

impl AnalyticFunction for Poly {
    fn eval(&self, z: C64) -> C64 {
        Poly::eval(self, z)
    }

    fn taylor(&self, _tol: f64) -> Vec<C64> {
        self.coeffs().to_vec()
    }
}

/// `S(ζ, h) = {1-h < |z| < 1, |z/|z| - ζ| < h/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonBox {
    pub zeta: BoundaryPoint,
    pub h: f64,
}

impl CarlesonBox {
    pub fn new(zeta: BoundaryPoint, h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Carleson box needs 0 < h < 1, got {h}"
            )));
        }
        Ok(CarlesonBox { zeta, h })
    }

    /// Strict inequalities on both conditions; ties are outside.
    pub fn contains(&self, z: C64) -> bool {
        let r = z.norm();
        r > 1.0 - self.h && r < 1.0 && chord_between(z.arg(), self.zeta.angle()) < self.h / 2.0
    }

    /// Half-width `δ` of the angular window: `|e^{iφ} - ζ| < h/2 ⇔ |φ - arg ζ| < δ`.
    pub fn half_angle(&self) -> f64 {
        2.0 * (self.h / 4.0).asin()
    }
}
