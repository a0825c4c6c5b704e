//! Quadrature on intervals, the disk and the circle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{BoundaryPoint, C64};

/// A quadrature value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl Integral {
    pub fn exact(value: f64) -> Self {
        Integral { value, error: 0.0 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z_prev = z;
            z = z_prev - p1 / dp;
            if (z - z_prev).abs() <= 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tolerances for [`adaptive_gk`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveTol {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveTol {
    fn default() -> Self {
        AdaptiveTol {
            abs: 1e-13,
            rel: 1e-10,
            max_panels: 4000,
        }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `[a, b]`.
///
/// `breaks` are interior points where the integrand is known to vary
/// quickly; they seed the initial partition.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: AdaptiveTol,
) -> Result<Integral> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for win in cuts.windows(2) {
        let (v, e) = gk15(&f, win[0], win[1]);
        total += v;
        err += e;
        heap.push(Panel {
            a: win[0],
            b: win[1],
            value: v,
            error: e,
        });
    }
    while err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_panels {
            return Err(Error::QuadratureNotConverged {
                estimate: total,
                error: err,
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNotConverged {
                estimate: total,
                error: err,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum in a fixed order so the value does not depend on the update path.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Integral { value, error })
}

/// One node of a disk rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskNode {
    pub z: C64,
    pub weight: f64,
}

/// Tensor rule on the unit disk.
///
/// [`DiskQuadrature::new`] integrates against the normalized area measure
/// `dA = r dr dθ / π`: Gauss–Legendre in `r` (weight `2r` on `[0,1]`) times
/// the uniform trapezoid rule in `θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskQuadrature {
    nodes: Vec<DiskNode>,
    n_r: usize,
    n_theta: usize,
}

impl DiskQuadrature {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        check_resolution(n_r, n_theta)?;
        let dtheta = TAU / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        for (r, wr) in gauss_legendre_on(n_r, 0.0, 1.0) {
            let radial = wr * 2.0 * r;
            for j in 0..n_theta {
                nodes.push(DiskNode {
                    z: C64::from_polar(r, j as f64 * dtheta),
                    weight: radial / n_theta as f64,
                });
            }
        }
        Ok(DiskQuadrature {
            nodes,
            n_r,
            n_theta,
        })
    }

    /// Rule for the measure `P_λ dA`, where `P_λ(z) = (1-|z|²)/|λ-z|²`.
    ///
    /// At each Gauss–Legendre radius the angle is split at `|θ - arg λ| = π/2`.
    /// On the near half the substitution `tan(t/2) = tan(ψ/2)·(1-r)/(1+r)`
    /// absorbs the Poisson kernel exactly (`P_r(t) dt = dψ`); the far half
    /// carries the kernel as a bounded weight. Both halves use `n_theta / 2`
    /// Gauss–Legendre nodes. Weights sum to `∫ P_λ dA = 1` up to quadrature error.
    pub fn poisson_weighted(n_r: usize, n_theta: usize, lambda: BoundaryPoint) -> Result<Self> {
        check_resolution(n_r, n_theta)?;
        let half = n_theta / 2;
        let phi = lambda.angle();
        let far_rule = gauss_legendre_on(n_theta - half, PI / 2.0, 1.5 * PI);
        let (near_x, near_w) = gauss_legendre(half);
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        for (r, wr) in gauss_legendre_on(n_r, 0.0, 1.0) {
            let radial = wr * 2.0 * r / TAU;
            let k = (1.0 + r) / (1.0 - r);
            let psi0 = 2.0 * k.atan();
            for (&x, &w) in near_x.iter().zip(&near_w) {
                let (psi, wp) = (psi0 * x, psi0 * w);
                let t = 2.0 * ((psi / 2.0).tan() / k).atan();
                nodes.push(DiskNode {
                    z: C64::from_polar(r, phi + t),
                    weight: radial * wp,
                });
            }
            for &(t, wt) in &far_rule {
                let poisson = (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r);
                nodes.push(DiskNode {
                    z: C64::from_polar(r, phi + t),
                    weight: radial * wt * poisson,
                });
            }
        }
        Ok(DiskQuadrature {
            nodes,
            n_r,
            n_theta,
        })
    }

    pub fn nodes(&self) -> &[DiskNode] {
        &self.nodes
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// `Σ w_i f(z_i)`, evaluated in parallel over radial rings and reduced in
    /// node order.
    pub fn integrate<F: Fn(C64) -> f64 + Sync>(&self, f: F) -> f64 {
        use rayon::prelude::*;
        let ring = self.n_theta.max(1);
        let partial: Vec<f64> = self
            .nodes
            .par_chunks(ring)
            .map(|chunk| chunk.iter().map(|n| n.weight * f(n.z)).sum::<f64>())
            .collect();
        partial.iter().sum()
    }
}

fn check_resolution(n_r: usize, n_theta: usize) -> Result<()> {
    if n_r < 4 || n_theta < 4 {
        return Err(Error::InvalidParameter(format!(
            "disk quadrature needs n_r, n_theta >= 4 (got {n_r}, {n_theta})"
        )));
    }
    Ok(())
}

/// Mean of `f` over the circle `|z| = r` by the `n`-point trapezoid rule.
pub fn circle_mean<F: Fn(C64) -> f64>(r: f64, n: usize, f: F) -> f64 {
    let d = TAU / n as f64;
    (0..n).map(|j| f(C64::from_polar(r, j as f64 * d))).sum::<f64>() / n as f64
}
