//! Numerical Carleson-box and reproducing-kernel tests.
//!
//! Boundedness of `sup_ζ ν(S(ζ,h))/h` is not decidable from finitely many
//! levels. Scans therefore reduce to the sequence of per-level suprema and
//! classify it with [`classify`]:
//!
//! * `Diverging` when the last four values are non-decreasing and the last
//!   exceeds the first by at least `ρ`;
//! * `Bounded` when every value vanishes, when the last three levels do not
//!   exceed the maximum of the earlier ones, or when the last three
//!   increments are positive, contract by at least [`CONTRACTION`] each and
//!   their geometric extrapolation stays below `ρ` times the value three
//!   levels back;
//! * `Inconclusive` otherwise.

use std::f64::consts::{E, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{chord_between, BoundaryPoint, C64, TAU_NODE};
use crate::kernels::{default_degree, KernelSection, KernelSource, DEFAULT_KERNEL_TOL};
use crate::measures::{AtomicBoundaryMeasure, CarlesonBox, PlanarMeasure};

/// Largest increment ratio still counted as convergence.
pub const CONTRACTION: f64 = 0.9;

/// Truncation degrees above this are refused.
pub const MAX_TRUNCATION_DEGREE: usize = 6000;

/// Tolerance used for `∫ |k_w|² dν`.
pub const RKT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Classify a sequence of per-level suprema. See the module docs.
pub fn classify(seq: &[f64], rho: f64) -> Verdict {
    if seq.iter().all(|&s| s <= 0.0) {
        return Verdict::Bounded;
    }
    let k = seq.len();
    if k < 4 {
        return Verdict::Inconclusive;
    }
    let t = &seq[k - 4..];
    let non_decreasing = t.windows(2).all(|p| p[1] >= p[0]);
    if non_decreasing && t[0] > 0.0 && t[3] >= rho * t[0] {
        return Verdict::Diverging;
    }
    let head = seq[..k - 3].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = seq[k - 3..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if tail <= head * (1.0 + 1e-9) {
        return Verdict::Bounded;
    }
    let d = [t[1] - t[0], t[2] - t[1], t[3] - t[2]];
    if d.iter().all(|&x| x > 0.0) {
        let q = (d[1] / d[0]).max(d[2] / d[1]);
        if q <= CONTRACTION && t[3] + d[2] * q / (1.0 - q) < rho * t[0] {
            return Verdict::Bounded;
        }
    }
    Verdict::Inconclusive
}

/// Box-scan grid: `n_zeta` uniform directions starting at `offset`, plus the
/// measure's own feature directions, and `h = 2^{-k}` for
/// `k = k_min..=k_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxScanConfig {
    pub n_zeta: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub rho: f64,
    #[serde(default)]
    pub offset: f64,
}

impl Default for BoxScanConfig {
    fn default() -> Self {
        BoxScanConfig {
            n_zeta: 64,
            k_min: 1,
            k_max: 20,
            rho: 1.5,
            offset: 0.0,
        }
    }
}

impl BoxScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_zeta < 8 || self.k_min < 1 || self.k_max > 40 || self.k_min > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "box scan needs n_zeta >= 8 and 1 <= k_min <= k_max <= 40, got n_zeta = {}, k = {}..{}",
                self.n_zeta, self.k_min, self.k_max
            )));
        }
        check_rho(self.rho)?;
        if !self.offset.is_finite() {
            return Err(Error::InvalidParameter("scan offset must be finite".into()));
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<(u32, f64)> {
        (self.k_min..=self.k_max).map(|k| (k, 0.5f64.powi(k as i32))).collect()
    }

    pub fn rotated(&self, by: f64) -> Self {
        BoxScanConfig {
            offset: self.offset + by,
            ..*self
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "growth factor rho must exceed 1, got {rho}"
        )));
    }
    Ok(())
}

fn direction_grid(n: usize, offset: f64, features: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n)
        .map(|i| BoundaryPoint::new(offset + TAU * i as f64 / n as f64).angle())
        .collect();
    out.extend(features.iter().map(|&a| BoundaryPoint::new(a).angle()));
    out
}

/// Supremum found at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSup {
    pub level: u32,
    pub h: f64,
    pub sup: f64,
}

/// Where a per-level supremum was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub zeta: f64,
    pub h: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanReport {
    pub sup_ratio: f64,
    pub levels: Vec<LevelSup>,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
}

impl ScanReport {
    fn from_levels(levels: Vec<(u32, f64, Witness)>, rho: f64) -> Self {
        let seq: Vec<f64> = levels.iter().map(|l| l.2.ratio).collect();
        let sup_ratio = seq.iter().copied().fold(0.0, f64::max);
        ScanReport {
            sup_ratio,
            verdict: classify(&seq, rho),
            levels: levels
                .iter()
                .map(|&(level, h, w)| LevelSup {
                    level,
                    h,
                    sup: w.ratio,
                })
                .collect(),
            witnesses: levels.into_iter().map(|l| l.2).collect(),
        }
    }

    pub fn sequence(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.sup).collect()
    }

    /// `level,h,sup_ratio` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,sup_ratio\n");
        for l in &self.levels {
            let _ = writeln!(out, "{},{:e},{:e}", l.level, l.h, l.sup);
        }
        out
    }
}

fn argmax(cands: impl Iterator<Item = Witness>, h: f64) -> Witness {
    cands.fold(
        Witness {
            zeta: 0.0,
            h,
            ratio: 0.0,
        },
        |best, w| if w.ratio > best.ratio { w } else { best },
    )
}

fn box_scan(nu: &PlanarMeasure, cfg: &BoxScanConfig, norm: impl Fn(f64) -> f64 + Sync) -> Result<ScanReport> {
    cfg.validate()?;
    let zetas = direction_grid(cfg.n_zeta, cfg.offset, &nu.feature_angles());
    let levels: Vec<(u32, f64, Witness)> = cfg
        .levels()
        .into_par_iter()
        .map(|(k, h)| {
            let n = norm(h);
            let best = argmax(
                zetas.iter().map(|&z| {
                    let b = CarlesonBox {
                        zeta: BoundaryPoint::new(z),
                        h,
                    };
                    Witness {
                        zeta: z,
                        h,
                        ratio: nu.box_mass(&b) / n,
                    }
                }),
                h,
            );
            (k, h, best)
        })
        .collect();
    Ok(ScanReport::from_levels(levels, cfg.rho))
}

/// Scan of `ν(S(ζ,h))/h`.
pub fn h2_box_sup(nu: &PlanarMeasure, cfg: &BoxScanConfig) -> Result<ScanReport> {
    box_scan(nu, cfg, |h| h)
}

/// Scan of `ν(S(ζ,h))/h^α`, or `ν(S(ζ,h))·log(e/h)` when `α = 0`.
pub fn alpha_carleson_sup(nu: &PlanarMeasure, alpha: f64, cfg: &BoxScanConfig) -> Result<ScanReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha-Carleson scan needs 0 <= alpha <= 1, got {alpha}"
        )));
    }
    if alpha == 0.0 {
        box_scan(nu, cfg, |h| 1.0 / (E / h).ln())
    } else {
        box_scan(nu, cfg, |h| h.powf(alpha))
    }
}

/// `D(μ)`-Carleson test: the `H²` box scan of `∏ |z - λ_j|² dν`.
pub fn dmu_carleson_test(
    nu: &PlanarMeasure,
    mu: &AtomicBoundaryMeasure,
    cfg: &BoxScanConfig,
) -> Result<ScanReport> {
    h2_box_sup(&nu.weight_by_product(mu.points())?, cfg)
}

/// `σ(S(λ_i, h))` for `σ = ∏|z - λ_j|² dν` against `4^{n-1} h² ‖ν‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrivialEstimate {
    pub atom: f64,
    pub h: f64,
    pub mass: f64,
    pub bound: f64,
}

impl TrivialEstimate {
    pub fn holds(&self) -> bool {
        self.mass <= self.bound
    }
}

pub fn trivial_estimate(
    nu: &PlanarMeasure,
    mu: &AtomicBoundaryMeasure,
    h: f64,
) -> Result<Vec<TrivialEstimate>> {
    let sigma = nu.weight_by_product(mu.points())?;
    let bound = 4f64.powi(mu.len() as i32 - 1) * h * h * nu.total_mass();
    mu.points()
        .iter()
        .map(|&p| {
            let b = CarlesonBox::new(p, h)?;
            Ok(TrivialEstimate {
                atom: p.angle(),
                h,
                mass: sigma.box_mass(&b),
                bound,
            })
        })
        .collect()
}

/// `∫ |k_w|² dν / ‖k_w‖²_μ` for `w = section.w()`.
pub fn kernel_ratio(nu: &PlanarMeasure, section: &KernelSection) -> Result<f64> {
    let scale = 1.0 - section.w().norm();
    let num = nu.integrate_abs_sq_near(section, RKT_TOL, Some(scale))?;
    Ok(num.value / section.norm_sq())
}

/// One point of an RKT evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RktSample {
    pub w: C64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RktResult {
    pub sup: f64,
    pub degree: Option<usize>,
    pub ratios: Vec<RktSample>,
}

fn kernel_source(mu: &AtomicBoundaryMeasure, r_max: f64, degree: Option<usize>) -> Result<KernelSource> {
    if mu.len() > 1 {
        let n = degree.unwrap_or_else(|| default_degree(r_max, DEFAULT_KERNEL_TOL));
        if n > MAX_TRUNCATION_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "truncation degree {n} exceeds {MAX_TRUNCATION_DEGREE}; reduce the radial depth"
            )));
        }
    }
    KernelSource::for_measure(mu, r_max, degree)
}

fn source_degree(src: &KernelSource) -> Option<usize> {
    match src {
        KernelSource::OneAtom(_) => None,
        KernelSource::Truncated(t) => Some(t.degree()),
    }
}

/// `max_w ∫ |k_w|² dν / ‖k_w‖²_μ` over `w_grid`, with each ratio.
///
/// Kernels are closed form for one atom and truncated at `degree` (or the
/// default degree for `max |w|`) otherwise.
pub fn rkt_sup(
    nu: &PlanarMeasure,
    mu: &AtomicBoundaryMeasure,
    w_grid: &[C64],
    degree: Option<usize>,
) -> Result<RktResult> {
    for &w in w_grid {
        crate::measures::check_inside(w)?;
    }
    let r_max = w_grid.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let src = kernel_source(mu, r_max, degree)?;
    let ratios = w_grid
        .par_iter()
        .map(|&w| Ok(RktSample {
            w,
            ratio: kernel_ratio(nu, &src.section(w)?)?,
        }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RktResult {
        sup: ratios.iter().map(|s| s.ratio).fold(0.0, f64::max),
        degree: source_degree(&src),
        ratios,
    })
}

/// Radial `w`-grid `(1 - 2^{-k}) ζ`, `k = k_min..=k_max`, toward `n_angles`
/// uniform directions starting at `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RktGridConfig {
    pub n_angles: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub rho: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub degree: Option<usize>,
}

impl RktGridConfig {
    /// Depth 14 for one atom, where kernels are closed form; depth 7 with
    /// truncated kernels.
    pub fn default_for(mu: &AtomicBoundaryMeasure) -> Self {
        RktGridConfig {
            n_angles: 64,
            k_min: 1,
            k_max: if mu.len() == 1 { 14 } else { 7 },
            rho: 1.5,
            offset: 0.0,
            degree: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angles < 8 || self.k_min < 1 || self.k_max > 40 || self.k_min > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "kernel grid needs n_angles >= 8 and 1 <= k_min <= k_max <= 40, got n_angles = {}, k = {}..{}",
                self.n_angles, self.k_min, self.k_max
            )));
        }
        check_rho(self.rho)?;
        if !self.offset.is_finite() {
            return Err(Error::InvalidParameter("grid offset must be finite".into()));
        }
        Ok(())
    }

    pub fn rotated(&self, by: f64) -> Self {
        RktGridConfig {
            offset: self.offset + by,
            ..*self
        }
    }
}

/// Kernel sections on a radial grid, computed once per `μ` and shared by
/// every `ν` scanned against it.
#[derive(Clone, Debug)]
pub struct RktGrid {
    zetas: Vec<f64>,
    levels: Vec<(u32, f64)>,
    sections: Vec<Vec<KernelSection>>,
    rho: f64,
    degree: Option<usize>,
}

impl RktGrid {
    /// Grid for `cfg` with `extra` directions added to the uniform ones and
    /// the atoms of `μ`.
    pub fn new(mu: &AtomicBoundaryMeasure, cfg: &RktGridConfig, extra: &[f64]) -> Result<Self> {
        cfg.validate()?;
        let mut features: Vec<f64> = extra.to_vec();
        features.extend(mu.points().iter().map(BoundaryPoint::angle));
        let zetas = direction_grid(cfg.n_angles, cfg.offset, &features);
        let h_min = 0.5f64.powi(cfg.k_max as i32);
        let src = kernel_source(mu, 1.0 - h_min, cfg.degree)?;
        let levels: Vec<(u32, f64)> = (cfg.k_min..=cfg.k_max)
            .map(|k| (k, 0.5f64.powi(k as i32)))
            .collect();
        let sections = levels
            .iter()
            .map(|&(_, h)| {
                zetas
                    .par_iter()
                    .map(|&z| src.section(C64::from_polar(1.0 - h, z)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RktGrid {
            zetas,
            levels,
            sections,
            rho: cfg.rho,
            degree: source_degree(&src),
        })
    }

    pub fn directions(&self) -> &[f64] {
        &self.zetas
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    /// Per-level suprema of the RKT ratio for `ν`, classified like a box
    /// scan. Witness `(ζ, h)` stands for `w = (1-h)ζ`.
    pub fn scan(&self, nu: &PlanarMeasure) -> Result<ScanReport> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for (&(k, h), row) in self.levels.iter().zip(&self.sections) {
            let ratios = row
                .par_iter()
                .zip(&self.zetas)
                .map(|(sec, &z)| {
                    Ok(Witness {
                        zeta: z,
                        h,
                        ratio: kernel_ratio(nu, sec)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            levels.push((k, h, argmax(ratios.into_iter(), h)));
        }
        Ok(ScanReport::from_levels(levels, self.rho))
    }
}

/// RKT ratios on the radial grid toward the uniform directions, the feature
/// directions of `ν` and the atoms of `μ`.
pub fn rkt_scan(
    nu: &PlanarMeasure,
    mu: &AtomicBoundaryMeasure,
    cfg: &RktGridConfig,
) -> Result<ScanReport> {
    RktGrid::new(mu, cfg, &nu.feature_angles())?.scan(nu)
}

/// RKT ratio along `w = (1-h)ζ` for each `h`.
///
/// `ζ` must not be an atom of `μ`.
pub fn compactness_profile(
    nu: &PlanarMeasure,
    mu: &AtomicBoundaryMeasure,
    zeta: BoundaryPoint,
    h_levels: &[f64],
    degree: Option<usize>,
) -> Result<Vec<f64>> {
    if let Some(p) = mu
        .points()
        .iter()
        .find(|p| chord_between(p.angle(), zeta.angle()) < TAU_NODE)
    {
        return Err(Error::AtomDirection { angle: p.angle() });
    }
    if let Some(&h) = h_levels.iter().find(|&&h| !(h > 0.0 && h <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "profile levels need 0 < h <= 1, got {h}"
        )));
    }
    let h_min = h_levels.iter().copied().fold(1.0, f64::min);
    let src = kernel_source(mu, 1.0 - h_min, degree)?;
    h_levels
        .par_iter()
        .map(|&h| kernel_ratio(nu, &src.section(zeta.point() * (1.0 - h))?))
        .collect()
}
