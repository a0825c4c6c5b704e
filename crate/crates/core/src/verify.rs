//! Self-check suite: every module invariant, at default tolerances, on inputs
//! drawn from a seeded generator.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carleson::{
    compactness_profile, dmu_carleson_test, h2_box_sup, rkt_scan, rkt_sup, trivial_estimate,
    BoxScanConfig, RktGrid, RktGridConfig, Verdict,
};
use crate::dirichlet::DirichletSpace;
use crate::error::{Error, Result};
use crate::hardy::{lagrange_interp, BoundaryPoint, Poly, C64};
use crate::kernels::{
    extremal_mass, solve_a0, OneAtomKernelModel, TruncatedKernelSpace,
};
use crate::measures::{AtomicBoundaryMeasure, CarlesonBox, PlanarMeasure};
use crate::quadrature::{circle_mean, DiskQuadrature};

pub const DEFAULT_SEED: u64 = 0x5EED_D1C7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Multiplies every tolerance; below 1 tightens the checks.
    pub tolerance_scale: f64,
    /// Run only properties whose name starts with this prefix.
    #[serde(default)]
    pub only: Option<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            tolerance_scale: 1.0,
            only: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub all_passed: bool,
    pub results: Vec<PropertyResult>,
}

struct Ctx {
    rng: ChaCha8Rng,
    scale: f64,
}

impl Ctx {
    fn tol(&self, base: f64) -> f64 {
        base * self.scale
    }
}

fn at_most(name: &str, measured: f64, tolerance: f64, detail: String) -> PropertyResult {
    PropertyResult {
        name: name.to_string(),
        passed: measured <= tolerance,
        measured,
        tolerance,
        detail,
    }
}

type Check = fn(&str, &mut Ctx) -> Result<PropertyResult>;

const CHECKS: &[(&str, Check)] = &[
    ("hardy.division_identity", division_identity),
    ("hardy.monomial_dirichlet", monomial_dirichlet),
    ("hardy.lagrange_nodes", lagrange_nodes),
    ("hardy.h2_form_hermitian", h2_form_hermitian),
    ("measures.poisson_positivity", poisson_positivity),
    ("measures.poisson_mean_value", poisson_mean_value),
    ("measures.box_nesting", box_nesting),
    ("measures.quadrature_order", quadrature_order),
    ("dirichlet.fubini", fubini),
    ("dirichlet.decomposition_round_trip", decomposition_round_trip),
    ("dirichlet.norm_inequality", norm_inequality),
    ("dirichlet.gram_closed_form", gram_closed_form),
    ("dirichlet.norm_dominates_h2", norm_dominates_h2),
    ("kernels.a0_root", a0_root),
    ("kernels.one_atom_consistency", one_atom_consistency),
    ("kernels.reproducing", reproducing),
    ("kernels.hermitian_symmetry", hermitian_symmetry),
    ("kernels.inf4_margin", inf4_margin),
    ("kernels.quotient_cauchy_schwarz", quotient_cauchy_schwarz),
    ("kernels.angular_ratio_profile", angular_ratio_profile),
    ("carleson.theorem_agreement", theorem_agreement),
    ("carleson.monotonicity", monotonicity),
    ("carleson.rotation_equivariance", rotation_equivariance),
    ("carleson.trivial_estimate", trivial_estimate_check),
    ("carleson.compactness_profile", compactness_check),
];

/// Names of all properties, in execution order.
pub fn property_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a; keeps each property's sample stream independent of the others.
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn verify_suite(cfg: &VerifyConfig) -> VerifyReport {
    let results: Vec<PropertyResult> = CHECKS
        .iter()
        .filter(|(name, _)| cfg.only.as_deref().is_none_or(|p| name.starts_with(p)))
        .map(|&(name, check)| {
            let mut ctx = Ctx {
                rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ name_hash(name)),
                scale: cfg.tolerance_scale,
            };
            match catch_unwind(AssertUnwindSafe(|| check(name, &mut ctx))) {
                Ok(Ok(r)) => r,
                Ok(Err(e)) => PropertyResult {
                    name: name.to_string(),
                    passed: false,
                    measured: f64::NAN,
                    tolerance: f64::NAN,
                    detail: format!("error: {e}"),
                },
                Err(_) => PropertyResult {
                    name: name.to_string(),
                    passed: false,
                    measured: f64::NAN,
                    tolerance: f64::NAN,
                    detail: "panicked".into(),
                },
            }
        })
        .collect();
    VerifyReport {
        seed: cfg.seed,
        tolerance_scale: cfg.tolerance_scale,
        all_passed: results.iter().all(|r| r.passed),
        results,
    }
}

// Samplers.

pub fn random_poly<R: Rng>(rng: &mut R, max_degree: usize) -> Poly {
    let d = rng.gen_range(0..=max_degree);
    Poly::new(
        (0..=d)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

/// Up to `max_atoms` atoms with masses in `[0.1, 2]` and pairwise angular
/// separation at least `0.2`.
pub fn random_mu<R: Rng>(rng: &mut R, max_atoms: usize) -> AtomicBoundaryMeasure {
    let n = rng.gen_range(1..=max_atoms);
    loop {
        let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let separated = angles.iter().enumerate().all(|(i, a)| {
            angles[..i]
                .iter()
                .all(|b| BoundaryPoint::new(*a).chord(&BoundaryPoint::new(*b)) > 0.2)
        });
        if separated {
            let atoms = angles
                .into_iter()
                .map(|a| (BoundaryPoint::new(a), rng.gen_range(0.1..2.0)))
                .collect();
            return AtomicBoundaryMeasure::new(atoms).expect("separated atoms");
        }
    }
}

pub fn random_disk_point<R: Rng>(rng: &mut R, r_max: f64) -> C64 {
    C64::from_polar(r_max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI))
}

// Reference measures.

/// Twelve planar test measures: four atom clouds, four rays, four area
/// multiples.
pub fn reference_planar() -> Vec<(&'static str, PlanarMeasure)> {
    let c = C64::from_polar;
    let ok = |m: Result<PlanarMeasure>| m.expect("reference measure");
    vec![
        (
            "cloud-half",
            ok(PlanarMeasure::atoms(vec![
                (c(0.5, 0.0), 1.0),
                (c(0.5, 2.0), 1.0),
                (c(0.5, 4.0), 1.0),
            ])),
        ),
        (
            "cloud-ring",
            ok(PlanarMeasure::atoms(
                (0..8)
                    .map(|j| (c(0.9, 0.1 + PI * j as f64 / 4.0), 0.5))
                    .collect(),
            )),
        ),
        ("cloud-edge", ok(PlanarMeasure::atoms(vec![(c(0.95, PI / 3.0), 1.0)]))),
        (
            "cloud-ray",
            ok(PlanarMeasure::atoms(
                [0.3, 0.6, 0.8, 0.9, 0.95]
                    .iter()
                    .map(|&r| (c(r, 0.0), 1.0))
                    .collect(),
            )),
        ),
        ("ray-0.25-at-0", ok(PlanarMeasure::radial_power(0.25, 0.0))),
        ("ray-0.5-at-pi", ok(PlanarMeasure::radial_power(0.5, PI))),
        ("ray-0.75-at-pi/2", ok(PlanarMeasure::radial_power(0.75, PI / 2.0))),
        ("ray-0.9-at-0", ok(PlanarMeasure::radial_power(0.9, 0.0))),
        ("area-0.5", ok(PlanarMeasure::area(0.5))),
        ("area-1", ok(PlanarMeasure::area(1.0))),
        ("area-2", ok(PlanarMeasure::area(2.0))),
        ("area-4", ok(PlanarMeasure::area(4.0))),
    ]
}

/// Three boundary measures with one, two and three atoms.
pub fn reference_boundary() -> Vec<(&'static str, AtomicBoundaryMeasure)> {
    let b = BoundaryPoint::new;
    vec![
        ("one-atom", AtomicBoundaryMeasure::single(0.0, 1.0).expect("valid")),
        (
            "two-atoms",
            AtomicBoundaryMeasure::new(vec![(b(0.0), 1.0), (b(PI), 0.5)]).expect("valid"),
        ),
        (
            "three-atoms",
            AtomicBoundaryMeasure::new(vec![
                (b(0.0), 1.0),
                (b(2.0 * PI / 3.0), 2.0),
                (b(4.0 * PI / 3.0), 0.5),
            ])
            .expect("valid"),
        ),
    ]
}

/// Box-scan and kernel verdicts for one `(ν, μ)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgreementRow {
    pub nu: String,
    pub mu: String,
    pub box_verdict: Verdict,
    pub kernel_verdict: Verdict,
}

/// Verdicts of [`dmu_carleson_test`] and of the RKT scan for every reference
/// pair. One kernel grid per `μ` covers the feature directions of all `ν`.
pub fn theorem_agreement_table() -> Result<Vec<AgreementRow>> {
    let nus = reference_planar();
    let features: Vec<f64> = nus.iter().flat_map(|(_, n)| n.feature_angles()).collect();
    let mut rows = Vec::new();
    for (mu_name, mu) in reference_boundary() {
        let grid = RktGrid::new(&mu, &RktGridConfig::default_for(&mu), &features)?;
        for (nu_name, nu) in &nus {
            rows.push(AgreementRow {
                nu: nu_name.to_string(),
                mu: mu_name.to_string(),
                box_verdict: dmu_carleson_test(nu, &mu, &BoxScanConfig::default())?.verdict,
                kernel_verdict: grid.scan(nu)?.verdict,
            });
        }
    }
    Ok(rows)
}

// hardy-core

fn division_identity(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_poly(&mut cx.rng, 30);
        let lam = BoundaryPoint::new(cx.rng.gen_range(0.0..2.0 * PI));
        let q = p.divided_quotient(lam);
        let back = &q.mul_linear(lam.point()) + &Poly::constant(p.eval(lam.point()));
        worst = worst.max(back.max_coeff_diff(&p));
    }
    Ok(at_most(name, worst, cx.tol(1e-12), "200 polynomials, degree <= 30".into()))
}

fn monomial_dirichlet(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut lams: Vec<f64> = vec![0.0, PI / 2.0, PI, 1.0];
    lams.extend((0..16).map(|_| cx.rng.gen_range(0.0..2.0 * PI)));
    let mut worst: f64 = 0.0;
    for &a in &lams {
        for n in 1..=50 {
            let q = Poly::monomial(n).divided_quotient(BoundaryPoint::new(a));
            worst = worst.max((q.h2_norm_sq() - n as f64).abs());
        }
    }
    Ok(at_most(name, worst, cx.tol(1e-12), "n = 1..50, 20 directions".into()))
}

fn lagrange_nodes(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mu = random_mu(&mut cx.rng, 6);
        let values: Vec<C64> = (0..mu.len())
            .map(|_| C64::new(cx.rng.gen_range(-1.0..1.0), cx.rng.gen_range(-1.0..1.0)))
            .collect();
        let p = lagrange_interp(mu.points(), &values)?;
        for (node, v) in mu.points().iter().zip(&values) {
            worst = worst.max((p.eval(node.point()) - v).norm());
        }
    }
    Ok(at_most(name, worst, cx.tol(1e-10), "200 node sets of size <= 6".into()))
}

fn h2_form_hermitian(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut bad = 0usize;
    for _ in 0..200 {
        let p = random_poly(&mut cx.rng, 20);
        let q = random_poly(&mut cx.rng, 20);
        if p.h2_inner(&q) != q.h2_inner(&p).conj() {
            bad += 1;
        }
        let n = p.h2_norm_sq();
        if n < 0.0 || (n == 0.0) != p.is_zero() {
            bad += 1;
        }
    }
    if Poly::zero().h2_norm_sq() != 0.0 {
        bad += 1;
    }
    Ok(at_most(name, bad as f64, 0.0, "exact symmetry and definiteness".into()))
}

// measures-quad

fn poisson_positivity(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut min = f64::INFINITY;
    for _ in 0..20 {
        let mu = random_mu(&mut cx.rng, 4);
        for _ in 0..500 {
            let z = random_disk_point(&mut cx.rng, 0.999_999);
            min = min.min(mu.poisson_extension(z)?);
        }
    }
    Ok(PropertyResult {
        name: name.into(),
        passed: min > 0.0,
        measured: min,
        tolerance: 0.0,
        detail: "minimum over 10^4 interior points".into(),
    })
}

fn poisson_mean_value(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_mu(&mut cx.rng, 4);
        for r in [0.1, 0.5, 0.9, 0.95] {
            let m = circle_mean(r, 2048, |z| mu.poisson_unchecked(z)) / mu.total_mass();
            worst = worst.max((m - 1.0).abs());
        }
    }
    Ok(at_most(name, worst, cx.tol(1e-8), "r in {0.1, 0.5, 0.9, 0.95}".into()))
}

fn box_nesting(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut nus: Vec<PlanarMeasure> = reference_planar().into_iter().map(|p| p.1).collect();
    let weighted: Vec<PlanarMeasure> = nus
        .iter()
        .map(|n| n.weight_by_product(&[BoundaryPoint::new(0.0), BoundaryPoint::new(2.0)]))
        .collect::<Result<_>>()?;
    nus.extend(weighted);
    let mut bad = 0usize;
    for nu in &nus {
        for _ in 0..10 {
            let zeta = BoundaryPoint::new(cx.rng.gen_range(0.0..2.0 * PI));
            let mut hs: Vec<f64> = (0..6).map(|_| cx.rng.gen_range(1e-4..0.999)).collect();
            hs.extend(nu.feature_angles().iter().map(|_| cx.rng.gen_range(1e-4..0.999)));
            hs.sort_by(f64::total_cmp);
            let masses: Vec<f64> = hs
                .iter()
                .map(|&h| nu.box_mass(&CarlesonBox { zeta, h }))
                .collect();
            bad += masses.windows(2).filter(|w| w[1] < w[0]).count();
        }
    }
    Ok(at_most(name, bad as f64, 0.0, "violations over nested boxes".into()))
}

fn quadrature_order(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    // ∫ exp(|z|²) Re(z)² dA = ∫ e^{r²} r² · 2r dr / 2 = 1/2.
    let exact = 0.5;
    let f = |z: C64| (z.norm_sqr()).exp() * z.re * z.re;
    let mut worst_ratio = f64::INFINITY;
    let mut prev: Option<f64> = None;
    for n_r in [4usize, 8, 16, 32] {
        let err = (DiskQuadrature::new(n_r, 64)?.integrate(f) - exact).abs();
        if let Some(p) = prev {
            if p > 1e-13 {
                worst_ratio = worst_ratio.min(p / err.max(1e-300));
            }
        }
        prev = Some(err);
    }
    let _ = &mut cx.rng;
    Ok(PropertyResult {
        name: name.into(),
        passed: worst_ratio >= 4.0,
        measured: worst_ratio,
        tolerance: 4.0,
        detail: "smallest error ratio per doubling of n_r".into(),
    })
}

// dirichlet-space

fn fubini(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut worst_coarse: f64 = 0.0;
    for _ in 0..100 {
        let f = random_poly(&mut cx.rng, 10);
        let mu = random_mu(&mut cx.rng, 4);
        let space = DirichletSpace::new(mu);
        let exact = space.dirichlet(&f);
        let fine = space.dirichlet_area(&f, 256, 256)?;
        let coarse = space.dirichlet_area(&f, 64, 64)?;
        worst = worst.max((fine - exact).abs() / (1.0 + exact));
        worst_coarse = worst_coarse.max((coarse - exact).abs() / (1.0 + exact));
    }
    let tol = cx.tol(1e-4);
    Ok(PropertyResult {
        name: name.into(),
        passed: worst <= tol && worst <= worst_coarse,
        measured: worst,
        tolerance: tol,
        detail: format!("256x256; 64x64 gives {worst_coarse:.3e}"),
    })
}

fn decomposition_round_trip(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let f = random_poly(&mut cx.rng, 12);
        let mu = random_mu(&mut cx.rng, 4);
        let space = DirichletSpace::new(mu.clone());
        let d = space.decompose(&f)?;
        worst = worst.max(d.reconstruct(mu.points()).max_coeff_diff(&f));
        let values: Vec<C64> = mu.points().iter().map(|l| f.eval(l.point())).collect();
        worst = worst.max(d.p.max_coeff_diff(&lagrange_interp(mu.points(), &values)?));
        let again = space.decompose(&d.reconstruct(mu.points()))?;
        worst = worst.max(again.p.max_coeff_diff(&d.p)).max(again.g.max_coeff_diff(&d.g));
    }
    Ok(at_most(name, worst, cx.tol(1e-10), "reconstruction, interpolant, idempotence".into()))
}

fn norm_inequality(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mu = random_mu(&mut cx.rng, 3);
    let space = DirichletSpace::new(mu);
    let mut sup: f64 = 0.0;
    for _ in 0..200 {
        let f = random_poly(&mut cx.rng, 15);
        if f.is_zero() {
            continue;
        }
        let d = space.decompose(&f)?;
        sup = sup.max(d.g.h2_norm() / space.norm(&f));
    }
    Ok(PropertyResult {
        name: name.into(),
        passed: sup.is_finite(),
        measured: sup,
        tolerance: f64::INFINITY,
        detail: "empirical sup of |g|_2 / |f|_mu over 200 samples".into(),
    })
}

fn gram_closed_form(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for _ in 0..5 {
        let space = DirichletSpace::new(random_mu(&mut cx.rng, 4));
        let g = space.gram_matrix(50);
        worst = worst.max(g.max_abs_diff(&space.gram_matrix_direct(50)));
        herm = herm.max(g.hermitian_defect());
        g.cholesky()?;
    }
    let tol = cx.tol(1e-12);
    Ok(PropertyResult {
        name: name.into(),
        passed: worst <= tol && herm <= cx.tol(1e-14),
        measured: worst,
        tolerance: tol,
        detail: format!("N = 50; Hermitian defect {herm:.2e}; Cholesky succeeded"),
    })
}

fn norm_dominates_h2(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let f = random_poly(&mut cx.rng, 15);
        let space = DirichletSpace::new(random_mu(&mut cx.rng, 4));
        worst = worst.min(space.norm_sq(&f) - f.h2_norm_sq());
    }
    Ok(PropertyResult {
        name: name.into(),
        passed: worst >= 0.0,
        measured: worst,
        tolerance: 0.0,
        detail: "minimum of |f|_mu^2 - |f|_2^2".into(),
    })
}

// kernels

fn a0_root(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut alphas = vec![0.25, 1.0, 4.0];
    alphas.extend((0..50).map(|_| cx.rng.gen_range(0.01..10.0)));
    for a in alphas {
        let a0 = solve_a0(a)?;
        let other = 1.0 / a0;
        worst = worst.max(((a0 - 1.0).powi(2) - a * a0).abs());
        if !(a0 > 0.0 && a0 < 1.0 && a0 < other) {
            worst = f64::INFINITY;
        }
    }
    Ok(at_most(name, worst, cx.tol(1e-14), "residual of (a-1)^2 = alpha a".into()))
}

fn one_atom_consistency(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut coarse: f64 = 0.0;
    for alpha in [0.25, 1.0, 4.0] {
        let lam = cx.rng.gen_range(0.0..2.0 * PI);
        let mu = AtomicBoundaryMeasure::single(lam, alpha)?;
        let model = OneAtomKernelModel::from_measure(&mu)?;
        let fine = TruncatedKernelSpace::new(mu.clone(), 120)?;
        let short = TruncatedKernelSpace::new(mu.clone(), 60)?;
        for _ in 0..40 {
            let w = random_disk_point(&mut cx.rng, 0.9);
            let z = random_disk_point(&mut cx.rng, 0.9);
            let exact = model.kernel(w, z);
            worst = worst.max((fine.kernel(w)?.eval(z) - exact).norm());
            coarse = coarse.max((short.kernel(w)?.eval(z) - exact).norm());
        }
    }
    let tol = cx.tol(1e-6);
    Ok(PropertyResult {
        name: name.into(),
        passed: worst <= tol && worst <= coarse,
        measured: worst,
        tolerance: tol,
        detail: format!("N = 120; N = 60 gives {coarse:.3e}"),
    })
}

fn reproducing(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let n = 40;
    let mut worst: f64 = 0.0;
    for atoms in [2usize, 3] {
        let mu = loop {
            let m = random_mu(&mut cx.rng, atoms);
            if m.len() == atoms {
                break m;
            }
        };
        let space = DirichletSpace::new(mu.clone());
        let kspace = TruncatedKernelSpace::new(mu, n)?;
        for _ in 0..50 {
            let w = random_disk_point(&mut cx.rng, 0.95);
            let k = kspace.kernel(w)?;
            let f = random_poly(&mut cx.rng, n);
            worst = worst.max((space.inner(&f, &k.coeffs) - f.eval(w)).norm());
            for m in 0..=n {
                let e = space.inner(&Poly::monomial(m), &k.coeffs) - w.powu(m as u32);
                worst = worst.max(e.norm() * 100.0);
            }
        }
    }
    Ok(at_most(
        name,
        worst,
        cx.tol(1e-8),
        "100 polynomials; monomial residuals scaled by 100 against 1e-10".into(),
    ))
}

fn hermitian_symmetry(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let one = OneAtomKernelModel::new(BoundaryPoint::new(1.0), 1.5)?;
    let mu = random_mu(&mut cx.rng, 3);
    let kspace = TruncatedKernelSpace::new(mu, 80)?;
    for _ in 0..100 {
        let w = random_disk_point(&mut cx.rng, 0.8);
        let z = random_disk_point(&mut cx.rng, 0.8);
        worst = worst.max((one.kernel(w, z) - one.kernel(z, w).conj()).norm());
        let kw = kspace.kernel(w)?;
        let kz = kspace.kernel(z)?;
        worst = worst.max((kw.eval(z) - kz.eval(w).conj()).norm());
    }
    Ok(at_most(name, worst, cx.tol(1e-10), "closed form and truncated".into()))
}

fn inf4_margin(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut min = f64::INFINITY;
    for alpha in [0.25, 1.0, 4.0] {
        let m = OneAtomKernelModel::new(BoundaryPoint::new(cx.rng.gen_range(0.0..2.0 * PI)), alpha)?;
        for _ in 0..10_000 {
            let z = random_disk_point(&mut cx.rng, 1.0 - 1e-12);
            min = min.min(m.inf4_margin(z));
        }
        min = min.min(m.inf4_margin(m.lambda.point() * (1.0 - 1e-3)));
    }
    let tol = -1e-12 * cx.scale;
    Ok(PropertyResult {
        name: name.into(),
        passed: min >= tol,
        measured: min,
        tolerance: tol,
        detail: "minimum over 3 x 10^4 points".into(),
    })
}

/// Cauchy–Schwarz for the positive-definite quotient `k^{μ_j}/k^μ` with
/// `μ_j = a_j δ_{λ_j}` and `a_j` from [`extremal_mass`].
fn quotient_cauchy_schwarz(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst = f64::NEG_INFINITY;
    for atoms in [2usize, 3] {
        let mu = loop {
            let m = random_mu(&mut cx.rng, atoms);
            if m.len() == atoms {
                break m;
            }
        };
        let kspace = TruncatedKernelSpace::new(mu.clone(), 160)?;
        for j in 0..mu.len() {
            let mj = OneAtomKernelModel::new(mu.points()[j], extremal_mass(&mu, j, 120)?)?;
            for _ in 0..200 {
                let z = random_disk_point(&mut cx.rng, 0.85);
                let w = random_disk_point(&mut cx.rng, 0.85);
                let kz = kspace.kernel(z)?;
                let kw = kspace.kernel(w)?;
                let lhs = (mj.kernel(z, w) / kz.eval(w)).norm_sqr();
                let rhs = mj.norm_sq(z) * mj.norm_sq(w) / (kz.norm_sq() * kw.norm_sq());
                worst = worst.max((lhs - rhs) / rhs);
            }
        }
    }
    Ok(at_most(name, worst, cx.tol(1e-6), "largest relative excess of lhs over rhs".into()))
}

fn angular_ratio_profile(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let h: Vec<f64> = (4..=20).map(|k| 0.5f64.powi(k)).collect();
    let mut worst_off: f64 = 0.0;
    let mut worst_on = f64::INFINITY;
    for alpha in [0.25, 1.0, 4.0] {
        let lam = cx.rng.gen_range(0.0..2.0 * PI);
        let m = OneAtomKernelModel::new(BoundaryPoint::new(lam), alpha)?;
        let zeta = C64::from_polar(1.0, lam + cx.rng.gen_range(0.3..2.0 * PI - 0.3));
        let off: Vec<f64> = h.iter().map(|&h| m.angular_ratio(zeta * (1.0 - h))).collect();
        if off.windows(2).any(|w| w[1] > w[0]) {
            worst_off = f64::INFINITY;
        }
        worst_off = worst_off.max(off[off.len() - 1] / off[0]);
        let on: Vec<f64> = h.iter().map(|&h| m.angular_ratio(m.lambda.point() * (1.0 - h))).collect();
        worst_on = worst_on.min(on.iter().copied().fold(f64::INFINITY, f64::min) / on[0]);
    }
    let tol = cx.tol(1e-2);
    Ok(PropertyResult {
        name: name.into(),
        passed: worst_off <= tol && worst_on >= 0.1,
        measured: worst_off,
        tolerance: tol,
        detail: format!("final/initial off the atom; along the atom min/initial = {worst_on:.3}"),
    })
}

// carleson-tests

fn theorem_agreement(name: &str, _cx: &mut Ctx) -> Result<PropertyResult> {
    let rows = theorem_agreement_table()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.box_verdict != r.kernel_verdict)
        .map(|r| format!("{}/{}: {} vs {}", r.nu, r.mu, r.box_verdict, r.kernel_verdict))
        .collect();
    Ok(PropertyResult {
        name: name.into(),
        passed: bad.is_empty(),
        measured: bad.len() as f64,
        tolerance: 0.0,
        detail: if bad.is_empty() {
            format!("{} pairs agree", rows.len())
        } else {
            bad.join("; ")
        },
    })
}

fn monotonicity(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let cfg = BoxScanConfig {
        k_max: 12,
        ..BoxScanConfig::default()
    };
    let rcfg = RktGridConfig {
        n_angles: 16,
        k_max: 6,
        ..RktGridConfig::default_for(&AtomicBoundaryMeasure::single(0.0, 1.0)?)
    };
    let mut bad = 0usize;
    for _ in 0..10 {
        let mu = random_mu(&mut cx.rng, 2);
        let base: Vec<(C64, f64)> = (0..3)
            .map(|_| (random_disk_point(&mut cx.rng, 0.98), cx.rng.gen_range(0.1..2.0)))
            .collect();
        let mut more = base.clone();
        more.push((random_disk_point(&mut cx.rng, 0.98), cx.rng.gen_range(0.1..2.0)));
        more[0].1 += 0.5;
        let (a, b) = (PlanarMeasure::atoms(base)?, PlanarMeasure::atoms(more)?);
        // Same directions for both: the grid of the larger measure.
        let grid = RktGrid::new(&mu, &rcfg, &b.feature_angles())?;
        if grid.scan(&b)?.sup_ratio < grid.scan(&a)?.sup_ratio {
            bad += 1;
        }
        // The larger measure's features include the smaller one's directions.
        let boxed = |n: &PlanarMeasure| -> Result<f64> { Ok(h2_box_sup(n, &cfg)?.sup_ratio) };
        if boxed(&b)? < boxed(&a)? {
            bad += 1;
        }
        let s = cx.rng.gen_range(1.0..3.0);
        let area = PlanarMeasure::area(1.0)?;
        if h2_box_sup(&area.scaled(s)?, &cfg)?.sup_ratio < h2_box_sup(&area, &cfg)?.sup_ratio {
            bad += 1;
        }
        let w: Vec<C64> = (0..8).map(|_| random_disk_point(&mut cx.rng, 0.9)).collect();
        if rkt_sup(&b, &mu, &w, Some(80))?.sup < rkt_sup(&a, &mu, &w, Some(80))?.sup {
            bad += 1;
        }
    }
    Ok(at_most(name, bad as f64, 0.0, "box and kernel sups after adding mass".into()))
}

fn rotation_equivariance(name: &str, cx: &mut Ctx) -> Result<PropertyResult> {
    let cfg = BoxScanConfig {
        k_max: 14,
        ..BoxScanConfig::default()
    };
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    for (_, nu) in reference_planar() {
        let mu = random_mu(&mut cx.rng, 3);
        let t = cx.rng.gen_range(0.0..2.0 * PI);
        let a = dmu_carleson_test(&nu, &mu, &cfg)?;
        let b = dmu_carleson_test(&nu.rotated(t), &mu.rotated(t), &cfg.rotated(t))?;
        worst = worst.max(rel(a.sup_ratio, b.sup_ratio));
    }
    for (_, nu) in reference_planar().into_iter().step_by(3) {
        let t = cx.rng.gen_range(0.0..2.0 * PI);
        let mu = AtomicBoundaryMeasure::single(cx.rng.gen_range(0.0..2.0 * PI), 1.0)?;
        let rcfg = RktGridConfig {
            n_angles: 16,
            k_max: 8,
            ..RktGridConfig::default_for(&mu)
        };
        let a = rkt_scan(&nu, &mu, &rcfg)?;
        let b = rkt_scan(&nu.rotated(t), &mu.rotated(t), &rcfg.rotated(t))?;
        worst = worst.max(rel(a.sup_ratio, b.sup_ratio));
    }
    Ok(at_most(name, worst, cx.tol(1e-10), "relative change of sup ratios".into()))
}

fn trivial_estimate_check(name: &str, _cx: &mut Ctx) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for (_, nu) in reference_planar() {
        for (_, mu) in reference_boundary() {
            for k in 1..=14 {
                for e in trivial_estimate(&nu, &mu, 0.5f64.powi(k))? {
                    worst = worst.max(e.mass / e.bound);
                }
            }
        }
    }
    Ok(at_most(name, worst, 1.0, "largest mass / bound".into()))
}

fn compactness_check(name: &str, _cx: &mut Ctx) -> Result<PropertyResult> {
    let nu = PlanarMeasure::area(1.0)?;
    let mu = AtomicBoundaryMeasure::single(0.0, 1.0)?;
    let h: Vec<f64> = (1..=14).map(|k| 0.5f64.powi(k)).collect();
    let mut worst: f64 = 0.0;
    for zeta in [PI, PI / 2.0] {
        let p = compactness_profile(&nu, &mu, BoundaryPoint::new(zeta), &h, None)?;
        if p.windows(2).any(|w| w[1] >= w[0]) {
            worst = f64::INFINITY;
        }
        worst = worst.max(p[p.len() - 1] / p[0]);
    }
    let rejected = matches!(
        compactness_profile(&nu, &mu, BoundaryPoint::new(0.0), &h, None),
        Err(Error::AtomDirection { .. })
    );
    let tol = 1e-2;
    Ok(PropertyResult {
        name: name.into(),
        passed: worst <= tol && rejected,
        measured: worst,
        tolerance: tol,
        detail: format!("final/initial at -1 and i; atom direction rejected: {rejected}"),
    })
}
