//! The `dmu` command line: job parsing, execution and report rendering.
//!
//! Every subcommand is first turned into a [`JobSpec`], which may also be read
//! from a JSON file with `dmu run --job job.json`. Reports print as text
//! (6 significant digits), CSV, or full-precision JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::carleson::{
    alpha_carleson_sup, compactness_profile, dmu_carleson_test, h2_box_sup, BoxScanConfig,
    RktGrid, RktGridConfig, ScanReport, MAX_TRUNCATION_DEGREE,
};
use crate::dirichlet::{local_dirichlet, DirichletSpace};
use crate::error::Error;
use crate::hardy::{BoundaryPoint, Poly, C64};
use crate::kernels::{
    default_degree, weighted_dirichlet_kernel, OneAtomKernelModel, TruncatedKernelSpace,
    DEFAULT_KERNEL_TOL,
};
use crate::measures::{AtomicBoundaryMeasure, PlanarMeasure};
use crate::verify::{verify_suite, VerifyConfig, VerifyReport, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norm,
    Decompose,
    Gram,
    KernelEval,
    Carleson,
    Rkt,
    Compactness,
    AlphaCarleson,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

/// Parameters of one job. Fields a command does not use are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<C64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<C64>,
    /// Adds an `n × n` polar grid of evaluation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Evaluate the weighted Dirichlet kernel of this order instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub compare_direct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the area-quadrature cross-check in `norm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Target `|w|^N` for the automatic kernel truncation degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
    /// Multiplier on every `verify` tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        JobSpec {
            command,
            format: Format::default(),
            mu: None,
            f: None,
            nu: None,
            params: Params::default(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTerm {
    pub angle: f64,
    pub mass: f64,
    pub local_dirichlet: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaCheck {
    pub value: f64,
    pub error: f64,
    pub relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormReport {
    pub norm_sq: f64,
    pub h2_norm_sq: f64,
    pub dirichlet: f64,
    pub local: Vec<LocalTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<AreaCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeReport {
    pub p: Poly,
    pub g: Poly,
    pub reconstruction_error: f64,
    pub g_h2_norm: f64,
    pub f_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramReport {
    pub degree: usize,
    pub entries: Vec<Vec<C64>>,
    pub hermitian_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_max_diff: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    ClosedForm,
    Truncated,
    WeightedDirichlet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelValue {
    pub z: C64,
    pub value: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf4_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalReport {
    pub method: KernelMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub w: C64,
    pub norm_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular_ratio: Option<f64>,
    pub values: Vec<KernelValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    H2Box,
    DmuBox,
    AlphaBox,
    Kernel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOutput {
    pub kind: ScanKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub report: ScanReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePoint {
    pub level: u32,
    pub h: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactnessReport {
    pub zeta: f64,
    pub profile: Vec<ProfilePoint>,
    /// Last ratio over the first.
    pub decay: f64,
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "result", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Report {
    Norm(NormReport),
    Decompose(DecomposeReport),
    Gram(GramReport),
    KernelEval(KernelEvalReport),
    Carleson(ScanOutput),
    Rkt(ScanOutput),
    Compactness(CompactnessReport),
    AlphaCarleson(ScanOutput),
    Verify(VerifyReport),
}

// -------------------------------------------------------------- execution

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| input(format!("invalid {what} in {}: {e}", path.display())))
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str, command: Command) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| input(format!("{command:?} requires --{flag}")))
}

fn load_mu(job: &JobSpec) -> Result<AtomicBoundaryMeasure, CliError> {
    read_json(need(&job.mu, "mu", job.command)?, "boundary measure")
}

fn load_f(job: &JobSpec) -> Result<Poly, CliError> {
    read_json(need(&job.f, "f", job.command)?, "polynomial")
}

fn load_nu(job: &JobSpec) -> Result<PlanarMeasure, CliError> {
    read_json(need(&job.nu, "nu", job.command)?, "planar measure")
}

fn positive(x: Option<f64>, name: &str) -> Result<Option<f64>, CliError> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => {
            Err(input(format!("{name} must be positive and finite, got {v}")))
        }
        _ => Ok(x),
    }
}

fn box_config(p: &Params) -> Result<BoxScanConfig, CliError> {
    let d = BoxScanConfig::default();
    let cfg = BoxScanConfig {
        n_zeta: p.n_directions.unwrap_or(d.n_zeta),
        k_min: p.k_min.unwrap_or(d.k_min),
        k_max: p.k_max.unwrap_or(d.k_max),
        rho: p.rho.unwrap_or(d.rho),
        offset: p.offset.unwrap_or(d.offset),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Degree override, else the automatic rule for `|w| ≤ r_max` at `tol`.
fn truncation_degree(p: &Params, t: &Tolerances, r_max: f64) -> Result<usize, CliError> {
    let tol = positive(t.kernel, "kernel tolerance")?.unwrap_or(DEFAULT_KERNEL_TOL);
    if tol >= 1.0 {
        return Err(input(format!("kernel tolerance must be below 1, got {tol}")));
    }
    let n = p.degree.unwrap_or_else(|| default_degree(r_max, tol));
    if n > MAX_TRUNCATION_DEGREE {
        return Err(input(format!(
            "truncation degree {n} exceeds the limit {MAX_TRUNCATION_DEGREE}"
        )));
    }
    Ok(n)
}

pub fn execute(job: &JobSpec) -> Result<Report, CliError> {
    let p = &job.params;
    match job.command {
        Command::Norm => norm(job),
        Command::Decompose => {
            let (mu, f) = (load_mu(job)?, load_f(job)?);
            let space = DirichletSpace::new(mu);
            let d = space.decompose(&f)?;
            let back = d.reconstruct(space.mu().points());
            Ok(Report::Decompose(DecomposeReport {
                reconstruction_error: back.max_coeff_diff(&f),
                g_h2_norm: d.g.h2_norm(),
                f_norm: space.norm(&f),
                p: d.p,
                g: d.g,
            }))
        }
        Command::Gram => {
            let space = DirichletSpace::new(load_mu(job)?);
            let n = p.degree.unwrap_or(8);
            if n > MAX_TRUNCATION_DEGREE {
                return Err(input(format!(
                    "Gram degree {n} exceeds the limit {MAX_TRUNCATION_DEGREE}"
                )));
            }
            let g = space.gram_matrix(n);
            let direct = p
                .compare_direct
                .then(|| space.gram_matrix_direct(n).max_abs_diff(&g));
            Ok(Report::Gram(GramReport {
                degree: n,
                entries: g.rows(),
                hermitian_defect: g.hermitian_defect(),
                direct_max_diff: direct,
            }))
        }
        Command::KernelEval => kernel_eval(job),
        Command::Carleson => {
            let nu = load_nu(job)?;
            let cfg = box_config(p)?;
            Ok(Report::Carleson(match &job.mu {
                Some(_) => ScanOutput {
                    kind: ScanKind::DmuBox,
                    alpha: None,
                    degree: None,
                    report: dmu_carleson_test(&nu, &load_mu(job)?, &cfg)?,
                },
                None => ScanOutput {
                    kind: ScanKind::H2Box,
                    alpha: None,
                    degree: None,
                    report: h2_box_sup(&nu, &cfg)?,
                },
            }))
        }
        Command::AlphaCarleson => {
            let nu = load_nu(job)?;
            let alpha = p
                .alpha
                .ok_or_else(|| input("alpha-carleson requires --alpha"))?;
            let cfg = box_config(p)?;
            Ok(Report::AlphaCarleson(ScanOutput {
                kind: ScanKind::AlphaBox,
                alpha: Some(alpha),
                degree: None,
                report: alpha_carleson_sup(&nu, alpha, &cfg)?,
            }))
        }
        Command::Rkt => {
            let (nu, mu) = (load_nu(job)?, load_mu(job)?);
            let d = RktGridConfig::default_for(&mu);
            let mut cfg = RktGridConfig {
                n_angles: p.n_directions.unwrap_or(d.n_angles),
                k_min: p.k_min.unwrap_or(d.k_min),
                k_max: p.k_max.unwrap_or(d.k_max),
                rho: p.rho.unwrap_or(d.rho),
                offset: p.offset.unwrap_or(d.offset),
                degree: None,
            };
            cfg.validate()?;
            if mu.len() > 1 {
                let r_max = 1.0 - 0.5f64.powi(cfg.k_max as i32);
                cfg.degree = Some(truncation_degree(p, &job.tolerances, r_max)?);
            }
            let grid = RktGrid::new(&mu, &cfg, &nu.feature_angles())?;
            Ok(Report::Rkt(ScanOutput {
                kind: ScanKind::Kernel,
                alpha: None,
                degree: grid.degree(),
                report: grid.scan(&nu)?,
            }))
        }
        Command::Compactness => {
            let (nu, mu) = (load_nu(job)?, load_mu(job)?);
            let zeta = p
                .zeta
                .ok_or_else(|| input("compactness requires --zeta"))?;
            if !zeta.is_finite() {
                return Err(input(format!("zeta must be finite, got {zeta}")));
            }
            let k_min = p.k_min.unwrap_or(1);
            let k_max = p.k_max.unwrap_or(14);
            if k_min < 1 || k_min > k_max || k_max > 40 {
                return Err(input(format!(
                    "profile levels need 1 <= k_min <= k_max <= 40, got {k_min}..{k_max}"
                )));
            }
            let levels: Vec<u32> = (k_min..=k_max).collect();
            let hs: Vec<f64> = levels.iter().map(|&k| 0.5f64.powi(k as i32)).collect();
            let degree = if mu.len() > 1 {
                Some(truncation_degree(p, &job.tolerances, 1.0 - hs[hs.len() - 1])?)
            } else {
                None
            };
            let ratios = compactness_profile(&nu, &mu, BoundaryPoint::new(zeta), &hs, degree)?;
            let profile: Vec<ProfilePoint> = levels
                .iter()
                .zip(&hs)
                .zip(&ratios)
                .map(|((&level, &h), &ratio)| ProfilePoint { level, h, ratio })
                .collect();
            let decay = if ratios[0] > 0.0 {
                ratios[ratios.len() - 1] / ratios[0]
            } else {
                0.0
            };
            Ok(Report::Compactness(CompactnessReport {
                zeta,
                monotone: ratios.windows(2).all(|w| w[1] <= w[0]),
                decay,
                profile,
            }))
        }
        Command::Verify => {
            let scale = positive(job.tolerances.scale, "tolerance scale")?.unwrap_or(1.0);
            let cfg = VerifyConfig {
                seed: p.seed.unwrap_or(DEFAULT_SEED),
                tolerance_scale: scale,
                only: p.only.clone(),
            };
            Ok(Report::Verify(verify_suite(&cfg)))
        }
    }
}

fn norm(job: &JobSpec) -> Result<Report, CliError> {
    let (mu, f) = (load_mu(job)?, load_f(job)?);
    let space = DirichletSpace::new(mu);
    let local = space
        .mu()
        .atoms()
        .map(|(pt, mass)| LocalTerm {
            angle: pt.angle(),
            mass,
            local_dirichlet: local_dirichlet(&f, pt),
        })
        .collect();
    let dirichlet = space.dirichlet(&f);
    let area = match positive(job.tolerances.area, "area tolerance")? {
        Some(tol) => {
            let est = space.dirichlet_area_converged(&f, 32, 1024, tol)?;
            Some(AreaCheck {
                value: est.value,
                error: est.error,
                relative_gap: (est.value - dirichlet).abs() / (1.0 + dirichlet),
            })
        }
        None => None,
    };
    Ok(Report::Norm(NormReport {
        norm_sq: space.norm_sq(&f),
        h2_norm_sq: f.h2_norm_sq(),
        dirichlet,
        local,
        area,
    }))
}

fn kernel_eval(job: &JobSpec) -> Result<Report, CliError> {
    let p = &job.params;
    let w = p.w.ok_or_else(|| input("kernel-eval requires --w"))?;
    let mut zs = p.z.clone();
    if let Some(n) = p.grid {
        if n == 0 || n > 1000 {
            return Err(input(format!("grid size must be in 1..=1000, got {n}")));
        }
        for i in 0..n {
            let r = (i + 1) as f64 / (n + 1) as f64;
            for j in 0..n {
                zs.push(C64::from_polar(r, std::f64::consts::TAU * j as f64 / n as f64));
            }
        }
    }
    if zs.is_empty() {
        zs.push(w);
    }
    for &z in std::iter::once(&w).chain(&zs) {
        if z.norm().is_nan() || z.norm() >= 1.0 {
            return Err(Error::OutsideDisk {
                re: z.re,
                im: z.im,
                modulus: z.norm(),
            }
            .into());
        }
    }
    if let Some(alpha) = p.dirichlet_alpha {
        let values = zs
            .iter()
            .map(|&z| {
                Ok(KernelValue {
                    z,
                    value: weighted_dirichlet_kernel(alpha, w, z)?,
                    inf4_margin: None,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        return Ok(Report::KernelEval(KernelEvalReport {
            method: KernelMethod::WeightedDirichlet,
            degree: None,
            w,
            norm_sq: weighted_dirichlet_kernel(alpha, w, w)?.re,
            angular_ratio: None,
            values,
        }));
    }
    let mu = load_mu(job)?;
    if mu.len() == 1 && p.degree.is_none() {
        let m = OneAtomKernelModel::from_measure(&mu)?;
        let values = zs
            .iter()
            .map(|&z| KernelValue {
                z,
                value: m.kernel(w, z),
                inf4_margin: Some(m.inf4_margin(z)),
            })
            .collect();
        return Ok(Report::KernelEval(KernelEvalReport {
            method: KernelMethod::ClosedForm,
            degree: None,
            w,
            norm_sq: m.norm_sq(w),
            angular_ratio: Some(m.angular_ratio(w)),
            values,
        }));
    }
    let r_max = zs.iter().chain(std::iter::once(&w)).map(|z| z.norm()).fold(0.0, f64::max);
    let n = truncation_degree(p, &job.tolerances, r_max)?;
    let k = TruncatedKernelSpace::new(mu, n)?.kernel(w)?;
    let values = zs
        .iter()
        .map(|&z| KernelValue {
            z,
            value: k.eval(z),
            inf4_margin: None,
        })
        .collect();
    Ok(Report::KernelEval(KernelEvalReport {
        method: KernelMethod::Truncated,
        degree: Some(n),
        w,
        norm_sq: k.norm_sq(),
        angular_ratio: None,
        values,
    }))
}

// -------------------------------------------------------------- rendering

/// `x` rounded to 6 significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        let s = format!("{:.*}", (5 - e).max(0) as usize, x);
        // Rounding can carry into a new digit (999999.5 -> 1000000).
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

fn sig6c(z: C64) -> String {
    if z.im < 0.0 {
        format!("{} - {}i", sig6(z.re), sig6(-z.im))
    } else {
        format!("{} + {}i", sig6(z.re), sig6(z.im))
    }
}

fn poly_text(p: &Poly) -> String {
    let parts: Vec<String> = p
        .coeffs()
        .iter()
        .map(|c| {
            if c.im == 0.0 {
                sig6(c.re)
            } else {
                format!("({})", sig6c(*c))
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

/// The serialized name of a unit enum variant.
fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn scan_text(out: &mut String, s: &ScanOutput) {
    let _ = writeln!(out, "test = {}", tag(&s.kind));
    if let Some(a) = s.alpha {
        let _ = writeln!(out, "alpha = {}", sig6(a));
    }
    if let Some(n) = s.degree {
        let _ = writeln!(out, "degree = {n}");
    }
    let _ = writeln!(out, "verdict = {}", s.report.verdict);
    let _ = writeln!(out, "sup_ratio = {}", sig6(s.report.sup_ratio));
    for (l, w) in s.report.levels.iter().zip(&s.report.witnesses) {
        let _ = writeln!(
            out,
            "level {:>2}  h = {}  sup = {}  at angle {}",
            l.level,
            sig6(l.h),
            sig6(l.sup),
            sig6(w.zeta)
        );
    }
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Norm(r) => {
            let _ = writeln!(out, "norm_sq = {}", sig6(r.norm_sq));
            let _ = writeln!(out, "h2_norm_sq = {}", sig6(r.h2_norm_sq));
            let _ = writeln!(out, "dirichlet = {}", sig6(r.dirichlet));
            for t in &r.local {
                let _ = writeln!(
                    out,
                    "local angle = {}  mass = {}  D = {}",
                    sig6(t.angle),
                    sig6(t.mass),
                    sig6(t.local_dirichlet)
                );
            }
            if let Some(a) = &r.area {
                let _ = writeln!(
                    out,
                    "area_dirichlet = {}  error = {}  relative_gap = {}",
                    sig6(a.value),
                    sig6(a.error),
                    sig6(a.relative_gap)
                );
            }
        }
        Report::Decompose(r) => {
            let _ = writeln!(out, "p = {}", poly_text(&r.p));
            let _ = writeln!(out, "g = {}", poly_text(&r.g));
            let _ = writeln!(out, "reconstruction_error = {}", sig6(r.reconstruction_error));
            let _ = writeln!(out, "g_h2_norm = {}", sig6(r.g_h2_norm));
            let _ = writeln!(out, "f_norm = {}", sig6(r.f_norm));
        }
        Report::Gram(r) => {
            let _ = writeln!(out, "degree = {}", r.degree);
            for row in &r.entries {
                let cells: Vec<String> = row.iter().map(|&c| sig6c(c)).collect();
                let _ = writeln!(out, "{}", cells.join("  "));
            }
            let _ = writeln!(out, "hermitian_defect = {}", sig6(r.hermitian_defect));
            if let Some(d) = r.direct_max_diff {
                let _ = writeln!(out, "direct_max_diff = {}", sig6(d));
            }
        }
        Report::KernelEval(r) => {
            let _ = writeln!(out, "method = {}", tag(&r.method));
            if let Some(n) = r.degree {
                let _ = writeln!(out, "degree = {n}");
            }
            let _ = writeln!(out, "w = {}", sig6c(r.w));
            let _ = writeln!(out, "norm_sq = {}", sig6(r.norm_sq));
            if let Some(a) = r.angular_ratio {
                let _ = writeln!(out, "angular_ratio = {}", sig6(a));
            }
            for v in &r.values {
                let _ = write!(out, "k(w, {}) = {}", sig6c(v.z), sig6c(v.value));
                if let Some(m) = v.inf4_margin {
                    let _ = write!(out, "  inf4_margin = {}", sig6(m));
                }
                out.push('\n');
            }
        }
        Report::Carleson(s) | Report::Rkt(s) | Report::AlphaCarleson(s) => scan_text(&mut out, s),
        Report::Compactness(r) => {
            let _ = writeln!(out, "zeta = {}", sig6(r.zeta));
            for p in &r.profile {
                let _ = writeln!(out, "level {:>2}  h = {}  ratio = {}", p.level, sig6(p.h), sig6(p.ratio));
            }
            let _ = writeln!(out, "decay = {}", sig6(r.decay));
            let _ = writeln!(out, "monotone = {}", r.monotone);
        }
        Report::Verify(r) => {
            for p in &r.results {
                let _ = writeln!(
                    out,
                    "{} {}  measured = {}  tolerance = {}  {}",
                    if p.passed { "PASS" } else { "FAIL" },
                    p.name,
                    sig6(p.measured),
                    sig6(p.tolerance),
                    p.detail
                );
            }
            let passed = r.results.iter().filter(|p| p.passed).count();
            let _ = writeln!(
                out,
                "{passed}/{} passed  seed = {:#x}  tolerance_scale = {}",
                r.results.len(),
                r.seed,
                sig6(r.tolerance_scale)
            );
        }
    }
    out
}

pub fn render_csv(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Norm(r) => {
            out.push_str("norm_sq,h2_norm_sq,dirichlet\n");
            let _ = writeln!(out, "{:e},{:e},{:e}", r.norm_sq, r.h2_norm_sq, r.dirichlet);
        }
        Report::Decompose(r) => {
            out.push_str("part,k,re,im\n");
            for (name, poly) in [("p", &r.p), ("g", &r.g)] {
                for (k, c) in poly.coeffs().iter().enumerate() {
                    let _ = writeln!(out, "{name},{k},{:e},{:e}", c.re, c.im);
                }
            }
        }
        Report::Gram(r) => {
            out.push_str("m,k,re,im\n");
            for (m, row) in r.entries.iter().enumerate() {
                for (k, c) in row.iter().enumerate() {
                    let _ = writeln!(out, "{m},{k},{:e},{:e}", c.re, c.im);
                }
            }
        }
        Report::KernelEval(r) => {
            out.push_str("z_re,z_im,value_re,value_im,inf4_margin\n");
            for v in &r.values {
                let margin = v.inf4_margin.map(|m| format!("{m:e}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{:e},{:e},{:e},{:e},{margin}",
                    v.z.re, v.z.im, v.value.re, v.value.im
                );
            }
        }
        Report::Carleson(s) | Report::Rkt(s) | Report::AlphaCarleson(s) => {
            out.push_str(&s.report.to_csv())
        }
        Report::Compactness(r) => {
            out.push_str("level,h,ratio\n");
            for p in &r.profile {
                let _ = writeln!(out, "{},{:e},{:e}", p.level, p.h, p.ratio);
            }
        }
        Report::Verify(r) => {
            out.push_str("name,passed,measured,tolerance\n");
            for p in &r.results {
                let _ = writeln!(out, "{},{},{:e},{:e}", p.name, p.passed, p.measured, p.tolerance);
            }
        }
    }
    out
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Text => render_text(report),
    }
}

// ------------------------------------------------------------------ argv

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got `{s}`")),
    }
}

#[derive(Parser, Debug)]
#[command(name = "dmu", version, about = "Norms, kernels and Carleson tests in D(mu)")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug, Default)]
struct ScanArgs {
    /// Uniform directions per level.
    #[arg(long)]
    n_directions: Option<usize>,
    #[arg(long)]
    k_min: Option<u32>,
    #[arg(long)]
    k_max: Option<u32>,
    /// Growth factor over three levels that signals divergence.
    #[arg(long)]
    rho: Option<f64>,
    /// Rotation of the uniform directions, in radians.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// ‖f‖²_μ with its H² and Dirichlet parts.
    Norm {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        f: PathBuf,
        /// Cross-check D_μ(f) by area quadrature to this relative tolerance.
        #[arg(long)]
        area_tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// f = p + ∏(z - λ_j) g.
    Decompose {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Gram matrix of 1, z, …, z^N.
    Gram {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
        /// Also build the matrix from divided quotients and report the gap.
        #[arg(long)]
        compare_direct: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Reproducing kernel k_w(z).
    KernelEval {
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w: C64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Vec<C64>,
        /// Add an n × n polar grid of evaluation points.
        #[arg(long)]
        grid: Option<usize>,
        /// Truncation degree; forces the truncated kernel.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        kernel_tol: Option<f64>,
        /// Weighted Dirichlet kernel of order alpha in [0, 1] instead of D(mu).
        #[arg(long)]
        dirichlet_alpha: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Carleson box scan; H² without --mu, D(μ) with it.
    Carleson {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Reproducing-kernel test on a radial grid.
    Rkt {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        kernel_tol: Option<f64>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Kernel ratio along the radius toward a non-atom direction.
    Compactness {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        /// Direction angle in radians.
        #[arg(long, allow_hyphen_values = true)]
        zeta: f64,
        #[arg(long)]
        k_min: Option<u32>,
        #[arg(long)]
        k_max: Option<u32>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        kernel_tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Box scan normalized by h^α, or by 1/log(e/h) at α = 0.
    AlphaCarleson {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance_scale: Option<f64>,
        /// Only properties whose name starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Execute a JSON job file.
    Run {
        #[arg(long)]
        job: PathBuf,
        /// Overrides the job's format.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn apply_scan(p: &mut Params, s: ScanArgs) {
    p.n_directions = s.n_directions;
    p.k_min = s.k_min;
    p.k_max = s.k_max;
    p.rho = s.rho;
    p.offset = s.offset;
}

fn job_from_cli(sub: Sub) -> Result<JobSpec, CliError> {
    let job = match sub {
        Sub::Norm {
            mu,
            f,
            area_tol,
            common,
        } => JobSpec {
            mu: Some(mu),
            f: Some(f),
            format: common.format,
            tolerances: Tolerances {
                area: area_tol,
                ..Tolerances::default()
            },
            ..JobSpec::new(Command::Norm)
        },
        Sub::Decompose { mu, f, common } => JobSpec {
            mu: Some(mu),
            f: Some(f),
            format: common.format,
            ..JobSpec::new(Command::Decompose)
        },
        Sub::Gram {
            mu,
            degree,
            compare_direct,
            common,
        } => JobSpec {
            mu: Some(mu),
            format: common.format,
            params: Params {
                degree,
                compare_direct,
                ..Params::default()
            },
            ..JobSpec::new(Command::Gram)
        },
        Sub::KernelEval {
            mu,
            w,
            z,
            grid,
            degree,
            kernel_tol,
            dirichlet_alpha,
            common,
        } => JobSpec {
            mu,
            format: common.format,
            params: Params {
                w: Some(w),
                z,
                grid,
                degree,
                dirichlet_alpha,
                ..Params::default()
            },
            tolerances: Tolerances {
                kernel: kernel_tol,
                ..Tolerances::default()
            },
            ..JobSpec::new(Command::KernelEval)
        },
        Sub::Carleson {
            nu,
            mu,
            scan,
            common,
        } => {
            let mut job = JobSpec {
                nu: Some(nu),
                mu,
                format: common.format,
                ..JobSpec::new(Command::Carleson)
            };
            apply_scan(&mut job.params, scan);
            job
        }
        Sub::Rkt {
            nu,
            mu,
            degree,
            kernel_tol,
            scan,
            common,
        } => {
            let mut job = JobSpec {
                nu: Some(nu),
                mu: Some(mu),
                format: common.format,
                tolerances: Tolerances {
                    kernel: kernel_tol,
                    ..Tolerances::default()
                },
                ..JobSpec::new(Command::Rkt)
            };
            job.params.degree = degree;
            apply_scan(&mut job.params, scan);
            job
        }
        Sub::Compactness {
            nu,
            mu,
            zeta,
            k_min,
            k_max,
            degree,
            kernel_tol,
            common,
        } => JobSpec {
            nu: Some(nu),
            mu: Some(mu),
            format: common.format,
            params: Params {
                zeta: Some(zeta),
                k_min,
                k_max,
                degree,
                ..Params::default()
            },
            tolerances: Tolerances {
                kernel: kernel_tol,
                ..Tolerances::default()
            },
            ..JobSpec::new(Command::Compactness)
        },
        Sub::AlphaCarleson {
            nu,
            alpha,
            scan,
            common,
        } => {
            let mut job = JobSpec {
                nu: Some(nu),
                format: common.format,
                ..JobSpec::new(Command::AlphaCarleson)
            };
            job.params.alpha = Some(alpha);
            apply_scan(&mut job.params, scan);
            job
        }
        Sub::Verify {
            seed,
            tolerance_scale,
            only,
            common,
        } => JobSpec {
            format: common.format,
            params: Params {
                seed,
                only,
                ..Params::default()
            },
            tolerances: Tolerances {
                scale: tolerance_scale,
                ..Tolerances::default()
            },
            ..JobSpec::new(Command::Verify)
        },
        Sub::Run { job, format } => {
            let mut spec: JobSpec = read_json(&job, "job")?;
            if let Some(f) = format {
                spec.format = f;
            }
            spec
        }
    };
    Ok(job)
}

/// Parse `argv`, execute, write the report to `out` and diagnostics to
/// `err`; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    let result = job_from_cli(cli.command).and_then(|job| Ok((execute(&job)?, job.format)));
    match result {
        Ok((report, format)) => {
            if out.write_all(render(&report, format).as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            match &report {
                Report::Verify(v) if !v.all_passed => EXIT_VERIFY_FAILED,
                _ => EXIT_OK,
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}
