//! Named probe sets run by `grushin verify`.
//!
//! A suite passes when every report passes; reports in the no-guarantee
//! regime are informational and never fail a suite.

use crate::config::Config;
use crate::dims::Dims;
use crate::error::{param, Result};
use crate::family::{random_field, FamilyKind, FamilySpec};
use crate::field::{analyze_on, lp_norm, synthesize};
use crate::geometry::{weight_integral_check, Layer, Point};
use crate::grid::{make_grid, Grid, GridSpec};
use crate::hermite::{eigen_residual_fd, eigen_residual_spectral, multi_indices, HermiteTable};
use crate::probe::{ProbeReport, Verdict};
use crate::quad::Composite;
use crate::symbol::{riesz_profile, Symbol2D};
use crate::verify::{
    coefficient_decay_probe, dyadic_decay_probe, kernel_samples, kernel_table, mixed_norm_decay_probe, pointwise_report,
    weighted_plancherel_probe, DecayProbeSpec, KernelSampleSpec, PlancherelKind, PlancherelParams, VolumeVariant,
};
use rayon::prelude::*;

pub const SUITES: [&str; 8] = ["core", "coefficients", "decay", "mixed", "plancherel", "kernel", "geometry", "thresholds"];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: String,
    pub reports: Vec<ProbeReport>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.no_guarantee || r.verdict.passed())
    }

    pub fn aggregate_line(&self) -> String {
        let failed = self.reports.iter().filter(|r| !r.no_guarantee && !r.verdict.passed()).count();
        format!(
            "suite={} aggregate={} reports={} failed={}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.reports.len(),
            failed
        )
    }
}

/// Report for a single measured error against a tolerance.
pub fn tolerance_report(label: impl Into<String>, error: f64, tol: f64) -> ProbeReport {
    let mut rep = ProbeReport::from_values(label, vec![0.0], &[error]);
    rep.max_ratio = error;
    rep.verdict = if error <= tol { Verdict::Pass } else { Verdict::Fail };
    rep.notes.push(format!("tolerance={tol:e}"));
    rep
}

/// Gram deviation and recurrence residual of `h_0..h_max_l`, on composite
/// Gauss-Legendre nodes covering the numerical support.
pub fn hermite_orthonormality(max_l: usize) -> (f64, f64) {
    let t = crate::hermite::tail_radius(max_l) + 2.0;
    let q = Composite::new(-t, t, 8 * (max_l + 8), 16);
    let table = HermiteTable::new(max_l, &q.nodes);
    (table.gram_deviation(&q.weights), table.recurrence_residual())
}

/// Largest spectral and finite-difference eigen-residuals over `|μ| <= max_k`
/// and the given `|λ|`, at sample points inside the classical region.
pub fn eigen_residuals(d1: usize, max_k: usize, lambdas: &[f64]) -> (f64, f64) {
    let mut spec = 0.0f64;
    let mut fd = 0.0f64;
    for &lam in lambdas {
        let pts: Vec<Vec<f64>> = (0..9)
            .map(|i| (0..d1).map(|a| (-2.0 + 0.5 * i as f64 + 0.13 * a as f64) / lam.sqrt()).collect())
            .collect();
        for k in 0..=max_k {
            for mu in multi_indices(d1, k) {
                spec = spec.max(eigen_residual_spectral(&mu, lam, &pts));
                fd = fd.max(eigen_residual_fd(&mu, lam, &pts, 1e-3 / lam.sqrt()));
            }
        }
    }
    (spec, fd)
}

/// Relative coefficient error of `analyze ∘ synthesize` and relative
/// Plancherel defect, for a random degree-`l` field on every λ-node where
/// degree `l` is resolvable.
pub fn round_trip(grid: &Grid, l: usize, seed: u64) -> Result<(f64, f64, usize)> {
    let support = grid.resolvable_support(l);
    let n = support.len();
    if n == 0 {
        return Ok((0.0, 0.0, 0));
    }
    let f = random_field(grid, support.clone(), l, seed)?;
    let h = synthesize(&f, grid)?;
    let back = analyze_on(&h, l, support)?;
    let num: f64 = f.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = f.coeffs.iter().map(|a| a.norm_sqr()).sum();
    let e2 = lp_norm(&h, 2.0)?.powi(2);
    let p = f.plancherel_sq();
    Ok(((num / den).sqrt(), (e2 - p).abs() / p, n))
}

/// `max |Σ_{j<=12} φ_j^α - (1-η₁-η₂)_+^α|` over `r = 1-η₁-η₂ >= 2^{-12}`,
/// sampled on a fine `(η₁, η₂)` lattice in `[0,1]²` plus a log-spaced
/// sweep in `r` along the diagonal.
pub fn partition_defect(alpha: f64) -> f64 {
    let pieces: Vec<Symbol2D> = (0..=12).map(|j| Symbol2D::dyadic(j, alpha)).collect();
    let layer = 2f64.powi(-12);
    let at = |e1: f64, e2: f64| -> f64 {
        let r = 1.0 - e1 - e2;
        if r < layer {
            return 0.0;
        }
        let s: f64 = pieces.iter().map(|p| p.eval(e1, e2).re).sum();
        (s - riesz_profile(r, alpha)).abs()
    };
    let n = 400;
    let grid_max = (0..=n)
        .into_par_iter()
        .map(|i| (0..=n).map(|k| at(i as f64 / n as f64, k as f64 / n as f64)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    let sweep = (0..=2000)
        .map(|i| {
            let r = layer * 2f64.powf(12.0 * i as f64 / 2000.0);
            at(0.5 * (1.0 - r), 0.5 * (1.0 - r))
        })
        .fold(0.0, f64::max);
    grid_max.max(sweep)
}

fn j_range(cfg: &Config, lo: u32, hi: u32) -> Result<std::ops::RangeInclusive<u32>> {
    let a: u32 = cfg.parse_or("j_min", lo)?;
    let b: u32 = cfg.parse_or("j_max", hi)?;
    if a > b {
        return Err(param("j_range", format!("j_min = {a} exceeds j_max = {b}")));
    }
    Ok(a..=b)
}

fn suite_core(cfg: &Config) -> Result<Vec<ProbeReport>> {
    let spec = if cfg.get("d1").is_some() { cfg.grid_spec()? } else { GridSpec::default() };
    let grid = make_grid(&spec)?;
    let seed: u64 = cfg.parse_or("seed", 1)?;
    let (gram, rec) = hermite_orthonormality(32);
    let mut out = vec![
        tolerance_report("hermite-gram l<=32", gram, 1e-8),
        tolerance_report("hermite-recurrence l<=32", rec, 1e-12),
    ];
    for l in [0, 4, 8, 16] {
        let (rt, pl, n) = round_trip(&grid, l, seed + l as u64)?;
        let mut a = tolerance_report(format!("round-trip l={l}"), rt, 1e-6);
        a.notes.push(format!("support_nodes={n}"));
        out.push(a);
        out.push(tolerance_report(format!("plancherel l={l}"), pl, 1e-6));
    }
    for alpha in [0.5, 1.0, 2.0] {
        out.push(tolerance_report(format!("partition alpha={alpha}"), partition_defect(alpha), 1e-10));
    }
    Ok(out)
}

fn suite_coefficients(cfg: &Config) -> Result<Vec<ProbeReport>> {
    let beta = cfg.f64_or("beta", 0.05)?;
    let l_max: usize = cfg.parse_or("l_max", 1024)?;
    let js = j_range(cfg, 2, 8)?;
    let alphas = match cfg.get("alpha") {
        Some(_) => vec![cfg.parse_f64("alpha")?],
        None => vec![1.0, 2.0],
    };
    alphas.into_iter().map(|a| coefficient_decay_probe(a, beta, js.clone(), l_max)).collect()
}

fn suite_decay(cfg: &Config) -> Result<Vec<ProbeReport>> {
    let inf = f64::INFINITY;
    let cases: Vec<(f64, f64, f64)> = match cfg.get("alpha") {
        Some(_) => vec![(cfg.f64_or("p1", 2.0)?, cfg.f64_or("p2", 2.0)?, cfg.parse_f64("alpha")?)],
        None => vec![(2.0, 2.0, 0.5), (inf, inf, 2.0), (1.0, inf, 1.7), (2.0, inf, 0.7)],
    };
    let js = j_range(cfg, 1, 6)?;
    let family = family_from(cfg)?;
    cases
        .into_iter()
        .map(|(p1, p2, alpha)| {
            let mut spec = DecayProbeSpec::new(alpha, p1, p2, js.clone())?;
            spec.family = family;
            dyadic_decay_probe(&spec)
        })
        .collect()
}

fn family_from(cfg: &Config) -> Result<FamilySpec> {
    let mut fam = FamilySpec::hermite_bump(cfg.parse_or("seed", 1)?, cfg.f64_or("band_lo", 0.125)?);
    if let Some(k) = cfg.get("family") {
        fam.kind = FamilyKind::parse(k)?;
    }
    Ok(fam)
}

fn suite_mixed(cfg: &Config) -> Result<Vec<ProbeReport>> {
    let alpha = cfg.f64_or("alpha", 1.6)?;
    Ok(vec![mixed_norm_decay_probe(alpha, j_range(cfg, 1, 6)?, family_from(cfg)?)?])
}

fn suite_plancherel(_cfg: &Config) -> Result<Vec<ProbeReport>> {
    PlancherelKind::ALL.iter().map(|&k| weighted_plancherel_probe(k, &PlancherelParams::for_kind(k))).collect()
}

/// All three β pairs and all four volume variants from one kernel table.
pub fn kernel_reports(alpha: f64, js: std::ops::RangeInclusive<u32>, spec: &KernelSampleSpec) -> Result<Vec<ProbeReport>> {
    let grid = make_grid(&spec.grid)?;
    let samples = kernel_samples(spec, &grid)?;
    let table = kernel_table(alpha, &js, &samples, &grid);
    let mut out = vec![];
    for beta in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)] {
        for v in VolumeVariant::ALL {
            out.push(pointwise_report(alpha, beta, &js, &samples, &table, v, grid.dims)?);
        }
    }
    Ok(out)
}

fn suite_kernel(cfg: &Config) -> Result<Vec<ProbeReport>> {
    let spec = KernelSampleSpec { seed: cfg.parse_or("seed", 7)?, ..KernelSampleSpec::default() };
    kernel_reports(cfg.f64_or("alpha", 1.0)?, j_range(cfg, 1, 6)?, &spec)
}

fn suite_geometry(_cfg: &Config) -> Result<Vec<ProbeReport>> {
    let dims = Dims::default();
    let radii: Vec<f64> = (-4..=4).map(|k| 2f64.powi(k)).collect();
    let mut out = vec![];
    for (a1, gamma) in [(0.0, 0.0), (0.0, 0.5), (3.0, 0.5), (10.0, 0.9)] {
        let a = Point::new(vec![a1], vec![0.0]);
        out.push(weight_integral_check(dims, &a, &radii, gamma, Layer::First, 1.0)?.check_growth(0.05));
    }
    for gamma in [0.0, 0.5, 0.9] {
        let a = Point::new(vec![0.05], vec![0.0]);
        let rr: Vec<f64> = radii.iter().copied().filter(|&r| r >= 0.0625).collect();
        out.push(weight_integral_check(dims, &a, &rr, gamma, Layer::Second, 1.0)?.check_growth(0.05));
    }
    Ok(out)
}

fn suite_thresholds(_cfg: &Config) -> Result<Vec<ProbeReport>> {
    use crate::thresholds::{threshold_inv, Variant};
    let dims = Dims::default();
    let mut out = vec![];
    for variant in [Variant::General, Variant::Restricted] {
        let mut worst = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let (u1, u2) = (i as f64 / 20.0, j as f64 / 20.0);
                let a = threshold_inv(u1, u2, dims, variant)?.threshold;
                let b = threshold_inv(u2, u1, dims, variant)?.threshold;
                let dev = match (a, b) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                };
                worst = worst.max(dev);
            }
        }
        out.push(tolerance_report(format!("threshold-symmetry {variant}"), worst, 0.0));
    }
    Ok(out)
}

/// Runs a named suite. Keys read from `cfg` depend on the suite (`alpha`,
/// `p1`, `p2`, `j_min`, `j_max`, `seed`, `family`, `band_lo`, `beta`,
/// `l_max`, and the grid keys for `core`).
pub fn run_suite(name: &str, cfg: &Config) -> Result<SuiteOutcome> {
    let reports = match name {
        "core" => suite_core(cfg)?,
        "coefficients" => suite_coefficients(cfg)?,
        "decay" => suite_decay(cfg)?,
        "mixed" => suite_mixed(cfg)?,
        "plancherel" => suite_plancherel(cfg)?,
        "kernel" => suite_kernel(cfg)?,
        "geometry" => suite_geometry(cfg)?,
        "thresholds" => suite_thresholds(cfg)?,
        other => return Err(param("suite", format!("unknown suite {other:?}; available: {}", SUITES.join(", ")))),
    };
    Ok(SuiteOutcome { name: name.to_string(), reports })
}
