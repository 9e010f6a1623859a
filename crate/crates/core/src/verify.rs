//! Numerical probes for the estimates behind bilinear Bochner–Riesz bounds.
//!
//! Every probe turns an inequality with an unspecified constant into a
//! scale statement: a fitted log₂ slope against a dyadic parameter, or a
//! LHS/RHS ratio that must stay bounded and stable under refinement. No probe
//! compares absolute constants.

use crate::bump;
use crate::dims::Dims;
use crate::error::{param, Error, Result};
use crate::family::FamilySpec;
use crate::field::{lp_norm, mixed_norm, SpectralField};
use crate::geometry::{ball_volume, control_distance, Point};
use crate::grid::{make_grid, Grid, GridSpec};
use crate::hermite::hermite_all;
use crate::multiplier::{bilinear_from_atoms, kernel_atoms, k_max, sobolev_norm_1d, Atom};
use crate::probe::{ProbeReport, Verdict};
use crate::quad::Composite;
use crate::reduce::pairwise_sum;
use crate::riesz::{bilinear_apply_separated, FourierSeriesExpansion};
use crate::symbol::{Symbol1D, Symbol2D};
use crate::thresholds::{threshold, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex, OnceLock};

/// Default slope tolerance in log₂ units.
pub const SLOPE_TOL: f64 = 0.15;
/// Default ratio growth tolerance per refinement doubling.
pub const GROWTH_TOL: f64 = 0.05;
/// Required decay rate for dyadic-piece probes.
pub const DECAY_TOL: f64 = 0.1;

fn js(range: &RangeInclusive<u32>) -> Vec<u32> {
    range.clone().collect()
}

// ---------------------------------------------------------------------------
// Fourier coefficients of the dyadic pieces

/// `D_j = max_{|l| <= l_max} sup_{η₁} |φ_{j,l}^α(η₁)| (1 + |l|)^{1+β}`,
/// fitted against `j`; PASS when the slope is at most `-α + β + SLOPE_TOL`.
pub fn coefficient_decay_probe(alpha: f64, beta: f64, j_range: RangeInclusive<u32>, l_max: usize) -> Result<ProbeReport> {
    if !(beta > 0.0) {
        return Err(param("beta", format!("must be positive, got {beta}")));
    }
    if !(alpha > 0.0) {
        return Err(param("alpha", format!("must be positive, got {alpha}")));
    }
    let jv = js(&j_range);
    let etas: Vec<f64> = (0..=160).map(|i| i as f64 / 160.0).collect();
    let values: Vec<f64> = jv
        .iter()
        .map(|&j| {
            let exp = FourierSeriesExpansion::new(j, alpha);
            let half = (exp.samples / 2 - 1).min(l_max) as i64;
            etas.par_iter()
                .map(|&e| {
                    let t = exp.coefficient_table(e);
                    (-half..=half)
                        .map(|l| t[exp.table_index(l)].norm() * (1.0 + l.unsigned_abs() as f64).powf(1.0 + beta))
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();
    let rep = ProbeReport::from_values(
        format!("coefficient-decay alpha={alpha} beta={beta} l_max={l_max}"),
        jv.iter().map(|&j| f64::from(j)).collect(),
        &values,
    );
    Ok(rep.check_slope_at_most(-alpha + beta + SLOPE_TOL))
}

// ---------------------------------------------------------------------------
// Decay of dyadic pieces in Lebesgue and mixed norms

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// `‖B_j(f,g)‖_p / (‖f‖_{p1} ‖g‖_{p2})`.
    Lp,
    /// `‖B_j(f,g)‖_{L^{p}_{x''}L^{q}_{x'}} / (‖f‖_{..} ‖g‖_{..})` with the
    /// three (inner x'', outer x') exponent pairs given explicitly.
    Mixed { out: (f64, f64), f: (f64, f64), g: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayProbeSpec {
    pub alpha: f64,
    pub p1: f64,
    pub p2: f64,
    pub p: f64,
    pub j_range: RangeInclusive<u32>,
    /// Family for `f`; `g` uses the same family with the next seed.
    pub family: FamilySpec,
    pub norm: NormKind,
    pub grid: GridSpec,
    /// Relative tail tolerance for the separated evaluation.
    pub tail_tol: f64,
    /// Threshold below which no decay is claimed; `None` reads it from the
    /// general threshold table.
    pub threshold: Option<f64>,
}

/// Grid sized for fields in the band `[1/8, 1/4]` with degree ≤ 4: every
/// mode is resolved, the x''-period is 1608 and products are sampled at
/// four points per shortest period.
pub fn decay_grid() -> GridSpec {
    GridSpec::lattice(Dims::default(), 1.0 / 256.0, 72, 21.0, 64, 1024)
}

impl DecayProbeSpec {
    pub fn new(alpha: f64, p1: f64, p2: f64, j_range: RangeInclusive<u32>) -> Result<Self> {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let s = inv(p1) + inv(p2);
        let p = if s == 0.0 { f64::INFINITY } else { 1.0 / s };
        Ok(DecayProbeSpec {
            alpha,
            p1,
            p2,
            p,
            j_range,
            family: FamilySpec::hermite_bump(1, 0.125),
            norm: NormKind::Lp,
            grid: decay_grid(),
            tail_tol: 1e-6,
            threshold: None,
        })
    }

    fn validate(&self) -> Result<()> {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        if (inv(self.p) - inv(self.p1) - inv(self.p2)).abs() > 1e-12 {
            return Err(param("p", format!("1/p = 1/p1 + 1/p2 fails for ({}, {}, {})", self.p1, self.p2, self.p)));
        }
        if self.j_range.is_empty() {
            return Err(param("j_range", "empty"));
        }
        Ok(())
    }
}

/// `‖B_j^α(f, g)‖ / (‖f‖ ‖g‖)` for every `j`, with the pieces evaluated
/// through the separated expansion.
pub fn decay_values(spec: &DecayProbeSpec, f: &SpectralField, g: &SpectralField, grid: &Grid) -> Result<Vec<f64>> {
    let hf = crate::field::synthesize(f, grid)?;
    let hg = crate::field::synthesize(g, grid)?;
    let (nf, ng) = match spec.norm {
        NormKind::Lp => (lp_norm(&hf, spec.p1)?, lp_norm(&hg, spec.p2)?),
        NormKind::Mixed { f: a, g: b, .. } => (mixed_norm(&hf, a.0, a.1)?, mixed_norm(&hg, b.0, b.1)?),
    };
    js(&spec.j_range)
        .into_iter()
        .map(|j| {
            if f.is_zero() || g.is_zero() {
                return Ok(0.0);
            }
            let exp = FourierSeriesExpansion::new(j, spec.alpha);
            let (h, _) = bilinear_apply_separated(&exp, f, g, grid, Some(spec.tail_tol))?;
            let n = match spec.norm {
                NormKind::Lp => lp_norm(&h, spec.p)?,
                NormKind::Mixed { out, .. } => mixed_norm(&h, out.0, out.1)?,
            };
            Ok(if n == 0.0 { 0.0 } else { n / (nf * ng) })
        })
        .collect()
}

fn decay_report(spec: &DecayProbeSpec, label: String, values: &[f64], threshold: Option<f64>) -> ProbeReport {
    let mut rep = ProbeReport::from_values(label, js(&spec.j_range).iter().map(|&j| f64::from(j)).collect(), values);
    rep.no_guarantee = threshold.is_none_or(|t| spec.alpha <= t);
    if let Some(t) = threshold {
        rep.notes.push(format!("threshold={t}"));
    } else {
        rep.notes.push("threshold=none (exponents not covered)".into());
    }
    rep = rep.check_slope_at_most(-DECAY_TOL);
    rep
}

/// Decay of `N_j = ‖B_j^α(f, g)‖_p / (‖f‖_{p1} ‖g‖_{p2})` in `j` for fields
/// from the spec's family. Below the threshold the report is labelled
/// no-guarantee; its verdict still records what was measured.
pub fn dyadic_decay_probe(spec: &DecayProbeSpec) -> Result<ProbeReport> {
    spec.validate()?;
    let grid = make_grid(&spec.grid)?;
    let f = spec.family.build(&grid)?;
    let g = FamilySpec { seed: spec.family.seed.wrapping_add(1), ..spec.family }.build(&grid)?;
    dyadic_decay_probe_on(spec, &f, &g, &grid)
}

/// [`dyadic_decay_probe`] with explicit fields.
pub fn dyadic_decay_probe_on(spec: &DecayProbeSpec, f: &SpectralField, g: &SpectralField, grid: &Grid) -> Result<ProbeReport> {
    spec.validate()?;
    let thr = match spec.threshold {
        Some(t) => Some(t),
        None => threshold(spec.p1, spec.p2, grid.dims, Variant::General)?.threshold,
    };
    let values = decay_values(spec, f, g, grid)?;
    let label = format!("dyadic-decay p1={} p2={} p={} alpha={}", spec.p1, spec.p2, spec.p, spec.alpha);
    Ok(decay_report(spec, label, &values, thr))
}

/// Spec for the mixed-norm estimate
/// `‖B(f,g)‖_{L^{2/3}_{x''}L^1_{x'}} ≲ ‖f‖_{L^1L^1} ‖g‖_{L^2_{x''}L^∞_{x'}}`,
/// claimed for `α > (d+1)/2`.
pub fn mixed_norm_spec(alpha: f64, j_range: RangeInclusive<u32>, family: FamilySpec, dims: Dims) -> DecayProbeSpec {
    DecayProbeSpec {
        alpha,
        p1: 1.0,
        p2: 2.0,
        p: 2.0 / 3.0,
        j_range,
        family,
        norm: NormKind::Mixed { out: (2.0 / 3.0, 1.0), f: (1.0, 1.0), g: (2.0, f64::INFINITY) },
        grid: decay_grid(),
        tail_tol: 1e-6,
        threshold: Some((dims.d() as f64 + 1.0) / 2.0),
    }
}

pub fn mixed_norm_decay_probe(alpha: f64, j_range: RangeInclusive<u32>, family: FamilySpec) -> Result<ProbeReport> {
    let spec = mixed_norm_spec(alpha, j_range, family, Dims::default());
    let grid = make_grid(&spec.grid)?;
    let f = family.build(&grid)?;
    let g = FamilySpec { seed: family.seed.wrapping_add(1), ..family }.build(&grid)?;
    mixed_norm_decay_probe_on(&spec, &f, &g, &grid)
}

pub fn mixed_norm_decay_probe_on(spec: &DecayProbeSpec, f: &SpectralField, g: &SpectralField, grid: &Grid) -> Result<ProbeReport> {
    let values = decay_values(spec, f, g, grid)?;
    let label = format!("mixed-norm-decay alpha={}", spec.alpha);
    Ok(decay_report(spec, label, &values, spec.threshold))
}

// ---------------------------------------------------------------------------
// Pointwise kernel bounds

/// Volume factor multiplying `|K_j|` in the four pointwise bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeVariant {
    /// `|B(x,1)|²`
    XX,
    /// `|B(x,1)| |B(z,1)|`
    XZ,
    /// `|B(x,1)| |B(y,1)|`
    XY,
    /// `|B(y,1)| |B(z,1)|`
    YZ,
}

impl VolumeVariant {
    pub const ALL: [VolumeVariant; 4] = [VolumeVariant::XX, VolumeVariant::XZ, VolumeVariant::XY, VolumeVariant::YZ];

    fn factor(self, vx: f64, vy: f64, vz: f64) -> f64 {
        match self {
            VolumeVariant::XX => vx * vx,
            VolumeVariant::XZ => vx * vz,
            VolumeVariant::XY => vx * vy,
            VolumeVariant::YZ => vy * vz,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VolumeVariant::XX => "v(x)v(x)",
            VolumeVariant::XZ => "v(x)v(z)",
            VolumeVariant::XY => "v(x)v(y)",
            VolumeVariant::YZ => "v(y)v(z)",
        }
    }
}

/// Reproducible `(x, y, z)` triples: `y` and `z` are placed at control
/// distance from `x` in each of the decades `[0.1, 1)`, `[1, 10)`, `[10, 30)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSampleSpec {
    pub seed: u64,
    pub per_decade: usize,
    pub grid: GridSpec,
}

/// Lattice for the kernel probes: `Δλ = 2^{-8}` up to `|λ| = 1`.
pub fn kernel_grid() -> GridSpec {
    GridSpec::lattice(Dims::default(), 1.0 / 256.0, 256, 8.0, 2, 1024)
}

impl Default for KernelSampleSpec {
    fn default() -> Self {
        KernelSampleSpec { seed: 7, per_decade: 4, grid: kernel_grid() }
    }
}

pub const DECADES: [(f64, f64); 3] = [(0.1, 1.0), (1.0, 10.0), (10.0, 30.0)];

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|t| t / r).collect();
        }
    }
}

/// A point whose control distance from `x` lies in `[lo, hi)`, with the
/// x''-offset kept below a quarter period so the periodized lattice kernel
/// stays close to the continuous one.
fn point_in_decade(rng: &mut ChaCha8Rng, x: &Point, lo: f64, hi: f64, max_dx2: f64) -> Option<Point> {
    for _ in 0..10_000 {
        let r = (lo.ln() + rng.gen_range(0.0..1.0) * (hi.ln() - lo.ln())).exp();
        // split the distance between the two layers
        let share: f64 = rng.gen_range(0.0..1.0);
        let u = random_unit(rng, x.x1.len());
        let y1: Vec<f64> = x.x1.iter().zip(&u).map(|(a, b)| a + share * r * b).collect();
        let s = x.x1.iter().map(|t| t * t).sum::<f64>().sqrt() + y1.iter().map(|t| t * t).sum::<f64>().sqrt();
        let rr = (1.0 - share) * r;
        let len2 = if rr * rr <= s * rr { rr * s } else { rr * rr };
        let v = random_unit(rng, x.x2.len());
        let y2: Vec<f64> = x.x2.iter().zip(&v).map(|(a, b)| a + len2 * b).collect();
        let y = Point::new(y1, y2);
        let d = control_distance(x, &y);
        let dx2 = x.x2.iter().zip(&y.x2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if d >= lo && d < hi && dx2 < max_dx2 {
            return Some(y);
        }
    }
    None
}

pub fn kernel_samples(spec: &KernelSampleSpec, grid: &Grid) -> Result<Vec<(Point, Point, Point)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = grid.dims;
    let max_dx2 = grid.period() / 4.0;
    let mut out = Vec::new();
    for &(ylo, yhi) in &DECADES {
        for &(zlo, zhi) in &DECADES {
            for _ in 0..spec.per_decade {
                let x = Point::new(
                    (0..dims.d1).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                    (0..dims.d2).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                );
                let (Some(y), Some(z)) = (
                    point_in_decade(&mut rng, &x, ylo, yhi, max_dx2),
                    point_in_decade(&mut rng, &x, zlo, zhi, max_dx2),
                ) else {
                    continue;
                };
                out.push((x, y, z));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(out)
}

/// `K_j^α(x, y, z)` for every sample and every `j`, row per sample.
pub fn kernel_table(alpha: f64, j_range: &RangeInclusive<u32>, samples: &[(Point, Point, Point)], grid: &Grid) -> Vec<Vec<f64>> {
    let pre = grid.lambda_weight() / (2.0 * PI).powi(grid.dims.d2 as i32);
    let symbols: Vec<Symbol2D> = js(j_range).into_iter().map(|j| Symbol2D::dyadic(j, alpha)).collect();
    samples
        .iter()
        .map(|(x, y, z)| {
            let a: Vec<Atom> = kernel_atoms(grid, x, y, 1.0);
            let b: Vec<Atom> = kernel_atoms(grid, x, z, 1.0);
            symbols.iter().map(|s| bilinear_from_atoms(s, &a, &b, pre).norm()).collect()
        })
        .collect()
}

/// `S_j = max_samples |K_j^α(x,y,z)| (1+ϱ(x,y))^{β₁} (1+ϱ(x,z))^{β₂} V`,
/// with `V` the selected volume product, from precomputed kernel values.
pub fn pointwise_report(
    alpha: f64,
    beta: (f64, f64),
    j_range: &RangeInclusive<u32>,
    samples: &[(Point, Point, Point)],
    table: &[Vec<f64>],
    variant: VolumeVariant,
    dims: Dims,
) -> Result<ProbeReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (b1, b2) = beta;
    if !(b1 >= 0.0 && b2 >= 0.0) {
        return Err(param("beta", "β₁, β₂ must be nonnegative"));
    }
    let weights: Vec<f64> = samples
        .iter()
        .map(|(x, y, z)| {
            let v = |p: &Point| ball_volume(dims, p, 1.0);
            Ok((1.0 + control_distance(x, y)).powf(b1)
                * (1.0 + control_distance(x, z)).powf(b2)
                * variant.factor(v(x)?, v(y)?, v(z)?))
        })
        .collect::<Result<_>>()?;
    let jv = js(j_range);
    let values: Vec<f64> =
        (0..jv.len()).map(|c| table.iter().zip(&weights).map(|(row, w)| row[c] * w).fold(0.0, f64::max)).collect();
    let rep = ProbeReport::from_values(
        format!("pointwise-kernel alpha={alpha} beta=({b1},{b2}) volume={}", variant.name()),
        jv.iter().map(|&j| f64::from(j)).collect(),
        &values,
    );
    Ok(rep.check_slope_at_most(b1 + b2 + 0.5 + SLOPE_TOL))
}

pub fn pointwise_kernel_probe(
    alpha: f64,
    beta1: f64,
    beta2: f64,
    j_range: RangeInclusive<u32>,
    sample_spec: &KernelSampleSpec,
    variant: VolumeVariant,
) -> Result<ProbeReport> {
    if !(beta1 >= 0.0 && beta2 >= 0.0) {
        return Err(param("beta", "β₁, β₂ must be nonnegative"));
    }
    let grid = make_grid(&sample_spec.grid)?;
    let samples = kernel_samples(sample_spec, &grid)?;
    let table = kernel_table(alpha, &j_range, &samples, &grid);
    pointwise_report(alpha, (beta1, beta2), &j_range, &samples, &table, variant, grid.dims)
}

// ---------------------------------------------------------------------------
// Weighted Plancherel estimates
//
// All four kinds reduce to one-sided energies of linear kernels
// `E = ∫ ω(y) |K_{F_θ(L)}(x, y)|² dy` at a point `x = (x', 0)`, where
// `F_θ(η, τ) = F(η) θ(τ)`: the bilinear kernel of a separable symbol is the
// product of two linear kernels, and for general `G` without weights the
// energy is the plain sum `Σ |G|² K_{k₁}^{λ₁}(x',x') K_{k₂}^{λ₂}(x',x')`.
// With `u_λ(y') = Σ_k F([k]|λ|) θ(|λ|) K_k^λ(x', y')` and the λ-lattice
// of spacing Δλ (period `P = 2π/Δλ` in x''),
//
//   E = (2π)^{-2d2} Δλ^{2d2} Σ_{λ,λ'} W(λ - λ') ∫ ρ(y') u_λ(y') u_λ'(y') dy',
//
// where `ρ` is the x'-weight and `W(ν) = ∫_{period} ω''(y'') e^{-iνy''}`;
// for `ω'' ≡ 1` this is `P δ_{λλ'}`.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlancherelKind {
    LinearFirstLayer,
    Bilinear,
    SecondLayer,
    Truncated,
}

impl PlancherelKind {
    pub const ALL: [PlancherelKind; 4] =
        [PlancherelKind::LinearFirstLayer, PlancherelKind::Bilinear, PlancherelKind::SecondLayer, PlancherelKind::Truncated];

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "linear_first_layer" => Ok(PlancherelKind::LinearFirstLayer),
            "bilinear" => Ok(PlancherelKind::Bilinear),
            "second_layer" => Ok(PlancherelKind::SecondLayer),
            "truncated" => Ok(PlancherelKind::Truncated),
            other => Err(param(
                "kind",
                format!("unknown kind {other:?}; known: linear_first_layer, bilinear, second_layer, truncated"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlancherelKind::LinearFirstLayer => "linear_first_layer",
            PlancherelKind::Bilinear => "bilinear",
            PlancherelKind::SecondLayer => "second_layer",
            PlancherelKind::Truncated => "truncated",
        }
    }
}

/// Weight carried by one side of a kernel energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SideWeight {
    Flat,
    /// `|y'|^{2γ}`.
    FirstLayer(f64),
    /// `|x'' - y''|^{e}`.
    SecondLayer(f64),
}

/// λ-lattice and x'-quadrature used for one energy evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLattice {
    pub dims: Dims,
    pub dlambda: f64,
    /// Spacing of the uniform x'-quadrature (weighted sides only).
    pub h: f64,
}

impl EnergyLattice {
    pub fn refined(self) -> Self {
        EnergyLattice { dlambda: self.dlambda / 2.0, h: self.h / 2.0, ..self }
    }
}

/// Distinct `|λ|` of the lattice up to `top`, with multiplicities.
fn abs_nodes(dims: Dims, dlambda: f64, top: f64) -> Vec<(f64, usize)> {
    let c = (top / dlambda).ceil() as i64 + 1;
    if dims.d2 == 1 {
        return (0..c).map(|n| ((n as f64 + 0.5) * dlambda, 2)).filter(|(a, _)| *a <= top).collect();
    }
    let mut idx = vec![-c; dims.d2];
    let mut map = std::collections::BTreeMap::<u64, usize>::new();
    loop {
        let a = idx.iter().map(|&n| ((n as f64 + 0.5) * dlambda).powi(2)).sum::<f64>().sqrt();
        if a <= top {
            *map.entry(a.to_bits()).or_default() += 1;
        }
        let mut ax = 0;
        loop {
            if ax == dims.d2 {
                return map.into_iter().map(|(b, m)| (f64::from_bits(b), m)).collect();
            }
            idx[ax] += 1;
            if idx[ax] < c {
                break;
            }
            idx[ax] = -c;
            ax += 1;
        }
    }
}

/// One factor of a separable kernel energy.
pub struct Side<'a> {
    pub f: &'a Symbol1D,
    /// `Θ_M(τ) = Θ(2^M τ)` on the x''-frequency.
    pub cutoff: Option<i32>,
    pub weight: SideWeight,
}

fn theta_factor(cutoff: Option<i32>, lam: f64) -> f64 {
    cutoff.map_or(1.0, |m| bump::theta_m(m, lam))
}

type TransformKey = (u64, u64, usize);
static TRANSFORMS: OnceLock<Mutex<HashMap<TransformKey, Arc<Vec<f64>>>>> = OnceLock::new();

/// `W(ν) = 2 ∫_0^{P/2} y^e cos(νy) dy` at `ν = mΔλ`, `m = 0..count`, cached.
fn second_layer_transform(e: f64, dlambda: f64, count: usize) -> Arc<Vec<f64>> {
    let key = (e.to_bits(), dlambda.to_bits(), count);
    let cache = TRANSFORMS.get_or_init(Default::default);
    if let Some(w) = cache.lock().unwrap().get(&key) {
        return w.clone();
    }
    let w = Arc::new(compute_transform(e, dlambda, count));
    cache.lock().unwrap().insert(key, w.clone());
    w
}

fn compute_transform(e: f64, dlambda: f64, count: usize) -> Vec<f64> {
    let a = PI / dlambda;
    // graded towards the algebraic singularity, then enough panels to
    // resolve the fastest oscillation several times over
    let near = Composite::graded(1.0, 40, 2, 12);
    let far_panels = ((count as f64 * dlambda * a / PI) as usize * 4).max(64);
    let far = Composite::new(1.0, a, far_panels, 12);
    (0..count)
        .into_par_iter()
        .map(|m| {
            let nu = m as f64 * dlambda;
            let g = |y: f64| y.powf(e) * (nu * y).cos();
            2.0 * (near.integrate(g) + far.integrate(g))
        })
        .collect()
}

/// `E = ∫ ω(y) |K_{F_θ(L)}(x, y)|² dy` at `x = (x1, 0)`.
pub fn side_energy(side: &Side, x1: &[f64], lat: EnergyLattice) -> Result<f64> {
    let dims = lat.dims;
    if x1.len() != dims.d1 {
        return Err(Error::Dims(format!("point has {} x'-coordinates, d1 = {}", x1.len(), dims.d1)));
    }
    let (lo, hi) = side.f.support;
    if !(hi > lo) || hi <= 0.0 {
        return Ok(0.0);
    }
    let d1 = dims.d1;
    let top = hi / d1 as f64;
    let nodes = abs_nodes(dims, lat.dlambda, top);
    let pre = (2.0 * PI).powi(-(dims.d2 as i32)) * lat.dlambda.powi(dims.d2 as i32);
    match side.weight {
        SideWeight::Flat => {
            let terms: Vec<f64> = nodes
                .par_iter()
                .map(|&(lam, mult)| {
                    let th = theta_factor(side.cutoff, lam);
                    let Some(km) = (th != 0.0).then(|| k_max(hi, lam, d1)).flatten() else { return 0.0 };
                    let kd = crate::multiplier::projection_kernels_upto(km, lam, x1, x1);
                    let s: Vec<f64> = kd
                        .iter()
                        .enumerate()
                        .map(|(k, v)| side.f.eval((2 * k + d1) as f64 * lam).norm_sqr() * th * th * v)
                        .collect();
                    mult as f64 * pairwise_sum(&s)
                })
                .collect();
            Ok(pre * pairwise_sum(&terms))
        }
        SideWeight::FirstLayer(_) | SideWeight::SecondLayer(_) => {
            if d1 != 1 {
                return Err(Error::Unsupported(format!("weighted kernel energies need d1 = 1 (got {d1})")));
            }
            if matches!(side.weight, SideWeight::SecondLayer(_)) && dims.d2 != 1 {
                return Err(Error::Unsupported(format!("x''-weighted energies need d2 = 1 (got {})", dims.d2)));
            }
            weighted_energy(side, x1[0], &nodes, lat, pre)
        }
    }
}

fn weighted_energy(side: &Side, x1: f64, nodes: &[(f64, usize)], lat: EnergyLattice, pre: f64) -> Result<f64> {
    let hi = side.f.support.1;
    // active nodes and their k-ranges
    let active: Vec<(f64, usize, usize, f64)> = nodes
        .iter()
        .filter_map(|&(lam, mult)| {
            let th = theta_factor(side.cutoff, lam);
            if th == 0.0 {
                return None;
            }
            k_max(hi, lam, 1).map(|km| (lam, mult, km, th))
        })
        .collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    if (0..=64).any(|i| side.f.eval(side.f.support.0 + (hi - side.f.support.0) * i as f64 / 64.0).im != 0.0) {
        return Err(Error::Unsupported("weighted kernel energies need real symbols".into()));
    }
    // every profile lives inside its classical region plus a few decay lengths
    let extent = active
        .iter()
        .map(|&(lam, _, km, _)| (((2 * km + 1) as f64).sqrt() + 6.0) / lam.sqrt())
        .fold(0.0, f64::max)
        + x1.abs();
    let npts = (2.0 * extent / lat.h).ceil() as usize + 1;
    let ys: Vec<f64> = (0..npts).map(|i| -extent + i as f64 * lat.h).collect();
    let rho: Vec<f64> = match side.weight {
        SideWeight::FirstLayer(g) => ys.iter().map(|y| if g == 0.0 { 1.0 } else { y.abs().powf(2.0 * g) }).collect(),
        _ => vec![1.0; npts],
    };
    let profiles: Vec<Vec<f64>> = active
        .par_iter()
        .map(|&(lam, _, km, th)| {
            let s = lam.sqrt();
            let mut hx = vec![0.0; km + 1];
            hermite_all(km, s * x1, &mut hx);
            let coef: Vec<f64> =
                (0..=km).map(|k| side.f.eval((2 * k + 1) as f64 * lam).re * th * s * hx[k]).collect();
            let mut hy = vec![0.0; km + 1];
            ys.iter()
                .map(|&y| {
                    hermite_all(km, s * y, &mut hy);
                    coef.iter().zip(&hy).map(|(c, v)| c * v).sum::<f64>()
                })
                .collect()
        })
        .collect();
    let h = lat.h;
    let gram = |a: usize, b: usize| -> f64 {
        let t: Vec<f64> = profiles[a].iter().zip(&profiles[b]).zip(&rho).map(|((u, v), r)| u * v * r).collect();
        h * pairwise_sum(&t)
    };
    match side.weight {
        SideWeight::FirstLayer(_) => {
            // flat in x'': W = P δ, and pre² P^{d2} = pre
            let terms: Vec<f64> =
                (0..active.len()).into_par_iter().map(|a| active[a].1 as f64 * gram(a, a)).collect();
            Ok(pre * pairwise_sum(&terms))
        }
        SideWeight::SecondLayer(e) => {
            let dl = lat.dlambda;
            let idx: Vec<usize> = active.iter().map(|a| (a.0 / dl - 0.5).round() as usize).collect();
            let mmax = idx.iter().max().unwrap() * 2 + 2;
            let w = second_layer_transform(e, dl, mmax);
            let n = active.len();
            let rows: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let t: Vec<f64> = (0..n)
                        .map(|b| {
                            let diff = idx[a].abs_diff(idx[b]);
                            let sum = idx[a] + idx[b] + 1;
                            gram(a, b) * 2.0 * (w[diff] + w[sum])
                        })
                        .collect();
                    pairwise_sum(&t)
                })
                .collect();
            Ok(pre * pre * pairwise_sum(&rows))
        }
        SideWeight::Flat => unreachable!(),
    }
}

/// `∬ |G(η₁,η₂)|² K(η₁) K(η₂)` summed over the lattice at `x = (x1, 0)`,
/// unweighted, for general (non-separable) `G`.
pub fn bilinear_energy(g: &Symbol2D, x1: &[f64], lat: EnergyLattice) -> Result<f64> {
    let dims = lat.dims;
    if x1.len() != dims.d1 {
        return Err(Error::Dims(format!("point has {} x'-coordinates, d1 = {}", x1.len(), dims.d1)));
    }
    let d1 = dims.d1;
    let atoms = |sup: f64| -> Vec<(f64, f64)> {
        abs_nodes(dims, lat.dlambda, sup / d1 as f64)
            .par_iter()
            .flat_map_iter(|&(lam, mult)| {
                let kd = k_max(sup, lam, d1).map_or_else(Vec::new, |km| crate::multiplier::projection_kernels_upto(km, lam, x1, x1));
                kd.into_iter().enumerate().map(move |(k, v)| ((2 * k + d1) as f64 * lam, mult as f64 * v))
            })
            .collect()
    };
    let a = atoms(g.support[0].1);
    let b = atoms(g.support[1].1);
    let rows: Vec<f64> = a
        .par_iter()
        .map(|&(e1, w1)| pairwise_sum(&b.iter().map(|&(e2, w2)| g.eval(e1, e2).norm_sqr() * w1 * w2).collect::<Vec<_>>()))
        .collect();
    let pre = (2.0 * PI).powi(-(dims.d2 as i32)) * lat.dlambda.powi(dims.d2 as i32);
    Ok(pre * pre * pairwise_sum(&rows))
}

/// `η^{d/2-1} min{η^{d2/2-γ}, |y'|^{2γ-d2}}`.
fn linear_weight(eta: f64, dims: Dims, gamma: f64, y_abs: f64) -> f64 {
    let (d, d2) = (dims.d() as f64, dims.d2 as f64);
    let a = eta.powf(d2 / 2.0 - gamma);
    let m = if y_abs == 0.0 { a } else { a.min(y_abs.powf(2.0 * gamma - d2)) };
    eta.powf(d / 2.0 - 1.0) * m
}

/// Right side of the first-layer bound.
pub fn linear_rhs(f: &Symbol1D, dims: Dims, gamma: f64, y_abs: f64) -> f64 {
    let (lo, hi) = (f.support.0.max(0.0), f.support.1);
    if !(hi > lo) {
        return 0.0;
    }
    let mut breaks = vec![];
    if y_abs > 0.0 {
        breaks.push(y_abs.powi(-2));
    }
    let q = Composite::with_breaks(lo, hi, &breaks, 64, 12);
    q.integrate(|e| f.eval(e).norm_sqr() * linear_weight(e, dims, gamma, y_abs))
}

/// Right side of the bilinear bound (tensor quadrature).
pub fn bilinear_rhs(g: &Symbol2D, dims: Dims, x_abs: f64) -> f64 {
    let axis = |(lo, hi): (f64, f64)| {
        let mut breaks = vec![];
        if x_abs > 0.0 {
            breaks.push(x_abs.powi(-2));
        }
        Composite::with_breaks(lo.max(0.0), hi, &breaks, 48, 10)
    };
    let (q1, q2) = (axis(g.support[0]), axis(g.support[1]));
    let w = |e: f64| linear_weight(e, dims, 0.0, x_abs);
    let rows: Vec<f64> = q1
        .nodes
        .par_iter()
        .zip(&q1.weights)
        .map(|(&e1, &w1)| {
            let t: Vec<f64> = q2.nodes.iter().zip(&q2.weights).map(|(&e2, &w2)| w2 * g.eval(e1, e2).norm_sqr() * w(e2)).collect();
            w1 * w(e1) * pairwise_sum(&t)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Smooth bump on `[0, 1]`.
pub fn bump01() -> Symbol1D {
    Symbol1D::real("bump01", (0.0, 1.0), true, crate::family::envelope)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlancherelParams {
    pub dims: Dims,
    pub lattice: EnergyLattice,
    /// Measure once more with Δλ and h halved.
    pub refine: bool,
    /// Cutoff scales for the truncated kind.
    pub m1_range: RangeInclusive<i32>,
    pub m2: i32,
}

impl PlancherelParams {
    pub fn for_kind(kind: PlancherelKind) -> Self {
        let dims = Dims::default();
        let dlambda = if kind == PlancherelKind::Truncated { 2f64.powi(-12) } else { 2f64.powi(-6) };
        PlancherelParams {
            dims,
            lattice: EnergyLattice { dims, dlambda, h: 0.25 },
            refine: true,
            m1_range: 3..=7,
            m2: 3,
        }
    }
}

fn point(dims: Dims, v: f64) -> Vec<f64> {
    let mut p = vec![0.0; dims.d1];
    p[0] = v;
    p
}

fn sobolev_sq(f: &Symbol1D, s: f64) -> Result<f64> {
    Ok(sobolev_norm_1d(f, s, 4096, 0.5)?.powi(2))
}

/// LHS/RHS for every member of the kind's family, in a fixed order.
fn plancherel_ratios(kind: PlancherelKind, params: &PlancherelParams, lat: EnergyLattice) -> Result<Vec<f64>> {
    let dims = params.dims;
    let flat_or = |e: f64| if e == 0.0 { SideWeight::Flat } else { SideWeight::SecondLayer(e) };
    match kind {
        PlancherelKind::LinearFirstLayer => {
            let fs = [Symbol1D::indicator(0.0, 1.0), Symbol1D::riesz(1.0, 1.0), bump01()];
            let mut out = vec![];
            for f in &fs {
                for gamma in [0.0, 0.25] {
                    if gamma >= dims.d2 as f64 / 2.0 {
                        return Err(param("gamma", format!("must be below d2/2, got {gamma}")));
                    }
                    for y in [0.0, 0.5, 2.0, 6.0] {
                        let w = if gamma == 0.0 { SideWeight::Flat } else { SideWeight::FirstLayer(gamma) };
                        let lhs = side_energy(&Side { f, cutoff: None, weight: w }, &point(dims, y), lat)?;
                        out.push(lhs / linear_rhs(f, dims, gamma, y));
                    }
                }
            }
            Ok(out)
        }
        PlancherelKind::Bilinear => {
            let gs = [Symbol2D::constant(1.0, [(0.0, 1.0), (0.0, 1.0)]), Symbol2D::riesz(1.0, 1.0), Symbol2D::dyadic(2, 1.0)];
            let mut out = vec![];
            for g in &gs {
                for x in [0.0, 0.5, 2.0, 6.0] {
                    out.push(bilinear_energy(g, &point(dims, x), lat)? / bilinear_rhs(g, dims, x));
                }
            }
            Ok(out)
        }
        PlancherelKind::SecondLayer => {
            let pairs = [(bump01(), bump01()), (Symbol1D::riesz(1.0, 1.0), bump01())];
            let mut out = vec![];
            for (f1, f2) in &pairs {
                for (g1, g2) in [(0.25, 0.0), (0.25, 0.25), (0.4, 0.1)] {
                    let rhs = sobolev_sq(f1, g1)? * sobolev_sq(f2, g2)?;
                    for x in [0.0, 1.0, 4.0] {
                        let p = point(dims, x);
                        let e1 = side_energy(&Side { f: f1, cutoff: None, weight: flat_or(2.0 * g1) }, &p, lat)?;
                        let e2 = side_energy(&Side { f: f2, cutoff: None, weight: flat_or(2.0 * g2) }, &p, lat)?;
                        out.push(e1 * e2 / rhs);
                    }
                }
            }
            Ok(out)
        }
        PlancherelKind::Truncated => {
            let f = bump01();
            let (n1, n2) = (1.0, 0.0);
            let d2 = dims.d2 as f64;
            let rhs0 = sobolev_sq(&f, n1)? * sobolev_sq(&f, n2)?;
            let p = point(dims, 0.5);
            let e2 = side_energy(&Side { f: &f, cutoff: Some(params.m2), weight: SideWeight::Flat }, &p, lat)?;
            params
                .m1_range
                .clone()
                .map(|m1| {
                    let e1 = side_energy(&Side { f: &f, cutoff: Some(m1), weight: SideWeight::SecondLayer(2.0 * n1) }, &p, lat)?;
                    let scale = 2f64.powf(f64::from(m1) * (2.0 * n1 - d2) + f64::from(params.m2) * (2.0 * n2 - d2));
                    Ok(e1 * e2 / (scale * rhs0))
                })
                .collect()
        }
    }
}

/// Ratios LHS/RHS of a weighted Plancherel bound over the kind's family;
/// PASS when the largest ratio is finite and grows by less than
/// [`GROWTH_TOL`] under one refinement. The truncated kind also fits
/// `log₂ LHS` against `M₁` and requires the slope within [`SLOPE_TOL`] of
/// `2N₁ - d₂ = 2 - d₂`.
pub fn weighted_plancherel_probe(kind: PlancherelKind, params: &PlancherelParams) -> Result<ProbeReport> {
    if params.lattice.dims != params.dims {
        return Err(param("lattice", "dims differ from the probe's dims"));
    }
    let ratios = plancherel_ratios(kind, params, params.lattice)?;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let (abscissa, values): (Vec<f64>, Vec<f64>) = if kind == PlancherelKind::Truncated {
        // ratio × 2^{M₁(2N₁-d₂)} ∝ LHS
        let d2 = params.dims.d2 as f64;
        params.m1_range.clone().zip(&ratios).map(|(m, r)| (f64::from(m), r * 2f64.powf(f64::from(m) * (2.0 - d2)))).unzip()
    } else {
        ((0..ratios.len()).map(|i| i as f64).collect(), ratios.clone())
    };
    let mut rep = ProbeReport::from_values(
        format!("weighted-plancherel kind={} dlambda={}", kind.name(), params.lattice.dlambda),
        abscissa,
        &values,
    );
    rep.max_ratio = max;
    rep.notes.push(format!("ratios={ratios:?}"));
    if params.refine {
        let fine = plancherel_ratios(kind, params, params.lattice.refined())?;
        rep.refined_max_ratio = Some(fine.iter().copied().fold(0.0, f64::max));
    }
    rep = rep.check_growth(GROWTH_TOL);
    if kind == PlancherelKind::Truncated {
        let target = 2.0 - params.dims.d2 as f64;
        rep = rep.check_slope_at_most(target + SLOPE_TOL);
        if !(rep.slope >= target - SLOPE_TOL) {
            rep.verdict = Verdict::Fail;
        }
    }
    Ok(rep)
}
