//! Bilinear Bochner-Riesz means, their dyadic pieces, the Fourier-separated
//! evaluation path, and dilation covariance.

use crate::bump;
use crate::dims::Dims;
use crate::error::{param, Error, Result};
use crate::field::{GriddedField, SpectralField, Synthesizer, X2Transform};
use crate::grid::Grid;
use crate::hermite::modes_upto;
use crate::probe::{ProbeReport, Verdict};
use crate::reduce::{pairwise_sum_c, tree_reduce};
use crate::symbol::{dyadic_value, Symbol2D};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RieszParams {
    pub alpha: f64,
    pub r: f64,
    pub dims: Dims,
}

impl RieszParams {
    pub fn new(alpha: f64, r: f64, dims: Dims) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(param("alpha", format!("must be >= 0, got {alpha}")));
        }
        if !(r > 0.0) {
            return Err(param("R", format!("must be > 0, got {r}")));
        }
        Ok(RieszParams { alpha, r, dims })
    }
}

/// `(1 - (η₁ + η₂)/R)_+^α`.
pub fn riesz_symbol(p: &RieszParams) -> Symbol2D {
    Symbol2D::riesz(p.alpha, p.r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicPiece {
    pub j: u32,
    pub alpha: f64,
}

/// `φ_j^α(η₁, η₂) = (1-η₁-η₂)_+^α φ(2^j(1-η₁-η₂))` on `[0,1]²`.
pub fn dyadic_piece_symbol(piece: &DyadicPiece) -> Symbol2D {
    Symbol2D::dyadic(piece.j, piece.alpha)
}

/// Pairs `(η, lattice index, x'-profile of P_k f^λ)` for every support node
/// and degree of `f`.
struct Projected {
    eta: Vec<f64>,
    node: Vec<Vec<i64>>,
    profile: Vec<Vec<Complex64>>,
}

fn project(f: &SpectralField, grid: &Grid) -> Result<Projected> {
    f.check_grid(grid)?;
    let modes = modes_upto(f.dims.d1, f.max_degree);
    let degrees: Vec<usize> = modes.iter().map(|m| m.iter().sum()).collect();
    let nm = modes.len();
    let synth = Synthesizer::new(grid, &f.support, f.max_degree)?;
    let mut jobs = vec![];
    for s in 0..f.support.len() {
        for k in 0..=f.max_degree {
            let any = (0..nm).any(|m| degrees[m] == k && f.coeffs[s * nm + m] != Complex64::new(0.0, 0.0));
            if any {
                jobs.push((s, k));
            }
        }
    }
    let profile = jobs
        .par_iter()
        .map(|&(s, k)| synth.node_profile(s, &f.coeffs[s * nm..(s + 1) * nm], Some(k)))
        .collect();
    Ok(Projected {
        eta: jobs.iter().map(|&(s, k)| (2 * k + f.dims.d1) as f64 * f.lambda_abs(s)).collect(),
        node: jobs.iter().map(|&(s, _)| f.support[s].clone()).collect(),
        profile,
    })
}

/// `B(f, g)(x) = (2π)^{-2d2} Σ w(λ₁)w(λ₂) e^{i(λ₁+λ₂)·x''} Σ m([k₁]|λ₁|, [k₂]|λ₂|) P_{k₁}f^{λ₁}(x') P_{k₂}g^{λ₂}(x')`.
///
/// The symbol is evaluated once per pair of `(k, λ)` eigen-buckets; the
/// x''-sum runs over the integer frequency lattice `λ₁ + λ₂`.
pub fn bilinear_apply_direct(m: &Symbol2D, f: &SpectralField, g: &SpectralField, grid: &Grid) -> Result<GriddedField> {
    let pf = project(f, grid)?;
    let pg = project(g, grid)?;
    let xf = X2Transform::new(grid);
    let scale = (grid.lambda_weight() / (2.0 * PI).powi(grid.dims.d2 as i32)).powi(2);
    // nonzero symbol entries with their frequency bucket
    let entries: Vec<(usize, usize, usize, Complex64)> = (0..pf.eta.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let pg = &pg;
            let pf = &pf;
            let xf = &xf;
            (0..pg.eta.len()).filter_map(move |b| {
                let v = m.eval(pf.eta[a], pg.eta[b]);
                if v == Complex64::new(0.0, 0.0) {
                    return None;
                }
                let nu: Vec<i64> = pf.node[a].iter().zip(&pg.node[b]).map(|(x, y)| x + y + 1).collect();
                Some((a, b, xf.position(&nu), v * xf.phase_int(&nu) * scale))
            })
        })
        .collect();
    let n2 = grid.n2();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values.par_chunks_mut(n2).enumerate().for_each(|(i1, out)| {
        for &(a, b, pos, v) in &entries {
            out[pos] += v * pf.profile[a][i1] * pg.profile[b][i1];
        }
        xf.synth_int(out);
    });
    Ok(GriddedField { grid: grid.clone(), values })
}

/// Fourier-series separation of a dyadic piece in the second variable:
/// `φ_j^α(η₁, η₂) = Σ_l φ_{j,l}^α(η₁) e^{iπlη₂}` for `η₂ ∈ [0, 1]`.
///
/// The piece is continued to `η₂ ∈ [-1, 0)` by its own formula times a smooth
/// cutoff vanishing below `-1/2`, which makes the 2-periodic extension smooth;
/// `ψ_l(η₂) = e^{iπlη₂} χ̃(η₂)` then reproduces the piece for every `η₂ >= 0`.
#[derive(Clone, Debug)]
pub struct FourierSeriesExpansion {
    pub j: u32,
    pub alpha: f64,
    /// Samples per period for the coefficient transform.
    pub samples: usize,
    /// Fixed truncation; `None` selects it from the tail rule.
    pub truncation: Option<usize>,
}

impl FourierSeriesExpansion {
    pub fn new(j: u32, alpha: f64) -> Self {
        let samples = (1usize << (j + 9)).max(4096);
        FourierSeriesExpansion { j, alpha, samples, truncation: None }
    }

    pub fn with_truncation(mut self, l: usize) -> Self {
        self.truncation = Some(l);
        self
    }

    /// The continued piece on `η₂ ∈ [-1, 1]`.
    pub fn extended(&self, eta1: f64, eta2: f64) -> f64 {
        if eta1 < 0.0 {
            return 0.0;
        }
        let c = bump::lower_cutoff(eta2);
        if c == 0.0 {
            return 0.0;
        }
        c * dyadic_value(self.j, self.alpha, 1.0 - eta1 - eta2)
    }

    fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.samples;
        (0..n).map(move |m| -1.0 + 2.0 * m as f64 / n as f64)
    }

    /// All coefficients `φ_{j,l}^α(η₁)` for `l ∈ [-N/2, N/2)`, in FFT order.
    pub fn coefficient_table(&self, eta1: f64) -> Vec<Complex64> {
        let n = self.samples;
        let mut buf: Vec<Complex64> = self.nodes().map(|t| Complex64::new(self.extended(eta1, t), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf.iter()
            .enumerate()
            .map(|(m, v)| {
                // (-1)^l with l ≡ m (mod N), N even
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                v * (sign / n as f64)
            })
            .collect()
    }

    /// Index into a coefficient table for `l`.
    pub fn table_index(&self, l: i64) -> usize {
        l.rem_euclid(self.samples as i64) as usize
    }

    /// `Σ_{|l| > L} max_η |φ_{j,l}^α(η)|` over the given tables.
    pub fn tail(&self, tables: &[Vec<Complex64>], l: usize) -> f64 {
        let half = self.samples as i64 / 2;
        let mut t = 0.0;
        for k in (l as i64 + 1)..half {
            for s in [k, -k] {
                let idx = self.table_index(s);
                t += tables.iter().map(|tb| tb[idx].norm()).fold(0.0, f64::max);
            }
        }
        t
    }

    /// Smallest `L` whose tail is at most `tol` over the tables.
    pub fn auto_truncation(&self, tables: &[Vec<Complex64>], tol: f64) -> usize {
        let half = self.samples / 2;
        let maxes: Vec<f64> = (0..half)
            .map(|k| {
                let a = tables.iter().map(|tb| tb[self.table_index(k as i64)].norm()).fold(0.0, f64::max);
                let b = tables.iter().map(|tb| tb[self.table_index(-(k as i64))].norm()).fold(0.0, f64::max);
                if k == 0 {
                    a
                } else {
                    a + b
                }
            })
            .collect();
        let mut tail = 0.0;
        let mut l = half - 1;
        while l > 0 {
            if tail + maxes[l] > tol {
                break;
            }
            tail += maxes[l];
            l -= 1;
        }
        l
    }

    /// `ψ_l(η₂)`.
    pub fn psi(&self, l: i64, eta2: f64) -> Complex64 {
        let c = bump::plateau(eta2);
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(c, PI * l as f64 * eta2)
    }
}

/// `φ_{j,l}^α(η₁)` by direct periodic trapezoid quadrature in η₂.
pub fn fourier_coeff(exp: &FourierSeriesExpansion, l: i64, eta1: f64) -> Complex64 {
    let n = exp.samples;
    let terms: Vec<Complex64> = exp
        .nodes()
        .map(|t| Complex64::from_polar(exp.extended(eta1, t), -PI * l as f64 * t))
        .collect();
    pairwise_sum_c(&terms) / n as f64
}

/// Bookkeeping from a separated evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatedInfo {
    pub truncation: usize,
    pub tail: f64,
}

/// Default relative tolerance of the tail rule.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

/// `Σ_{|l| <= L} synthesize(φ_{j,l}^α(L) f) · synthesize(ψ_l(L) g)`.
///
/// Without a fixed truncation, `L` is the smallest value whose coefficient tail
/// over the spectrum of `f` is below `tol · sup|φ_j^α|`
/// (`tol` defaults to [`DEFAULT_TAIL_TOL`]). With a fixed truncation and a
/// tolerance, a tail above the tolerance is an error.
pub fn bilinear_apply_separated(
    exp: &FourierSeriesExpansion,
    f: &SpectralField,
    g: &SpectralField,
    grid: &Grid,
    tol: Option<f64>,
) -> Result<(GriddedField, SeparatedInfo)> {
    f.check_grid(grid)?;
    g.check_grid(grid)?;
    let d1 = f.dims.d1;
    let fm: Vec<usize> = f.modes().iter().map(|m| m.iter().sum()).collect();
    let gm: Vec<usize> = g.modes().iter().map(|m| m.iter().sum()).collect();
    // distinct eigenvalues of f
    let mut eta_keys: Vec<u64> = vec![];
    for s in 0..f.support.len() {
        for &k in &fm {
            eta_keys.push((((2 * k + d1) as f64) * f.lambda_abs(s)).to_bits());
        }
    }
    eta_keys.sort_unstable();
    eta_keys.dedup();
    let tables: Vec<Vec<Complex64>> = eta_keys.par_iter().map(|&e| exp.coefficient_table(f64::from_bits(e))).collect();
    let index: HashMap<u64, usize> = eta_keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let peak = sup_piece(exp);
    let abs_tol = tol.unwrap_or(DEFAULT_TAIL_TOL) * peak;
    let l = match exp.truncation {
        Some(l) => {
            let l = l.min(exp.samples / 2 - 1);
            let tail = exp.tail(&tables, l);
            if tol.is_some() && tail > abs_tol {
                return Err(Error::Truncation { l, tail, tol: abs_tol });
            }
            l
        }
        None => exp.auto_truncation(&tables, abs_tol),
    };
    let tail = exp.tail(&tables, l);
    let sf = Synthesizer::for_field(f, grid)?;
    let sg = Synthesizer::for_field(g, grid)?;
    let nmf = fm.len();
    let nmg = gm.len();
    let leaf = |i: usize| -> Vec<Complex64> {
        let li = i as i64 - l as i64;
        let idx = exp.table_index(li);
        let mut cf = f.coeffs.clone();
        for s in 0..f.support.len() {
            let lam = f.lambda_abs(s);
            for (m, &k) in fm.iter().enumerate() {
                let key = (((2 * k + d1) as f64) * lam).to_bits();
                cf[s * nmf + m] *= tables[index[&key]][idx];
            }
        }
        let mut cg = g.coeffs.clone();
        for s in 0..g.support.len() {
            let lam = g.lambda_abs(s);
            for (m, &k) in gm.iter().enumerate() {
                cg[s * nmg + m] *= exp.psi(li, (2 * k + d1) as f64 * lam);
            }
        }
        let a = sf.synth(&cf);
        let b = sg.synth(&cg);
        a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect()
    };
    let sum = tree_reduce(0, 2 * l + 1, &leaf, &|mut a: Vec<Complex64>, b: Vec<Complex64>| {
        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        a
    })
    .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); grid.len()]);
    Ok((GriddedField { grid: grid.clone(), values: sum }, SeparatedInfo { truncation: l, tail }))
}

/// `sup |φ_j^α|`, sampled along the radial variable.
pub fn sup_piece(exp: &FourierSeriesExpansion) -> f64 {
    let lo = 2f64.powi(-(exp.j as i32) - 1);
    (0..=4096).map(|i| dyadic_value(exp.j, exp.alpha, lo * (1.0 + 3.0 * i as f64 / 4096.0))).fold(0.0, f64::max)
}

/// Compares `B_{R/t²}(f, g)` with `δ_{1/t} B_R(δ_t f, δ_t g)` node by node;
/// `max_ratio` is the max deviation relative to `max |B_{R/t²}(f, g)|`.
pub fn dilation_covariance_check(
    params: &RieszParams,
    f: &SpectralField,
    g: &SpectralField,
    t: f64,
    grid: &Grid,
) -> Result<ProbeReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Inadmissible(t));
    }
    let lhs = bilinear_apply_direct(&Symbol2D::riesz(params.alpha, params.r / (t * t)), f, g, grid)?;
    let gt = grid.dilated(t)?;
    let h = bilinear_apply_direct(&Symbol2D::riesz(params.alpha, params.r), &f.dilate(t)?, &g.dilate(t)?, &gt)?;
    let rhs = h.dilate(1.0 / t)?;
    if !rhs.grid.same_nodes(grid) {
        return Err(Error::Inadmissible(t));
    }
    let peak = lhs.max_abs();
    let dev = lhs.values.iter().zip(&rhs.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let rel = if peak == 0.0 { dev } else { dev / peak };
    let mut rep = ProbeReport::from_values(format!("dilation-covariance-t{t}"), vec![t.log2()], &[rel]);
    rep.max_ratio = rel;
    rep.verdict = Verdict::Pass;
    Ok(rep)
}
