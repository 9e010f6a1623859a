//! Functional calculus on spectral fields, multiplier kernels, and the
//! product-type Sobolev norm of bivariate symbols.

use crate::error::{param, Error, Result};
use crate::field::SpectralField;
use crate::geometry::Point;
use crate::grid::Grid;
use crate::hermite::{hermite_all, mode_count, multi_indices};
use crate::reduce::{pairwise_sum, par_sum_c_by};
use crate::symbol::{Symbol1D, Symbol2D};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// `C(λ, μ) ↦ F((2|μ| + d1)|λ|) C(λ, μ)`.
pub fn apply_linear_multiplier(f_sym: &Symbol1D, f: &SpectralField) -> SpectralField {
    apply_joint_multiplier(&|eta, _| f_sym.eval(eta), f)
}

/// `C(λ, μ) ↦ F((2|μ| + d1)|λ|, |λ|) C(λ, μ)`.
pub fn apply_joint_multiplier(f2: &(dyn Fn(f64, f64) -> Complex64 + Sync), f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let degrees: Vec<usize> = f.modes().iter().map(|m| m.iter().sum()).collect();
    let nm = degrees.len();
    let d1 = f.dims.d1;
    for s in 0..f.support.len() {
        let lam = f.lambda_abs(s);
        for (m, &k) in degrees.iter().enumerate() {
            out.coeffs[s * nm + m] *= f2((2 * k + d1) as f64 * lam, lam);
        }
    }
    out
}

fn check_cover(eta_sup: f64, grid: &Grid) -> Result<()> {
    let d1 = grid.dims.d1 as f64;
    let lam_min = grid.lambda_abs(&vec![0; grid.dims.d2]);
    let lam_max = grid.lambda_abs(&vec![grid.lambda_count as i64 - 1; grid.dims.d2]);
    if eta_sup < d1 * lam_min {
        return Err(Error::Grid(format!(
            "lambda_min too large: smallest eigenvalue {} exceeds the symbol support bound {eta_sup}",
            d1 * lam_min
        )));
    }
    if eta_sup > d1 * lam_max * (1.0 + 1e-12) {
        return Err(Error::Grid(format!(
            "λ-lattice tops out at {lam_max}; it does not cover the symbol support up to η = {eta_sup} at k = 0"
        )));
    }
    Ok(())
}

/// `K_max` for one λ-node: largest `k` with `[k]|λ| <= η_sup`.
pub fn k_max(eta_sup: f64, lam: f64, d1: usize) -> Option<usize> {
    let t = (eta_sup / lam - d1 as f64) / 2.0;
    if t < 0.0 {
        None
    } else {
        Some((t + 1e-12).floor() as usize)
    }
}

/// One spectral atom of a kernel: eigenvalue `η = [k]|λ|` and the value
/// `e^{iλ·(x''-y'')} K_k^λ(x', y')` (the quadrature weight and `(2π)^{-d2}`
/// are applied by the caller).
#[derive(Clone, Copy, Debug)]
pub struct Atom {
    pub eta: f64,
    pub tau: f64,
    pub value: Complex64,
}

/// All atoms with `η <= eta_sup` for the pair `(x, y)`, ordered by λ-node
/// (lattice order) then `k`.
pub fn kernel_atoms(grid: &Grid, x: &Point, y: &Point, eta_sup: f64) -> Vec<Atom> {
    let d1 = grid.dims.d1;
    let nodes = grid.all_lambda();
    let per_node: Vec<Vec<Atom>> = nodes
        .par_iter()
        .map(|n| {
            let lam = grid.lambda_abs(n);
            let Some(kmax) = k_max(eta_sup, lam, d1) else { return vec![] };
            let lv = grid.lambda_vec(n);
            let phase: f64 = lv.iter().zip(x.x2.iter().zip(&y.x2)).map(|(l, (a, b))| l * (a - b)).sum();
            let e = Complex64::from_polar(1.0, phase);
            let ks = projection_kernels_upto(kmax, lam, &x.x1, &y.x1);
            ks.into_iter()
                .enumerate()
                .map(|(k, v)| Atom { eta: (2 * k + d1) as f64 * lam, tau: lam, value: e * v })
                .collect()
        })
        .collect();
    per_node.into_iter().flatten().collect()
}

/// `K_k^λ(x', y')` for `k = 0..=kmax`.
pub fn projection_kernels_upto(kmax: usize, lam: f64, x1: &[f64], y1: &[f64]) -> Vec<f64> {
    let d1 = x1.len();
    let s = lam.sqrt();
    let mut hx = vec![vec![0.0; kmax + 1]; d1];
    let mut hy = vec![vec![0.0; kmax + 1]; d1];
    for a in 0..d1 {
        hermite_all(kmax, s * x1[a], &mut hx[a]);
        hermite_all(kmax, s * y1[a], &mut hy[a]);
    }
    let norm = lam.powf(d1 as f64 / 2.0);
    if d1 == 1 {
        return (0..=kmax).map(|k| norm * hx[0][k] * hy[0][k]).collect();
    }
    (0..=kmax)
        .map(|k| {
            let mut acc = 0.0;
            for mu in multi_indices(d1, k) {
                let mut v = norm;
                for a in 0..d1 {
                    v *= hx[a][mu[a]] * hy[a][mu[a]];
                }
                acc += v;
            }
            debug_assert!(mode_count(d1, k) > 0);
            acc
        })
        .collect()
}

fn kernel_prefactor(grid: &Grid) -> f64 {
    grid.lambda_weight() / (2.0 * PI).powi(grid.dims.d2 as i32)
}

/// `K_{F(L)}(x, y) = (2π)^{-d2} Σ_λ w(λ) e^{iλ·(x''-y'')} Σ_k F([k]|λ|) K_k^λ(x', y')`,
/// with the k-sum cut exactly where `[k]|λ|` leaves `supp F`.
pub fn linear_kernel(f_sym: &Symbol1D, x: &Point, y: &Point, grid: &Grid) -> Result<Complex64> {
    let (a, b) = f_sym.support;
    if !(b > a) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_cover(b, grid)?;
    let atoms = kernel_atoms(grid, x, y, b);
    let s = par_sum_c_by(atoms.len(), |i| f_sym.eval(atoms[i].eta) * atoms[i].value);
    Ok(s * kernel_prefactor(grid))
}

/// Bilinear kernel from precomputed atoms (`a` from `(x, y)`, `b` from
/// `(x, z)`), using the declared support and band of `G` to skip pairs.
pub fn bilinear_from_atoms(g: &Symbol2D, a: &[Atom], b: &[Atom], prefactor: f64) -> Complex64 {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| b[i].eta.total_cmp(&b[j].eta).then(i.cmp(&j)));
    let etas: Vec<f64> = order.iter().map(|&i| b[i].eta).collect();
    let [(a1, b1), (a2, b2)] = g.support;
    let s = par_sum_c_by(a.len(), |i| {
        let p = a[i];
        if p.eta < a1 || p.eta > b1 {
            return Complex64::new(0.0, 0.0);
        }
        let (mut lo, mut hi) = (a2, b2);
        if let Some((s0, s1)) = g.band {
            lo = lo.max(s0 - p.eta);
            hi = hi.min(s1 - p.eta);
        }
        if hi < lo {
            return Complex64::new(0.0, 0.0);
        }
        let start = etas.partition_point(|&e| e < lo);
        let end = etas.partition_point(|&e| e <= hi);
        let mut acc = Complex64::new(0.0, 0.0);
        for &q in &order[start..end] {
            acc += g.eval(p.eta, b[q].eta) * b[q].value;
        }
        p.value * acc
    });
    s * prefactor * prefactor
}

/// `K_G(x, y, z)`: the double λ/k-sum of `G([k₁]|λ₁|, [k₂]|λ₂|)` against
/// `K_{k₁}^{λ₁}(x',y') K_{k₂}^{λ₂}(x',z')` with the x''-phases.
pub fn bilinear_kernel(g: &Symbol2D, x: &Point, y: &Point, z: &Point, grid: &Grid) -> Result<Complex64> {
    let [(a1, b1), (a2, b2)] = g.support;
    if !(b1 > a1 && b2 > a2) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_cover(b1.max(b2), grid)?;
    let a = kernel_atoms(grid, x, y, b1);
    let b = kernel_atoms(grid, x, z, b2);
    Ok(bilinear_from_atoms(g, &a, &b, kernel_prefactor(grid)))
}

/// Sampling controls for [`sobolev_product_norm`]: samples per axis and the
/// zero padding added on each side, as a fraction of the support width.
#[derive(Clone, Copy, Debug)]
pub struct SobolevSampling {
    pub n1: usize,
    pub n2: usize,
    pub pad: f64,
}

impl Default for SobolevSampling {
    fn default() -> Self {
        SobolevSampling { n1: 1024, n2: 1024, pad: 0.5 }
    }
}

fn freq_weights(n: usize, width: f64, s: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let k = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            let xi = 2.0 * PI * k / width;
            (1.0 + xi * xi).powf(s)
        })
        .collect()
}

/// `‖G‖_{L²_{s1,s2}} = ((2π)^{-2} ∬ (1+ξ₁²)^{s1} (1+ξ₂²)^{s2} |Ĝ(ξ)|² dξ)^{1/2}`,
/// with `Ĝ` approximated by the DFT of samples on the zero-padded support box.
/// Fails when more than `1e-10` of the sampled energy sits in the outer
/// eighth of the window (the padding is too thin for the support).
pub fn sobolev_product_norm(g: &Symbol2D, s1: f64, s2: f64, sampling: SobolevSampling) -> Result<f64> {
    if !(s1 >= 0.0 && s2 >= 0.0) {
        return Err(param("s", "Sobolev orders must be nonnegative"));
    }
    let [(a1, b1), (a2, b2)] = g.support;
    let (l1, l2) = (b1 - a1, b2 - a2);
    if !(l1 > 0.0 && l2 > 0.0) {
        return Ok(0.0);
    }
    let SobolevSampling { n1, n2, pad } = sampling;
    let (w1, w2) = (l1 * (1.0 + 2.0 * pad), l2 * (1.0 + 2.0 * pad));
    let (h1, h2) = (w1 / n1 as f64, w2 / n2 as f64);
    let (o1, o2) = (a1 - pad * l1, a2 - pad * l2);
    let mut rows: Vec<Vec<Complex64>> = (0..n2)
        .into_par_iter()
        .map(|j| {
            let e2 = o2 + j as f64 * h2;
            (0..n1).map(|i| g.eval(o1 + i as f64 * h1, e2)).collect()
        })
        .collect();
    // boundary energy in the outer eighth of the window
    let edge = |i: usize, n: usize| i < n / 8 || i >= n - n / 8;
    let total: f64 = pairwise_sum(&rows.iter().map(|r| pairwise_sum(&r.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>())).collect::<Vec<_>>());
    if total == 0.0 {
        return Ok(0.0);
    }
    let boundary: f64 = rows
        .iter()
        .enumerate()
        .map(|(j, r)| r.iter().enumerate().filter(|(i, _)| edge(*i, n1) || edge(j, n2)).map(|(_, v)| v.norm_sqr()).sum::<f64>())
        .sum();
    if boundary > 1e-10 * total {
        return Err(Error::Padding(boundary / total));
    }
    let fw1 = freq_weights(n1, w1, s1);
    let fw2 = freq_weights(n2, w2, s2);
    let mut planner = FftPlanner::new();
    let f1 = planner.plan_fft_forward(n1);
    if s1 > 0.0 || s2 > 0.0 {
        rows.par_iter_mut().for_each(|r| f1.process(r));
    }
    let sum = if s2 == 0.0 {
        // rows already transformed in η₁ when s1 > 0; Parseval otherwise
        let per_row: Vec<f64> = rows
            .par_iter()
            .map(|r| {
                if s1 > 0.0 {
                    pairwise_sum(&r.iter().zip(&fw1).map(|(v, w)| w * v.norm_sqr()).collect::<Vec<_>>()) / n1 as f64
                } else {
                    pairwise_sum(&r.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>())
                }
            })
            .collect();
        pairwise_sum(&per_row) * h1 * h2
    } else {
        let f2 = planner.plan_fft_forward(n2);
        let cols: Vec<f64> = (0..n1)
            .into_par_iter()
            .map(|i| {
                let mut c: Vec<Complex64> = rows.iter().map(|r| r[i]).collect();
                f2.process(&mut c);
                let wi = fw1[i] / n1 as f64;
                wi * pairwise_sum(&c.iter().zip(&fw2).map(|(v, w)| w * v.norm_sqr()).collect::<Vec<_>>()) / n2 as f64
            })
            .collect();
        pairwise_sum(&cols) * h1 * h2
    };
    Ok(sum.sqrt())
}

/// One-dimensional `‖F‖_{L²_s}` with the same conventions.
pub fn sobolev_norm_1d(f: &Symbol1D, s: f64, n: usize, pad: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(param("s", "Sobolev orders must be nonnegative"));
    }
    let (a, b) = f.support;
    let l = b - a;
    if !(l > 0.0) {
        return Ok(0.0);
    }
    let w = l * (1.0 + 2.0 * pad);
    let h = w / n as f64;
    let o = a - pad * l;
    let mut row: Vec<Complex64> = (0..n).map(|i| f.eval(o + i as f64 * h)).collect();
    let total = pairwise_sum(&row.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
    if total == 0.0 {
        return Ok(0.0);
    }
    let boundary: f64 = row.iter().enumerate().filter(|(i, _)| *i < n / 8 || *i >= n - n / 8).map(|(_, v)| v.norm_sqr()).sum();
    if boundary > 1e-10 * total {
        return Err(Error::Padding(boundary / total));
    }
    if s == 0.0 {
        return Ok((total * h).sqrt());
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut row);
    let fw = freq_weights(n, w, s);
    let sum = pairwise_sum(&row.iter().zip(&fw).map(|(v, w)| w * v.norm_sqr()).collect::<Vec<_>>()) / n as f64;
    Ok((sum * h).sqrt())
}
