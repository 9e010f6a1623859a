//! Spectral and gridded fields, synthesis/analysis, norms and dilation.

use crate::dims::Dims;
use crate::error::{param, Error, Result};
use crate::grid::Grid;
use crate::hermite::{modes_upto, ModeProfiles};
use crate::reduce::{par_max_by, par_sum_by, pairwise_sum, pairwise_sum_c};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// A field in the dense class: coefficients `C(λ, μ)` for `|μ| <= max_degree`
/// on finitely many λ-lattice nodes.
///
/// `support[s]` holds the lattice index of each node (one per x''-axis);
/// `coeffs[s * nmodes + m]` the coefficient of mode `m` in
/// [`modes_upto`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub dims: Dims,
    pub dlambda: f64,
    pub support: Vec<Vec<i64>>,
    pub max_degree: usize,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, support: Vec<Vec<i64>>, max_degree: usize) -> Result<Self> {
        for n in &support {
            if !grid.contains_lambda(n) {
                return Err(Error::Mismatch(format!("λ-index {n:?} is not on the grid")));
            }
        }
        let nm = modes_upto(grid.dims.d1, max_degree).len();
        Ok(SpectralField {
            dims: grid.dims,
            dlambda: grid.dlambda,
            coeffs: vec![Complex64::new(0.0, 0.0); support.len() * nm],
            support,
            max_degree,
        })
    }

    pub fn from_fn<F>(grid: &Grid, support: Vec<Vec<i64>>, max_degree: usize, f: F) -> Result<Self>
    where
        F: Fn(&[i64], &[usize]) -> Complex64,
    {
        let mut out = Self::zeros(grid, support, max_degree)?;
        let modes = out.modes();
        let nm = modes.len();
        for s in 0..out.support.len() {
            for (m, mu) in modes.iter().enumerate() {
                out.coeffs[s * nm + m] = f(&out.support[s], mu);
            }
        }
        Ok(out)
    }

    pub fn modes(&self) -> Vec<Vec<usize>> {
        modes_upto(self.dims.d1, self.max_degree)
    }

    pub fn nmodes(&self) -> usize {
        self.coeffs.len().checked_div(self.support.len()).unwrap_or_else(|| self.modes().len())
    }

    pub fn lambda_abs(&self, s: usize) -> f64 {
        self.support[s].iter().map(|&k| ((k as f64 + 0.5) * self.dlambda).powi(2)).sum::<f64>().sqrt()
    }

    pub fn lambda_vec(&self, s: usize) -> Vec<f64> {
        self.support[s].iter().map(|&k| (k as f64 + 0.5) * self.dlambda).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `a·self + b·other`; both fields must share support and degree.
    pub fn combine(&self, a: Complex64, other: &SpectralField, b: Complex64) -> Result<Self> {
        if self.support != other.support || self.max_degree != other.max_degree || self.dims != other.dims {
            return Err(Error::Mismatch("fields differ in support or degree".into()));
        }
        let mut out = self.clone();
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = a * *o + b * c;
        }
        Ok(out)
    }

    /// Union of supports, summing coefficients; degree is the larger one.
    pub fn sum(&self, other: &SpectralField) -> Result<Self> {
        if self.dims != other.dims || (self.dlambda - other.dlambda).abs() > 1e-12 * self.dlambda {
            return Err(Error::Mismatch("fields live on different lattices".into()));
        }
        let l = self.max_degree.max(other.max_degree);
        let mut support = self.support.clone();
        for n in &other.support {
            if !support.contains(n) {
                support.push(n.clone());
            }
        }
        support.sort();
        let nm = modes_upto(self.dims.d1, l).len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); support.len() * nm];
        for f in [self, other] {
            let fm = f.nmodes();
            for (s, n) in f.support.iter().enumerate() {
                let t = support.iter().position(|m| m == n).unwrap();
                for m in 0..fm {
                    coeffs[t * nm + m] += f.coeffs[s * fm + m];
                }
            }
        }
        Ok(SpectralField { dims: self.dims, dlambda: self.dlambda, support, max_degree: l, coeffs })
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.dims != grid.dims {
            return Err(Error::Mismatch(format!("field dims {:?} vs grid dims {:?}", self.dims, grid.dims)));
        }
        if (self.dlambda - grid.dlambda).abs() > 1e-12 * grid.dlambda {
            return Err(Error::Mismatch(format!("field λ-spacing {} vs grid {}", self.dlambda, grid.dlambda)));
        }
        for n in &self.support {
            if !grid.contains_lambda(n) {
                return Err(Error::Mismatch(format!("λ-index {n:?} outside the grid lattice")));
            }
        }
        Ok(())
    }

    /// `δ_t f`: λ ↦ t²λ with coefficients rescaled by `t^{-d1/2 - 2 d2}`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Inadmissible(t));
        }
        let mut out = self.clone();
        out.dlambda *= t * t;
        let f = t.powf(-(self.dims.d1 as f64) / 2.0 - 2.0 * self.dims.d2 as f64);
        out.coeffs.iter_mut().for_each(|c| *c *= f);
        Ok(out)
    }

    /// Discrete Plancherel value `(2π)^{-d2} Σ_λ w(λ) Σ_μ |C|²`.
    pub fn plancherel_sq(&self) -> f64 {
        let w = self.dlambda.powi(self.dims.d2 as i32);
        let terms: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&terms) * w / (2.0 * PI).powi(self.dims.d2 as i32)
    }
}

/// Complex samples on the tensor `(x', x'')` node set; flat index is
/// `i1 * n2 + i2` with x' axes before x'' axes, each row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GriddedField {
    pub fn zeros(grid: &Grid) -> Self {
        GriddedField { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64], &[f64]) -> Complex64 + Sync) -> Self {
        let n2 = grid.n2();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.x1.point(i / n2), &grid.x2_point(i % n2)))
            .collect();
        GriddedField { grid: grid.clone(), values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        GriddedField { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn mul(&self, other: &GriddedField) -> Self {
        GriddedField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    /// `δ_t h`: identical samples on the dilated node set.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        Ok(GriddedField { grid: self.grid.dilated(t)?, values: self.values.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Relative L² distance `‖a − b‖₂ / ‖b‖₂` under the grid weights.
    pub fn rel_l2_distance(&self, reference: &GriddedField) -> f64 {
        let g = &self.grid;
        let num = par_sum_by(g.len(), |i| g.weight(i) * (self.values[i] - reference.values[i]).norm_sqr());
        let den = par_sum_by(g.len(), |i| g.weight(i) * reference.values[i].norm_sqr());
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// FFT machinery mapping λ-lattice sums to x''-samples and back.
///
/// With `x''_i = -P/2 + iP/N` and `λ_n = (n + 1/2)Δλ`, `PΔλ = 2π`,
/// `e^{iλ_n x''_i} = (-1)^n (-i) e^{2πi n i/N} e^{iπ i/N}`; integer
/// frequencies `νΔλ` (sums of two lattice nodes) lose the last factor and
/// carry `(-1)^ν`.
pub struct X2Transform {
    d2: usize,
    n: usize,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl X2Transform {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.x2_count();
        let mut planner = FftPlanner::new();
        let twiddle = (0..n).map(|i| Complex64::from_polar(1.0, PI * i as f64 / n as f64)).collect();
        X2Transform { d2: grid.dims.d2, n, inv: planner.plan_fft_inverse(n), fwd: planner.plan_fft_forward(n), twiddle }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d2 as u32)
    }

    /// Buffer position of a signed frequency index per axis.
    #[inline]
    pub fn position(&self, idx: &[i64]) -> usize {
        let n = self.n as i64;
        idx.iter().fold(0usize, |acc, &k| acc * self.n + k.rem_euclid(n) as usize)
    }

    /// `Π (-1)^{n_a} (-i)` for half-integer lattice nodes.
    #[inline]
    pub fn phase_half(&self, idx: &[i64]) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for &k in idx {
            let s = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            p *= Complex64::new(0.0, -s);
        }
        p
    }

    /// `Π (-1)^{ν_a}` for integer frequencies.
    #[inline]
    pub fn phase_int(&self, idx: &[i64]) -> f64 {
        let odd = idx.iter().filter(|k| k.rem_euclid(2) == 1).count();
        if odd % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn along_axes(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        if self.d2 == 1 {
            fft.process(buf);
            return;
        }
        let total = buf.len();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..self.d2 {
            let stride = n.pow((self.d2 - 1 - a) as u32);
            for base in 0..total {
                if (base / stride) % n != 0 {
                    continue;
                }
                for k in 0..n {
                    line[k] = buf[base + k * stride];
                }
                fft.process(&mut line);
                for k in 0..n {
                    buf[base + k * stride] = line[k];
                }
            }
        }
    }

    fn apply_twiddle(&self, buf: &mut [Complex64], conj: bool) {
        let n = self.n;
        for (p, v) in buf.iter_mut().enumerate() {
            let mut q = p;
            let mut t = Complex64::new(1.0, 0.0);
            for _ in 0..self.d2 {
                t *= self.twiddle[q % n];
                q /= n;
            }
            *v *= if conj { t.conj() } else { t };
        }
    }

    /// Inverse transform of phased half-lattice coefficients.
    pub fn synth_half(&self, buf: &mut [Complex64]) {
        self.along_axes(buf, &self.inv);
        self.apply_twiddle(buf, false);
    }

    /// Inverse transform of phased integer-frequency coefficients.
    pub fn synth_int(&self, buf: &mut [Complex64]) {
        self.along_axes(buf, &self.inv);
    }

    /// Forward transform of x''-samples; read half-lattice node `n` as
    /// `buf[position(n)] * conj(phase_half(n))`.
    pub fn analyze_half(&self, buf: &mut [Complex64]) {
        self.apply_twiddle(buf, true);
        self.along_axes(buf, &self.fwd);
    }
}

/// Reusable synthesis plan for fields with a fixed support and degree: holds
/// the sampled `Φ_μ^λ` profiles so repeated syntheses (one per Fourier mode in
/// the separated path) skip the Hermite work.
pub struct Synthesizer {
    grid: Grid,
    support: Vec<Vec<i64>>,
    nmodes: usize,
    profiles: Vec<Arc<ModeProfiles>>,
    xf: X2Transform,
}

impl Synthesizer {
    pub fn new(grid: &Grid, support: &[Vec<i64>], max_degree: usize) -> Result<Self> {
        for n in support {
            if !grid.contains_lambda(n) {
                return Err(Error::Mismatch(format!("λ-index {n:?} outside the grid lattice")));
            }
        }
        let profiles = profile_cache(grid, support, max_degree);
        Ok(Synthesizer {
            grid: grid.clone(),
            support: support.to_vec(),
            nmodes: modes_upto(grid.dims.d1, max_degree).len(),
            profiles,
            xf: X2Transform::new(grid),
        })
    }

    pub fn for_field(f: &SpectralField, grid: &Grid) -> Result<Self> {
        f.check_grid(grid)?;
        Self::new(grid, &f.support, f.max_degree)
    }

    /// x'-profiles `A_s(x') = Σ_μ C(s, μ) Φ_μ^{λ_s}(x')`, row per support node.
    pub fn profiles(&self, coeffs: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n1 = self.grid.n1();
        let nm = self.nmodes;
        (0..self.support.len())
            .into_par_iter()
            .map(|s| {
                let prof = &self.profiles[s];
                let mut row = vec![Complex64::new(0.0, 0.0); n1];
                for m in 0..nm {
                    let c = coeffs[s * nm + m];
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    for (r, v) in row.iter_mut().zip(prof.row(m)) {
                        *r += c * v;
                    }
                }
                row
            })
            .collect()
    }

    /// x'-profile of one support node restricted to modes of degree `k`
    /// (all degrees when `None`); `row` holds that node's coefficients.
    pub fn node_profile(&self, s: usize, row: &[Complex64], k: Option<usize>) -> Vec<Complex64> {
        let prof = &self.profiles[s];
        let range = match k {
            Some(k) => prof.degree_rows(k),
            None => 0..self.nmodes,
        };
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.n1()];
        for m in range {
            let c = row[m];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for (r, v) in out.iter_mut().zip(prof.row(m)) {
                *r += c * v;
            }
        }
        out
    }

    pub fn synth(&self, coeffs: &[Complex64]) -> GriddedField {
        let a = self.profiles(coeffs);
        self.synth_profiles(&a)
    }

    /// Synthesis from precomputed x'-profiles.
    pub fn synth_profiles(&self, a: &[Vec<Complex64>]) -> GriddedField {
        let g = &self.grid;
        let n2 = g.n2();
        let scale = g.lambda_weight() / (2.0 * PI).powi(g.dims.d2 as i32);
        let pos: Vec<usize> = self.support.iter().map(|n| self.xf.position(n)).collect();
        let ph: Vec<Complex64> = self.support.iter().map(|n| self.xf.phase_half(n) * scale).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
        values.par_chunks_mut(n2).enumerate().for_each(|(i1, out)| {
            for (s, row) in a.iter().enumerate() {
                out[pos[s]] += row[i1] * ph[s];
            }
            self.xf.synth_half(out);
        });
        GriddedField { grid: g.clone(), values }
    }
}

fn profile_cache(grid: &Grid, support: &[Vec<i64>], max_degree: usize) -> Vec<Arc<ModeProfiles>> {
    let mut keys: Vec<u64> = support.iter().map(|n| grid.lambda_abs(n).to_bits()).collect();
    keys.sort_unstable();
    keys.dedup();
    let built: Vec<(u64, Arc<ModeProfiles>)> = keys
        .par_iter()
        .map(|&k| (k, Arc::new(ModeProfiles::new(max_degree, f64::from_bits(k), &grid.x1))))
        .collect();
    let map: HashMap<u64, Arc<ModeProfiles>> = built.into_iter().collect();
    support.iter().map(|n| map[&grid.lambda_abs(n).to_bits()].clone()).collect()
}

/// `(2π)^{-d2} Σ_λ w(λ) e^{iλ·x''} Σ_μ C(λ, μ) Φ_μ^λ(x')` on the grid.
pub fn synthesize(f: &SpectralField, grid: &Grid) -> Result<GriddedField> {
    Ok(Synthesizer::for_field(f, grid)?.synth(&f.coeffs))
}

/// Discrete x''-transform of every x'-row, `h^λ(x') = Σ w'' h e^{-iλ·x''}`,
/// returned as `[s][i1]` for the requested lattice nodes.
pub(crate) fn x2_transform(h: &GriddedField, support: &[Vec<i64>]) -> Vec<Vec<Complex64>> {
    let g = &h.grid;
    let xf = X2Transform::new(g);
    let n2 = g.n2();
    let w2 = g.x2_weight(0);
    let pos: Vec<usize> = support.iter().map(|n| xf.position(n)).collect();
    let ph: Vec<Complex64> = support.iter().map(|n| xf.phase_half(n).conj() * w2).collect();
    let rows: Vec<Vec<Complex64>> = h
        .values
        .par_chunks(n2)
        .map(|row| {
            let mut buf = row.to_vec();
            xf.analyze_half(&mut buf);
            pos.iter().zip(&ph).map(|(&p, &c)| buf[p] * c).collect()
        })
        .collect();
    (0..support.len()).map(|s| rows.iter().map(|r| r[s]).collect()).collect()
}

/// Coefficients `C(λ, μ) = ⟨h^λ, Φ_μ^λ⟩` for `|μ| <= degree` on every
/// λ-node where `degree` is resolvable.
pub fn analyze(h: &GriddedField, degree: usize) -> Result<SpectralField> {
    let support = h.grid.resolvable_support(degree);
    if support.is_empty() {
        return Err(Error::Unresolvable {
            degree,
            reason: "no λ-node of the grid satisfies the extent/spacing rule".into(),
        });
    }
    analyze_on(h, degree, support)
}

/// [`analyze`] on an explicit set of λ-nodes, each of which must resolve
/// `degree`.
pub fn analyze_on(h: &GriddedField, degree: usize, support: Vec<Vec<i64>>) -> Result<SpectralField> {
    let g = &h.grid;
    for n in &support {
        if !g.contains_lambda(n) {
            return Err(Error::Mismatch(format!("λ-index {n:?} outside the grid lattice")));
        }
        if !g.is_resolvable(n, degree) {
            return Err(Error::Unresolvable {
                degree,
                reason: format!(
                    "|λ| = {} allows degree {:?} at x1_extent {} and spacing {}",
                    g.lambda_abs(n),
                    g.max_resolvable_degree(g.lambda_abs(n)),
                    g.x1_extent(),
                    g.x1_spacing()
                ),
            });
        }
    }
    let hl = x2_transform(h, &support);
    let profiles = profile_cache(g, &support, degree);
    let n1 = g.n1();
    let w1: Vec<f64> = (0..n1).map(|i| g.x1.weight(i)).collect();
    let nm = modes_upto(g.dims.d1, degree).len();
    let coeffs: Vec<Complex64> = (0..support.len())
        .into_par_iter()
        .flat_map_iter(|s| {
            let prof = profiles[s].clone();
            let row = &hl[s];
            let w1 = &w1;
            (0..nm).map(move |m| {
                let terms: Vec<Complex64> =
                    prof.row(m).iter().zip(row).zip(w1).map(|((p, v), w)| v * (p * w)).collect();
                pairwise_sum_c(&terms)
            })
        })
        .collect();
    Ok(SpectralField { dims: g.dims, dlambda: g.dlambda, support, max_degree: degree, coeffs })
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(param(name, format!("exponent must be in (0, ∞], got {p}")));
    }
    Ok(())
}

/// `(Σ w |h|^p)^{1/p}`, or the max for `p = ∞`. For `p < 1` this is the
/// quasi-norm given by the same formula.
pub fn lp_norm(h: &GriddedField, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let g = &h.grid;
    if p.is_infinite() {
        return Ok(par_max_by(g.len(), |i| h.values[i].norm()));
    }
    let s = par_sum_by(g.len(), |i| g.weight(i) * h.values[i].norm().powf(p));
    Ok(s.powf(1.0 / p))
}

/// `L^p_{x''} L^q_{x'}`: inner `p` over x'', outer `q` over x'.
pub fn mixed_norm(h: &GriddedField, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let g = &h.grid;
    let n2 = g.n2();
    let w2: Vec<f64> = (0..n2).map(|j| g.x2_weight(j)).collect();
    let inner: Vec<f64> = h
        .values
        .par_chunks(n2)
        .map(|row| {
            if p.is_infinite() {
                row.iter().fold(0.0f64, |m, v| m.max(v.norm()))
            } else {
                let t: Vec<f64> = row.iter().zip(&w2).map(|(v, w)| w * v.norm().powf(p)).collect();
                pairwise_sum(&t).powf(1.0 / p)
            }
        })
        .collect();
    if q.is_infinite() {
        return Ok(inner.iter().fold(0.0, |m, &v| m.max(v)));
    }
    let t: Vec<f64> = inner.iter().enumerate().map(|(i, v)| g.x1.weight(i) * v.powf(q)).collect();
    Ok(pairwise_sum(&t).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn single_mode_closed_form() {
        let g = Grid::default_grid();
        let n = vec![3i64];
        let f = SpectralField::from_fn(&g, vec![n.clone()], 0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let h = synthesize(&f, &g).unwrap();
        let lam = g.lambda_of(3);
        let w = g.dlambda;
        let n2 = g.n2();
        for i in (0..g.len()).step_by(97) {
            let x1 = g.x1.point(i / n2)[0];
            let x2 = g.x2_point(i % n2)[0];
            let expect = Complex64::from_polar(1.0, lam * x2)
                * (w / (2.0 * PI) * lam.powf(0.25) * PI.powf(-0.25) * (-lam * x1 * x1 / 2.0).exp());
            assert!((h.values[i] - expect).norm() < 1e-14, "{i}");
        }
    }

    #[test]
    fn lp_norm_rejects_nonpositive() {
        let g = Grid::default_grid();
        let h = GriddedField::zeros(&g);
        assert!(lp_norm(&h, 0.0).is_err());
        assert!(mixed_norm(&h, 1.0, -1.0).is_err());
    }
}
