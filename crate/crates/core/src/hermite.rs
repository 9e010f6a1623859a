//! Hermite functions, scaled Hermite functions `Φ_μ^λ`, eigenspace projections
//! and their kernels.
//!
//! Evaluation uses the normalized three-term recurrence with the Gaussian
//! factor pulled out and a running log-scale, so degrees in the thousands stay
//! finite far into the tails. Results below [`FLUSH`] are returned as 0.

use crate::error::{param, Result};
use std::f64::consts::PI;

/// Magnitudes below this are flushed to zero.
pub const FLUSH: f64 = 1e-300;
const RESCALE: f64 = 1e150;

fn pi_quarter() -> f64 {
    PI.powf(-0.25)
}

fn finish(v: f64, log_scale: f64, t: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let lg = v.abs().ln() + log_scale - 0.5 * t * t;
    let out = v.signum() * (lg.exp()) * pi_quarter();
    if out.abs() < FLUSH {
        0.0
    } else {
        out
    }
}

/// `h_l(t)`.
pub fn hermite_eval(l: usize, t: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for n in 0..l {
        let nf = n as f64;
        let next = t * (2.0 / (nf + 1.0)).sqrt() * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    finish(cur, log_scale, t)
}

/// `h_0(t), ..., h_lmax(t)` written into `out[..=lmax]`.
pub fn hermite_all(lmax: usize, t: f64, out: &mut [f64]) {
    let mut raw = vec![0.0; lmax + 1];
    let mut scale = vec![0.0; lmax + 1];
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    raw[0] = 1.0;
    for n in 0..lmax {
        let nf = n as f64;
        let next = t * (2.0 / (nf + 1.0)).sqrt() * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        raw[n + 1] = cur;
        scale[n + 1] = log_scale;
    }
    for l in 0..=lmax {
        out[l] = finish(raw[l], scale[l], t);
    }
}

/// Table of `h_l(t_i)` for `l <= max_l`, stored row-major by degree.
#[derive(Clone, Debug)]
pub struct HermiteTable {
    pub max_l: usize,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl HermiteTable {
    pub fn new(max_l: usize, nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut values = vec![0.0; (max_l + 1) * n];
        let mut buf = vec![0.0; max_l + 1];
        for (i, &t) in nodes.iter().enumerate() {
            hermite_all(max_l, t, &mut buf);
            for l in 0..=max_l {
                values[l * n + i] = buf[l];
            }
        }
        HermiteTable { max_l, nodes: nodes.to_vec(), values }
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.values[l * n..(l + 1) * n]
    }

    /// Largest relative residual of the three-term recurrence over the table.
    /// The residual is measured against the size of the terms involved.
    pub fn recurrence_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for l in 1..self.max_l {
            let lf = l as f64;
            let (a, b, c) = (self.row(l - 1), self.row(l), self.row(l + 1));
            for (i, &t) in self.nodes.iter().enumerate() {
                let t1 = t * (2.0 / (lf + 1.0)).sqrt() * b[i];
                let t2 = (lf / (lf + 1.0)).sqrt() * a[i];
                let scale = c[i].abs().max(t1.abs()).max(t2.abs());
                if scale < 1e-250 {
                    continue;
                }
                worst = worst.max((c[i] - t1 + t2).abs() / scale);
            }
        }
        worst
    }

    /// Max deviation of the Gram matrix from the identity under weights `w`.
    pub fn gram_deviation(&self, w: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..=self.max_l {
            for b in a..=self.max_l {
                let s: f64 = crate::reduce::pairwise_sum(
                    &self.row(a).iter().zip(self.row(b)).zip(w).map(|((x, y), w)| x * y * w).collect::<Vec<_>>(),
                );
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// Number of multi-indices in `N^d1` with `|μ| = k`.
pub fn mode_count(d1: usize, k: usize) -> usize {
    // C(k + d1 - 1, d1 - 1)
    let mut c: u128 = 1;
    for i in 0..(d1 - 1) as u128 {
        c = c * (k as u128 + 1 + i) / (i + 1);
    }
    c as usize
}

/// Multi-indices with `|μ| = k` in colexicographic order: ordered by the
/// reversed tuple, so the last coordinate varies slowest.
pub fn multi_indices(d1: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(mode_count(d1, k));
    let mut cur = vec![0; d1];
    fn rec(axis: usize, rem: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        // fill from the last axis (slowest) down to axis 0
        if axis == 0 {
            cur[0] = rem;
            out.push(cur.clone());
            return;
        }
        for v in 0..=rem {
            cur[axis] = v;
            rec(axis - 1, rem - v, cur, out);
        }
    }
    rec(d1 - 1, k, &mut cur, &mut out);
    out
}

/// All multi-indices with `|μ| <= l`: by degree, then colex within a degree.
pub fn modes_upto(d1: usize, l: usize) -> Vec<Vec<usize>> {
    (0..=l).flat_map(|k| multi_indices(d1, k)).collect()
}

/// Euclidean norm of a λ vector, rejecting λ = 0.
pub fn lambda_norm(lambda: &[f64]) -> Result<f64> {
    let n = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(param("lambda", "λ must be nonzero and finite"));
    }
    Ok(n)
}

/// `Φ_μ^λ(x') = |λ|^{d1/4} Π_a h_{μ_a}(|λ|^{1/2} x'_a)`.
pub fn scaled_hermite_eval(mu: &[usize], lambda: &[f64], x1: &[f64]) -> Result<f64> {
    let lam = lambda_norm(lambda)?;
    Ok(scaled_hermite_abs(mu, lam, x1))
}

pub(crate) fn scaled_hermite_abs(mu: &[usize], lam: f64, x1: &[f64]) -> f64 {
    let s = lam.sqrt();
    let mut v = lam.powf(mu.len() as f64 / 4.0);
    for (m, x) in mu.iter().zip(x1) {
        v *= hermite_eval(*m, s * x);
    }
    v
}

/// Per-axis table of `|λ|^{1/4} h_l(|λ|^{1/2} x_i)` for one `|λ|`, so that a
/// product over axes yields `Φ_μ^λ`.
#[derive(Clone, Debug)]
pub struct ScaledAxisTable {
    pub max_l: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl ScaledAxisTable {
    pub fn new(max_l: usize, lam: f64, nodes: &[f64]) -> Self {
        let s = lam.sqrt();
        let f = lam.powf(0.25);
        let scaled: Vec<f64> = nodes.iter().map(|x| s * x).collect();
        let t = HermiteTable::new(max_l, &scaled);
        let values = t.values.iter().map(|v| v * f).collect();
        ScaledAxisTable { max_l, n: nodes.len(), values }
    }

    #[inline]
    pub fn get(&self, l: usize, i: usize) -> f64 {
        self.values[l * self.n + i]
    }
}

/// Tensor x'-grid: per-axis nodes and quadrature weights, flat row-major with
/// axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct X1Axes {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl X1Axes {
    pub fn d1(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unflatten a node index into per-axis indices.
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.d1()).rev() {
            let n = self.nodes[a].len();
            out[a] = idx % n;
            idx /= n;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut ix = vec![0; self.d1()];
        self.unflatten(idx, &mut ix);
        ix.iter().enumerate().map(|(a, &i)| self.nodes[a][i]).collect()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let mut ix = vec![0; self.d1()];
        self.unflatten(idx, &mut ix);
        ix.iter().enumerate().map(|(a, &i)| self.weights[a][i]).product()
    }
}

/// `Φ_μ^λ` sampled on every node of an x'-grid, for all `|μ| <= max_l`.
/// Rows follow [`modes_upto`] order.
#[derive(Clone, Debug)]
pub struct ModeProfiles {
    pub max_l: usize,
    pub modes: Vec<Vec<usize>>,
    pub npts: usize,
    pub values: Vec<f64>,
}

impl ModeProfiles {
    pub fn new(max_l: usize, lam: f64, axes: &X1Axes) -> Self {
        let d1 = axes.d1();
        let tables: Vec<ScaledAxisTable> =
            axes.nodes.iter().map(|nodes| ScaledAxisTable::new(max_l, lam, nodes)).collect();
        let modes = modes_upto(d1, max_l);
        let npts = axes.len();
        let mut values = vec![0.0; modes.len() * npts];
        let mut ix = vec![0; d1];
        for p in 0..npts {
            axes.unflatten(p, &mut ix);
            for (m, mu) in modes.iter().enumerate() {
                let mut v = 1.0;
                for a in 0..d1 {
                    v *= tables[a].get(mu[a], ix[a]);
                }
                values[m * npts + p] = v;
            }
        }
        ModeProfiles { max_l, modes, npts, values }
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m * self.npts..(m + 1) * self.npts]
    }

    /// Range of rows with `|μ| = k`.
    pub fn degree_rows(&self, k: usize) -> std::ops::Range<usize> {
        let d1 = self.modes.first().map_or(1, |m| m.len());
        let start: usize = (0..k).map(|j| mode_count(d1, j)).sum();
        start..start + mode_count(d1, k)
    }
}

/// `K_k^λ(x', y') = Σ_{|μ| = k} Φ_μ^λ(x') Φ_μ^λ(y')`.
pub fn projection_kernel(k: usize, lambda: &[f64], x1: &[f64], y1: &[f64]) -> Result<f64> {
    let lam = lambda_norm(lambda)?;
    Ok(projection_kernel_abs(k, lam, x1, y1))
}

pub(crate) fn projection_kernel_abs(k: usize, lam: f64, x1: &[f64], y1: &[f64]) -> f64 {
    let d1 = x1.len();
    let s = lam.sqrt();
    let f = lam.powf(0.25);
    let mut hx = vec![vec![0.0; k + 1]; d1];
    let mut hy = vec![vec![0.0; k + 1]; d1];
    for a in 0..d1 {
        hermite_all(k, s * x1[a], &mut hx[a]);
        hermite_all(k, s * y1[a], &mut hy[a]);
    }
    let mut acc = 0.0;
    for mu in multi_indices(d1, k) {
        let mut v = 1.0;
        for a in 0..d1 {
            v *= f * hx[a][mu[a]] * f * hy[a][mu[a]];
        }
        acc += v;
    }
    acc
}

/// `P_k^λ f` for a profile sampled on the x'-grid, with inner products taken
/// by the grid quadrature.
pub fn apply_projection(k: usize, lambda: &[f64], profile: &[f64], axes: &X1Axes) -> Result<Vec<f64>> {
    let lam = lambda_norm(lambda)?;
    if profile.len() != axes.len() {
        return Err(param("profile", "length does not match the x'-grid"));
    }
    let prof = ModeProfiles::new(k, lam, axes);
    let w: Vec<f64> = (0..axes.len()).map(|p| axes.weight(p)).collect();
    let mut out = vec![0.0; axes.len()];
    for m in prof.degree_rows(k) {
        let row = prof.row(m);
        let terms: Vec<f64> = row.iter().zip(profile).zip(&w).map(|((a, b), w)| a * b * w).collect();
        let c = crate::reduce::pairwise_sum(&terms);
        for (o, r) in out.iter_mut().zip(row) {
            *o += c * r;
        }
    }
    Ok(out)
}

/// `h_n''` in the Hermite basis: pairs `(degree, coefficient)` over
/// `h_{n-2}, h_n, h_{n+2}`.
pub fn second_derivative_ladder(n: usize) -> Vec<(usize, f64)> {
    let nf = n as f64;
    let mut out = vec![];
    if n >= 2 {
        out.push((n - 2, 0.5 * (nf * (nf - 1.0)).sqrt()));
    }
    out.push((n, -(nf + 0.5)));
    out.push((n + 2, 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt()));
    out
}

/// `t² h_n` in the Hermite basis.
pub fn position_squared_ladder(n: usize) -> Vec<(usize, f64)> {
    let nf = n as f64;
    let mut out = vec![];
    if n >= 2 {
        out.push((n - 2, 0.5 * (nf * (nf - 1.0)).sqrt()));
    }
    out.push((n, nf + 0.5));
    out.push((n + 2, 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt()));
    out
}

/// Max residual of `H(λ)Φ_μ^λ = (2|μ| + d1)|λ| Φ_μ^λ` over the points, with
/// the Laplacian taken spectrally through the ladder identities. Relative to
/// `(2|μ| + d1)|λ| max|Φ|`.
pub fn eigen_residual_spectral(mu: &[usize], lam: f64, points: &[Vec<f64>]) -> f64 {
    let d1 = mu.len();
    let eig = (2 * mu.iter().sum::<usize>() + d1) as f64 * lam;
    let s = lam.sqrt();
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for x in points {
        let phi = scaled_hermite_abs(mu, lam, x);
        peak = peak.max(phi.abs());
        // H(λ) = |λ| Σ_a (-∂²_u + u²) in u = |λ|^{1/2} x'
        let mut hphi = 0.0;
        for a in 0..d1 {
            let mut axis_term = 0.0;
            let terms = second_derivative_ladder(mu[a])
                .into_iter()
                .map(|(i, c)| (i, -c))
                .chain(position_squared_ladder(mu[a]));
            for (idx, c) in terms {
                let mut v = lam.powf(d1 as f64 / 4.0) * c;
                for b in 0..d1 {
                    let deg = if b == a { idx } else { mu[b] };
                    v *= hermite_eval(deg, s * x[b]);
                }
                axis_term += v;
            }
            hphi += lam * axis_term;
        }
        worst = worst.max((hphi - eig * phi).abs());
    }
    if peak == 0.0 {
        0.0
    } else {
        worst / (eig * peak)
    }
}

/// Same residual with the Laplacian replaced by 4th-order central differences
/// of step `h` in x'.
pub fn eigen_residual_fd(mu: &[usize], lam: f64, points: &[Vec<f64>], h: f64) -> f64 {
    let d1 = mu.len();
    let eig = (2 * mu.iter().sum::<usize>() + d1) as f64 * lam;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for x in points {
        let phi = scaled_hermite_abs(mu, lam, x);
        peak = peak.max(phi.abs());
        let mut lap = 0.0;
        let mut y = x.clone();
        for a in 0..d1 {
            let mut f = [0.0; 5];
            for (i, off) in [-2.0, -1.0, 0.0, 1.0, 2.0].iter().enumerate() {
                y[a] = x[a] + off * h;
                f[i] = scaled_hermite_abs(mu, lam, &y);
            }
            y[a] = x[a];
            lap += (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let hphi = -lap + r2 * lam * lam * phi;
        worst = worst.max((hphi - eig * phi).abs());
    }
    if peak == 0.0 {
        0.0
    } else {
        worst / (eig * peak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        assert!((hermite_eval(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(hermite_eval(1, 0.0), 0.0);
        assert!((hermite_eval(2, 0.0) + 0.531_125_966_013_598_4).abs() < 1e-15);
    }

    #[test]
    fn colex_order() {
        let m = multi_indices(2, 2);
        assert_eq!(m, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let m = multi_indices(3, 1);
        assert_eq!(m, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(mode_count(3, 4), 15);
        assert_eq!(multi_indices(3, 4).len(), 15);
    }

    #[test]
    fn high_degree_is_finite() {
        for &t in &[0.0, 5.0, 31.0, 45.0] {
            let v = hermite_eval(1024, t);
            assert!(v.is_finite());
            assert!(v.abs() < 1.0);
        }
        assert_eq!(hermite_eval(3, 60.0), 0.0);
    }

    #[test]
    fn all_matches_single() {
        let mut buf = vec![0.0; 41];
        hermite_all(40, 3.7, &mut buf);
        for l in 0..=40 {
            assert_eq!(buf[l], hermite_eval(l, 3.7));
        }
    }
}

/// Tail mass the x'-window may discard for a mode to count as resolved.
pub const TAIL_MASS: f64 = 1e-16;

/// Smallest `u >= 0` with `2 ∫_u^∞ h_l(t)^2 dt <= TAIL_MASS`.
///
/// Hermite functions leave their oscillatory region at `sqrt(2l + 1)` and
/// decay like an Airy tail beyond it, so the radius is found by integrating
/// inward from far outside. Results are cached per degree.
pub fn tail_radius(l: usize) -> f64 {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some(&u) = cache.lock().unwrap().get(l) {
        return u;
    }
    let mut guard = cache.lock().unwrap();
    while guard.len() <= l {
        let k = guard.len();
        guard.push(compute_tail_radius(k));
    }
    guard[l]
}

fn compute_tail_radius(l: usize) -> f64 {
    let step = 1e-3;
    let mut u = (2.0 * l as f64 + 1.0).sqrt() + 12.0;
    let mut mass = 0.0;
    let mut prev = hermite_eval(l, u).powi(2);
    while u > 0.0 {
        let next = hermite_eval(l, u - step).powi(2);
        let piece = 2.0 * 0.5 * step * (prev + next);
        if mass + piece > TAIL_MASS {
            return u;
        }
        mass += piece;
        prev = next;
        u -= step;
    }
    0.0
}
