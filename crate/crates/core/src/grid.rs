//! Tensor grids in `(x', x'')` and the punctured λ-lattice.
//!
//! The λ-lattice on each axis is `±(n + 1/2)Δλ`, `n = 0..count`, with
//! `Δλ = 2·lambda_min`. The x''-window is one full period `2π/Δλ` of the
//! lattice, so the discrete x''-transform is exact on lattice frequencies and
//! runs as an FFT. x'-nodes are cell-centred on `[-E, E]`.

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::hermite::{tail_radius, X1Axes};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Flat description of a grid. `x2_extent` is the half-width of the
/// x''-window and must equal `π/Δλ`; `None` means "derive it".
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub d1: usize,
    pub d2: usize,
    pub x1_extent: f64,
    pub x1_count: usize,
    pub x2_extent: Option<f64>,
    pub x2_count: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            d1: 1,
            d2: 1,
            x1_extent: 8.0,
            x1_count: 64,
            x2_extent: Some(8.0 * PI),
            x2_count: 64,
            lambda_min: 1.0 / 16.0,
            lambda_max: 4.0,
            lambda_count: 32,
        }
    }
}

pub const GRID_KEYS: [&str; 9] = [
    "d1",
    "d2",
    "x1_extent",
    "x1_count",
    "x2_extent",
    "x2_count",
    "lambda_min",
    "lambda_max",
    "lambda_count",
];

fn get<'a>(kv: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    kv.get(key).map(|s| s.as_str()).ok_or_else(|| Error::MissingKey(key.to_string()))
}

fn parse<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = get(kv, key)?;
    raw.trim().parse().map_err(|_| Error::BadKey { key: key.to_string(), reason: format!("cannot parse {raw:?}") })
}

impl GridSpec {
    /// A grid whose λ-lattice has spacing `dlambda` and `count` nodes per
    /// sign; x'' is sized to the period with `x2_count` nodes.
    pub fn lattice(dims: Dims, dlambda: f64, count: usize, x1_extent: f64, x1_count: usize, x2_count: usize) -> Self {
        GridSpec {
            d1: dims.d1,
            d2: dims.d2,
            x1_extent,
            x1_count,
            x2_extent: None,
            x2_count,
            lambda_min: 0.5 * dlambda,
            lambda_max: (count as f64 - 0.5) * dlambda,
            lambda_count: count,
        }
    }

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let x2_raw = get(kv, "x2_extent")?;
        let x2_extent = if x2_raw.trim() == "auto" { None } else { Some(parse(kv, "x2_extent")?) };
        Ok(GridSpec {
            d1: parse(kv, "d1")?,
            d2: parse(kv, "d2")?,
            x1_extent: parse(kv, "x1_extent")?,
            x1_count: parse(kv, "x1_count")?,
            x2_extent,
            x2_count: parse(kv, "x2_count")?,
            lambda_min: parse(kv, "lambda_min")?,
            lambda_max: parse(kv, "lambda_max")?,
            lambda_count: parse(kv, "lambda_count")?,
        })
    }

    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut kv = BTreeMap::new();
        kv.insert("d1".into(), self.d1.to_string());
        kv.insert("d2".into(), self.d2.to_string());
        kv.insert("x1_extent".into(), fmt_f64(self.x1_extent));
        kv.insert("x1_count".into(), self.x1_count.to_string());
        kv.insert("x2_extent".into(), self.x2_extent.map_or("auto".into(), fmt_f64));
        kv.insert("x2_count".into(), self.x2_count.to_string());
        kv.insert("lambda_min".into(), fmt_f64(self.lambda_min));
        kv.insert("lambda_max".into(), fmt_f64(self.lambda_max));
        kv.insert("lambda_count".into(), self.lambda_count.to_string());
        kv
    }

    pub fn dims(&self) -> Result<Dims> {
        Dims::new(self.d1, self.d2)
    }

    pub fn dlambda(&self) -> f64 {
        2.0 * self.lambda_min
    }

    /// The same spec with λ-spacing halved and the x''-window and counts
    /// doubled, keeping x''-spacing fixed.
    pub fn refined_lambda(&self) -> Self {
        let mut s = self.clone();
        s.lambda_min *= 0.5;
        s.lambda_count *= 2;
        s.lambda_max = (s.lambda_count as f64 - 0.5) * s.dlambda();
        s.x2_extent = s.x2_extent.map(|e| 2.0 * e);
        s.x2_count *= 2;
        s
    }
}

/// Shortest round-trip decimal for an f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A materialized grid. `scale` records the accumulated dilation relative to
/// the spec (1 for freshly built grids): x'-nodes carry `1/scale`, x''-nodes
/// `1/scale²`, λ-nodes `scale²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub dims: Dims,
    pub spec: GridSpec,
    pub scale: f64,
    pub x1: X1Axes,
    pub x2_nodes: Vec<Vec<f64>>,
    pub x2_weights: Vec<Vec<f64>>,
    pub dlambda: f64,
    pub lambda_count: usize,
}

pub fn make_grid(spec: &GridSpec) -> Result<Grid> {
    let dims = spec.dims()?;
    let bad = |m: String| Err(Error::Grid(m));
    if spec.x1_count == 0 || spec.x2_count == 0 || spec.lambda_count == 0 {
        return bad("node counts must be positive".into());
    }
    if !(spec.x1_extent > 0.0) || !spec.x1_extent.is_finite() {
        return bad(format!("x1_extent = {} must be positive", spec.x1_extent));
    }
    if !(spec.lambda_min > 0.0) || !spec.lambda_min.is_finite() {
        return bad(format!("lambda_min = {} must be positive (λ = 0 is punctured)", spec.lambda_min));
    }
    let dl = spec.dlambda();
    let top = (spec.lambda_count as f64 - 0.5) * dl;
    if top > spec.lambda_max * (1.0 + 1e-12) || top + dl <= spec.lambda_max * (1.0 - 1e-12) {
        return bad(format!(
            "lambda_max = {} is inconsistent with lambda_count = {} at spacing {dl}: top node is {top}",
            spec.lambda_max, spec.lambda_count
        ));
    }
    let half = PI / dl;
    if let Some(e) = spec.x2_extent {
        if !((e - half).abs() <= 1e-9 * half) {
            return bad(format!("x2_extent = {e} must equal π/(2·lambda_min) = {half} (one lattice period)"));
        }
    }
    if spec.x2_count < 2 * spec.lambda_count {
        return bad(format!(
            "x2_count = {} must be at least 2·lambda_count = {}",
            spec.x2_count,
            2 * spec.lambda_count
        ));
    }
    let h1 = 2.0 * spec.x1_extent / spec.x1_count as f64;
    let ax1: Vec<f64> = (0..spec.x1_count).map(|i| -spec.x1_extent + (i as f64 + 0.5) * h1).collect();
    let h2 = 2.0 * half / spec.x2_count as f64;
    let ax2: Vec<f64> = (0..spec.x2_count).map(|i| -half + i as f64 * h2).collect();
    Ok(Grid {
        dims,
        spec: spec.clone(),
        scale: 1.0,
        x1: X1Axes { nodes: vec![ax1; dims.d1], weights: vec![vec![h1; spec.x1_count]; dims.d1] },
        x2_nodes: vec![ax2; dims.d2],
        x2_weights: vec![vec![h2; spec.x2_count]; dims.d2],
        dlambda: dl,
        lambda_count: spec.lambda_count,
    })
}

impl Grid {
    pub fn default_grid() -> Grid {
        make_grid(&GridSpec::default()).expect("default spec is valid")
    }

    pub fn n1(&self) -> usize {
        self.x1.len()
    }

    pub fn n2(&self) -> usize {
        self.x2_nodes.iter().map(|a| a.len()).product()
    }

    pub fn len(&self) -> usize {
        self.n1() * self.n2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis node counts, x' axes first.
    pub fn counts(&self) -> Vec<usize> {
        self.x1.nodes.iter().chain(&self.x2_nodes).map(|a| a.len()).collect()
    }

    pub fn x2_count(&self) -> usize {
        self.x2_nodes[0].len()
    }

    /// Period of the x''-window.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.dlambda
    }

    /// λ-value of lattice index `n` (`n in -count..count`).
    #[inline]
    pub fn lambda_of(&self, n: i64) -> f64 {
        (n as f64 + 0.5) * self.dlambda
    }

    /// Quadrature weight of one λ-node, `Δλ^{d2}`.
    pub fn lambda_weight(&self) -> f64 {
        self.dlambda.powi(self.dims.d2 as i32)
    }

    pub fn lambda_vec(&self, n: &[i64]) -> Vec<f64> {
        n.iter().map(|&k| self.lambda_of(k)).collect()
    }

    pub fn lambda_abs(&self, n: &[i64]) -> f64 {
        n.iter().map(|&k| self.lambda_of(k).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains_lambda(&self, n: &[i64]) -> bool {
        let c = self.lambda_count as i64;
        n.len() == self.dims.d2 && n.iter().all(|&k| k >= -c && k < c)
    }

    /// Every lattice node, axis 0 slowest, each axis ascending.
    pub fn all_lambda(&self) -> Vec<Vec<i64>> {
        let c = self.lambda_count as i64;
        let mut out = vec![vec![]];
        for _ in 0..self.dims.d2 {
            let mut next = vec![];
            for p in &out {
                for k in -c..c {
                    let mut q = p.clone();
                    q.push(k);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// Lattice nodes with `lo <= |λ| <= hi`.
    pub fn lambda_band(&self, lo: f64, hi: f64) -> Vec<Vec<i64>> {
        self.all_lambda()
            .into_iter()
            .filter(|n| {
                let a = self.lambda_abs(n);
                a >= lo && a <= hi
            })
            .collect()
    }

    pub fn x1_extent(&self) -> f64 {
        self.spec.x1_extent / self.scale
    }

    pub fn x1_spacing(&self) -> f64 {
        self.x1.weights[0][0]
    }

    /// Largest degree resolvable at `|λ| = lam`: the half-width of the
    /// x'-window must exceed the tail radius of the degree (at most
    /// `TAIL_MASS` of the mode's energy falls outside) and the spacing must be
    /// below `min(0.5, 1.8 (2l + d1)^{-1/2}) |λ|^{-1/2}`.
    pub fn max_resolvable_degree(&self, lam: f64) -> Option<usize> {
        let d1 = self.dims.d1 as f64;
        let ext = self.x1_extent();
        let h = self.x1_spacing();
        let s = lam.sqrt();
        let ok = |l: usize| {
            let q = (2.0 * l as f64 + d1).sqrt();
            h <= (0.5f64).min(1.8 / q) / s && ext * s >= tail_radius(l)
        };
        if !ok(0) {
            return None;
        }
        let mut l = 0;
        while ok(l + 1) && l < 4096 {
            l += 1;
        }
        Some(l)
    }

    pub fn is_resolvable(&self, n: &[i64], degree: usize) -> bool {
        self.max_resolvable_degree(self.lambda_abs(n)).is_some_and(|m| m >= degree)
    }

    /// Lattice nodes at which degree `l` is resolvable.
    pub fn resolvable_support(&self, degree: usize) -> Vec<Vec<i64>> {
        self.all_lambda().into_iter().filter(|n| self.is_resolvable(n, degree)).collect()
    }

    /// `δ_t` applied to the node sets: the returned grid samples `δ_t f`
    /// with the same values at the same indices as this grid samples `f`.
    pub fn dilated(&self, t: f64) -> Result<Grid> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Inadmissible(t));
        }
        let mut g = self.clone();
        g.scale *= t;
        for a in 0..g.dims.d1 {
            g.x1.nodes[a].iter_mut().for_each(|x| *x /= t);
            g.x1.weights[a].iter_mut().for_each(|w| *w /= t);
        }
        let t2 = t * t;
        for a in 0..g.dims.d2 {
            g.x2_nodes[a].iter_mut().for_each(|x| *x /= t2);
            g.x2_weights[a].iter_mut().for_each(|w| *w /= t2);
        }
        g.dlambda *= t2;
        Ok(g)
    }

    /// Spatial weight of flat node `idx` (x' index major, x'' minor).
    pub fn weight(&self, idx: usize) -> f64 {
        let n2 = self.n2();
        self.x1.weight(idx / n2) * self.x2_weight(idx % n2)
    }

    pub fn x2_weight(&self, j: usize) -> f64 {
        let mut j = j;
        let mut w = 1.0;
        for a in (0..self.dims.d2).rev() {
            let n = self.x2_nodes[a].len();
            w *= self.x2_weights[a][j % n];
            j /= n;
        }
        w
    }

    pub fn x2_point(&self, j: usize) -> Vec<f64> {
        let mut j = j;
        let mut out = vec![0.0; self.dims.d2];
        for a in (0..self.dims.d2).rev() {
            let n = self.x2_nodes[a].len();
            out[a] = self.x2_nodes[a][j % n];
            j /= n;
        }
        out
    }

    /// Whether two grids describe the same node sets (up to roundoff).
    pub fn same_nodes(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        self.dims == other.dims
            && self.counts() == other.counts()
            && close(self.dlambda, other.dlambda)
            && self.lambda_count == other.lambda_count
            && close(self.x1_spacing(), other.x1_spacing())
            && close(self.x1.nodes[0][0], other.x1.nodes[0][0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = Grid::default_grid();
        assert_eq!(g.len(), 64 * 64);
        assert_eq!(g.all_lambda().len(), 64);
        assert!((g.lambda_of(-1) + 1.0 / 16.0).abs() < 1e-15);
        assert!((g.lambda_of(31) - 3.9375).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda_min_rejected() {
        let spec = GridSpec { lambda_min: 0.0, ..GridSpec::default() };
        assert!(make_grid(&spec).is_err());
    }

    #[test]
    fn wrong_window_rejected() {
        let spec = GridSpec { x2_extent: Some(8.0), ..GridSpec::default() };
        assert!(make_grid(&spec).is_err());
    }

    #[test]
    fn dilation_group() {
        let g = Grid::default_grid();
        let h = g.dilated(2.0).unwrap().dilated(3.0).unwrap();
        let k = g.dilated(6.0).unwrap();
        assert!(h.same_nodes(&k));
        assert!(g.dilated(0.0).is_err());
    }
}
