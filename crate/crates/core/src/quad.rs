//! One-dimensional Gauss-Legendre rules and composite panels.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal panels on `[a, b]`, `order` points each.
#[derive(Clone, Debug)]
pub struct Composite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Composite {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Composite { nodes, weights }
    }

    /// Panels on `[a, b]` split at the given interior breakpoints.
    pub fn with_breaks(a: f64, b: f64, breaks: &[f64], panels: usize, order: usize) -> Self {
        let mut cuts = vec![a];
        let mut bs: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
        bs.sort_by(f64::total_cmp);
        cuts.extend(bs);
        cuts.push(b);
        let mut out = Composite { nodes: vec![], weights: vec![] };
        for w in cuts.windows(2) {
            let c = Composite::new(w[0], w[1], panels, order);
            out.nodes.extend(c.nodes);
            out.weights.extend(c.weights);
        }
        out
    }

    /// Geometrically graded panels on `[0, b]` towards 0, for integrands with
    /// an algebraic singularity or kink at the origin.
    pub fn graded(b: f64, levels: usize, panels: usize, order: usize) -> Self {
        let mut out = Composite { nodes: vec![], weights: vec![] };
        let mut lo = b * 0.5f64.powi(levels as i32);
        let first = Composite::new(0.0, lo, 1, order);
        out.nodes.extend(first.nodes);
        out.weights.extend(first.weights);
        for _ in 0..levels {
            let hi = 2.0 * lo;
            let c = Composite::new(lo, hi, panels, order);
            out.nodes.extend(c.nodes);
            out.weights.extend(c.weights);
            lo = hi;
        }
        out
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        crate::reduce::pairwise_sum(&vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_handles_sqrt() {
        let c = Composite::graded(1.0, 100, 2, 12);
        let v = c.integrate(|t| t.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }
}
