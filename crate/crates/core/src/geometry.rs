//! Control-distance geometry: the canonical distance representative, ball
//! volumes, and the weight integrals over balls.

use crate::dims::Dims;
use crate::error::{param, Result};
use crate::probe::{ProbeReport, Verdict};
use crate::quad::Composite;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl Point {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Self {
        Point { x1, x2 }
    }

    pub fn origin(dims: Dims) -> Self {
        Point { x1: vec![0.0; dims.d1], x2: vec![0.0; dims.d2] }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `ϱ̃(x, y) = |x'-y'| + (|x''-y''| / (|x'|+|y'|)` when
/// `|x''-y''|^{1/2} <= |x'|+|y'|`, else `|x''-y''|^{1/2})`.
pub fn control_distance(x: &Point, y: &Point) -> f64 {
    let d1 = dist(&x.x1, &y.x1);
    let d2 = dist(&x.x2, &y.x2);
    let s = norm(&x.x1) + norm(&y.x1);
    let sq = d2.sqrt();
    d1 + if d2 == 0.0 {
        0.0
    } else if sq <= s {
        d2 / s
    } else {
        sq
    }
}

/// `v(x, r) = r^{d} max{r, |x'|}^{d2}`.
pub fn ball_volume(dims: Dims, x: &Point, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(param("r", format!("radius must be positive, got {r}")));
    }
    Ok(r.powi(dims.d() as i32) * r.max(norm(&x.x1)).powi(dims.d2 as i32))
}

pub fn in_ball(center: &Point, r: f64, x: &Point) -> bool {
    control_distance(center, x) < r
}

/// Product-box inclusion for balls near the x'' axis: when `|x'| <= K r`,
/// `B(x, r)` lies in `B(x', r) x B(x'', (2K+1) r²)`. Returns whether `y`
/// satisfies the box condition for that constant.
pub fn in_product_box(center: &Point, r: f64, k: f64, y: &Point) -> bool {
    dist(&center.x1, &y.x1) < r && dist(&center.x2, &y.x2) < (2.0 * k + 1.0) * r * r
}

/// Radius of the x''-section of `B(a, r)` above `x'`: the section is the
/// Euclidean ball of this radius around `a''` (0 when empty).
pub fn section_radius(a1: &[f64], r: f64, x1: &[f64]) -> f64 {
    let rho = r - dist(a1, x1);
    if rho <= 0.0 {
        return 0.0;
    }
    let s = norm(a1) + norm(x1);
    if rho <= s {
        rho * s
    } else {
        rho * rho
    }
}

/// `Γ(k/2)` for positive integers `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface area of the unit sphere in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    First,
    Second,
}

/// Integral over `{|x' - a'| < r}` of `g(x', section_radius)`. Exact in
/// structure: for `d1 = 1` composite Gauss-Legendre with breakpoints at every
/// kink; for `d1 >= 2` polar coordinates around `a'` with the angle measured
/// from `a'`.
fn integrate_over_ball(a1: &[f64], r: f64, panels: usize, g: &dyn Fn(&[f64], f64) -> f64) -> f64 {
    let d1 = a1.len();
    const ORDER: usize = 12;
    if d1 == 1 {
        let a = a1[0];
        let (lo, hi) = (a - r, a + r);
        let mut breaks = vec![0.0, a];
        // kinks where r - |x - a| = |x| + |a| on each linear piece
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                // r - s1 (x - a) = s2 x + |a|
                let den = s2 + s1;
                if den != 0.0 {
                    breaks.push((r + s1 * a - a.abs()) / den);
                }
            }
        }
        let mut total = 0.0;
        let mut cuts: Vec<f64> = breaks.into_iter().filter(|&t| t > lo && t < hi).collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            // graded towards both ends to absorb |x'|^{-γ} at 0
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            for (from, to) in [(p, mid), (q, mid)] {
                let len = (to - from).abs();
                let c = Composite::graded(len, 30, panels, ORDER);
                let dir = (to - from).signum();
                total += c.integrate(|t| {
                    let x = [from + dir * t];
                    g(&x, section_radius(a1, r, &x))
                });
            }
        }
        return total;
    }
    let an = norm(a1);
    let e: Vec<f64> = if an > 0.0 {
        a1.iter().map(|v| v / an).collect()
    } else {
        let mut e = vec![0.0; d1];
        e[0] = 1.0;
        e
    };
    // a second direction orthogonal to e
    let mut f = vec![0.0; d1];
    let k = if e[0].abs() < 0.9 { 0 } else { 1 };
    f[k] = 1.0;
    let dot: f64 = f.iter().zip(&e).map(|(x, y)| x * y).sum();
    f.iter_mut().zip(&e).for_each(|(x, y)| *x -= dot * y);
    let fnorm = norm(&f);
    f.iter_mut().for_each(|x| *x /= fnorm);
    let sphere = unit_sphere_area(d1 - 1);
    let t_rule = Composite::with_breaks(0.0, r, &[an], panels, ORDER);
    let th_rule = Composite::new(0.0, PI, 4 * panels, ORDER);
    let mut total = 0.0;
    for (&t, &wt) in t_rule.nodes.iter().zip(&t_rule.weights) {
        let mut inner = 0.0;
        for (&th, &wth) in th_rule.nodes.iter().zip(&th_rule.weights) {
            let x: Vec<f64> = (0..d1).map(|i| a1[i] - t * (th.cos() * e[i] + th.sin() * f[i])).collect();
            inner += wth * th.sin().powi(d1 as i32 - 2) * g(&x, section_radius(a1, r, &x));
        }
        total += wt * t.powi(d1 as i32 - 1) * sphere * inner;
    }
    total
}

fn weight_lhs(dims: Dims, a1: &[f64], r: f64, gamma: f64, layer: Layer, panels: usize) -> f64 {
    let d2 = dims.d2;
    match layer {
        Layer::First => {
            let w = unit_ball_volume(d2);
            integrate_over_ball(a1, r, panels, &|x, s| {
                let n = norm(x);
                if n == 0.0 && gamma > 0.0 {
                    return 0.0;
                }
                n.powf(-gamma) * w * s.powi(d2 as i32)
            })
        }
        Layer::Second => {
            let c = unit_sphere_area(d2) / (d2 as f64 - gamma);
            integrate_over_ball(a1, r, panels, &|_, s| c * s.powf(d2 as f64 - gamma))
        }
    }
}

fn weight_rhs(dims: Dims, a1: &[f64], r: f64, gamma: f64, layer: Layer) -> f64 {
    match layer {
        Layer::First => {
            r.powi(dims.d() as i32) * (4.0 * r).max(norm(a1)).powf(dims.d2 as f64 - gamma)
        }
        Layer::Second => r.powf(dims.d1 as f64 + 2.0 * (dims.d2 as f64 - gamma)),
    }
}

/// Sweep of `∫_{B(a,r)} w` against the closed-form bound over `radii`, with
/// weight `|x'|^{-γ}` (first layer) or `|x''-y''|^{-γ}` at the worst
/// `x'' = a''` (second layer, requires `|a'| <= k_box·r` for every radius).
/// Ordinates are `log₂(LHS/RHS)` against `log₂ r`; `max_ratio` is the
/// largest ratio and `refined_max_ratio` the same after doubling the panels.
pub fn weight_integral_check(
    dims: Dims,
    a: &Point,
    radii: &[f64],
    gamma: f64,
    layer: Layer,
    k_box: f64,
) -> Result<ProbeReport> {
    let lim = match layer {
        Layer::First => dims.d1,
        Layer::Second => dims.d2,
    };
    if !(gamma >= 0.0 && gamma < lim as f64) {
        return Err(param("gamma", format!("need 0 <= γ < {lim}, got {gamma}")));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(param("r", "radii must be positive and nonempty"));
    }
    if layer == Layer::Second && radii.iter().any(|&r| norm(&a.x1) > k_box * r) {
        return Err(param("a", format!("second layer needs |a'| <= {k_box}·r")));
    }
    let ratios = |panels: usize| -> Vec<f64> {
        radii
            .iter()
            .map(|&r| weight_lhs(dims, &a.x1, r, gamma, layer, panels) / weight_rhs(dims, &a.x1, r, gamma, layer))
            .collect()
    };
    let base = ratios(4);
    let refined = ratios(8);
    let abscissa: Vec<f64> = radii.iter().map(|r| r.log2()).collect();
    let mut rep = ProbeReport::from_values(format!("weight-integral-{layer:?}-gamma{gamma}"), abscissa, &base);
    rep.max_ratio = base.iter().cloned().fold(0.0, f64::max);
    rep.refined_max_ratio = Some(refined.iter().cloned().fold(0.0, f64::max));
    rep.verdict = Verdict::Pass;
    Ok(rep)
}

/// Largest `ϱ̃(x,z) / (ϱ̃(x,y) + ϱ̃(y,z))` over the triples: the measured
/// quasi-triangle constant.
pub fn quasi_triangle_constant(triples: &[(Point, Point, Point)]) -> f64 {
    triples
        .iter()
        .map(|(x, y, z)| {
            let s = control_distance(x, y) + control_distance(y, z);
            if s == 0.0 {
                0.0
            } else {
                control_distance(x, z) / s
            }
        })
        .fold(0.0, f64::max)
}
