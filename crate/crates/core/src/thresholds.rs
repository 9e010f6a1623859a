//! Smoothness thresholds `α(p1, p2)` for bilinear Bochner–Riesz means on
//! Grushin space, with the exponent-square region they come from.
//!
//! The general variant lists the seven items valid for all inputs. The
//! restricted variant adds the five improved items that need the
//! x''-Fourier support of the inputs to stay away from `λ = 0`; general
//! items stay valid there, so the restricted value is the minimum over both
//! lists. Where several items apply, any one suffices and the minimum is
//! reported. The corner `(1/p1, 1/p2) = (0, 0)` is not covered by any item
//! (all of them need `p < ∞` or `p <= 2`); its value `d - 1/2` is the
//! region II formula taken to the closure, which is what the boundedness
//! argument at `(∞, ∞, ∞)` gives.

use crate::dims::Dims;
use crate::error::{param, Result};
use std::fmt;

const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    I,
    II,
    IIIa,
    IIIb,
    IVa,
    IVb,
    V,
    NotCovered,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::I => "I",
            Region::II => "II",
            Region::IIIa => "III_a",
            Region::IIIb => "III_b",
            Region::IVa => "IV_a",
            Region::IVb => "IV_b",
            Region::V => "V",
            Region::NotCovered => "NotCovered",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    General,
    Restricted,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "general" => Ok(Variant::General),
            "restricted" => Ok(Variant::Restricted),
            other => Err(param("variant", format!("unknown variant {other:?}; known: general, restricted"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::General => "general",
            Variant::Restricted => "restricted",
        })
    }
}

/// Which statement a threshold was read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    /// Items valid for all inputs.
    General,
    /// Items that need the inputs' x''-spectrum away from the origin.
    Restricted,
    /// Closure of region II at `p1 = p2 = ∞`.
    Corner,
    None,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::General => "general-item",
            Source::Restricted => "restricted-item",
            Source::Corner => "corner-closure",
            Source::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionVerdict {
    pub region: Region,
    pub threshold: Option<f64>,
    pub variant: Variant,
    pub source: Source,
}

fn le(a: f64, b: f64) -> bool {
    a <= b + EPS
}

fn lt(a: f64, b: f64) -> bool {
    a < b - EPS
}

/// Items valid for all inputs; `u1 = 1/p1`, `u2 = 1/p2`, `u = 1/p`.
fn general_items(u1: f64, u2: f64, dims: Dims) -> Vec<(Region, f64)> {
    let d = dims.d() as f64;
    let q = dims.q() as f64;
    let dd = dims.frak_d() as f64;
    let u = u1 + u2;
    let mut out = Vec::new();
    // 2 <= p1, p2 < ∞ means 0 < u_i <= 1/2; 1 <= p <= 2 means 1/2 <= u <= 1
    if lt(0.0, u1) && le(u1, 0.5) && lt(0.0, u2) && le(u2, 0.5) && le(0.5, u) && le(u, 1.0) {
        out.push((Region::I, (d - 1.0) * (1.0 - u)));
    }
    if lt(0.0, u1) && le(u1, 0.5) && lt(0.0, u2) && le(u2, 0.5) && lt(0.0, u) && le(u, 0.5) {
        out.push((Region::II, (d - 1.0) / 2.0 + d * (0.5 - u)));
    }
    if le(u2, 0.5) && le(0.5, u1) && le(0.5, u) && le(u, 1.0) {
        out.push((Region::IIIa, q * (u1 - 0.5) + (d - 1.0) * (1.0 - u)));
    }
    if le(u1, 0.5) && le(0.5, u2) && le(0.5, u) && le(u, 1.0) {
        out.push((Region::IIIb, q * (u2 - 0.5) + (d - 1.0) * (1.0 - u)));
    }
    if le(0.5, u1) && le(u2, 0.5) && le(1.0, u) {
        out.push((Region::IVa, dd * (u - 1.0) + q * (0.5 - u2)));
    }
    if le(0.5, u2) && le(u1, 0.5) && le(1.0, u) {
        out.push((Region::IVb, dd * (u - 1.0) + q * (0.5 - u1)));
    }
    if le(0.5, u1) && le(0.5, u2) {
        out.push((Region::V, dd * (u - 1.0)));
    }
    out
}

/// Improved items under the spectral support condition. The items carry
/// their own ranges of `p` (down to `1/2` in region V), which are used as
/// stated.
fn restricted_items(u1: f64, u2: f64, dims: Dims) -> Vec<(Region, f64)> {
    let d = dims.d() as f64;
    let u = u1 + u2;
    let mut out = Vec::new();
    if le(u2, 0.5) && le(0.5, u1) && le(0.5, u) && le(u, 1.0) {
        out.push((Region::IIIa, d * (0.5 - u2) - (1.0 - u)));
    }
    if le(u1, 0.5) && le(0.5, u2) && le(0.5, u) && le(u, 1.0) {
        out.push((Region::IIIb, d * (0.5 - u1) - (1.0 - u)));
    }
    if le(0.5, u1) && le(u2, 0.5) && le(1.0, u) {
        out.push((Region::IVa, d * (u1 - 0.5)));
    }
    if le(0.5, u2) && le(u1, 0.5) && le(1.0, u) {
        out.push((Region::IVb, d * (u2 - 0.5)));
    }
    if le(0.5, u1) && le(0.5, u2) {
        out.push((Region::V, d * (u - 1.0)));
    }
    out
}

fn inverse(name: &str, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(param(name, format!("exponent must lie in [1, ∞], got {p}")));
    }
    Ok(if p.is_infinite() { 0.0 } else { 1.0 / p })
}

/// Threshold at the exponents `(p1, p2)`, `p = ∞` allowed.
pub fn threshold(p1: f64, p2: f64, dims: Dims, variant: Variant) -> Result<RegionVerdict> {
    let u1 = inverse("p1", p1)?;
    let u2 = inverse("p2", p2)?;
    threshold_inv(u1, u2, dims, variant)
}

/// Threshold at `(1/p1, 1/p2)` in the unit square.
pub fn threshold_inv(u1: f64, u2: f64, dims: Dims, variant: Variant) -> Result<RegionVerdict> {
    for (name, u) in [("inv_p1", u1), ("inv_p2", u2)] {
        if !(-EPS..=1.0 + EPS).contains(&u) {
            return Err(param(name, format!("1/p must lie in [0, 1], got {u}")));
        }
    }
    let mut best: Option<(Region, f64, Source)> = None;
    let mut consider = |items: Vec<(Region, f64)>, src: Source| {
        for (r, a) in items {
            // exact zeros may come out as -0.0 or -1e-17
            let a = if a.abs() < EPS { 0.0 } else { a };
            if best.is_none_or(|(_, b, _)| a < b - EPS) {
                best = Some((r, a, src));
            }
        }
    };
    consider(general_items(u1, u2, dims), Source::General);
    if variant == Variant::Restricted {
        consider(restricted_items(u1, u2, dims), Source::Restricted);
    }
    if best.is_none() && u1.abs() < EPS && u2.abs() < EPS {
        let d = dims.d() as f64;
        best = Some((Region::II, d - 0.5, Source::Corner));
    }
    Ok(match best {
        Some((region, a, source)) => RegionVerdict { region, threshold: Some(a), variant, source },
        None => RegionVerdict { region: Region::NotCovered, threshold: None, variant, source: Source::None },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRow {
    pub inv_p1: f64,
    pub inv_p2: f64,
    pub verdict: RegionVerdict,
}

/// Verdicts on the lattice `(i/n, j/n)`, `0 <= i, j <= n`, row-major in `i`.
pub fn threshold_table(dims: Dims, variant: Variant, resolution: usize) -> Result<Vec<ThresholdRow>> {
    if resolution < 2 {
        return Err(param("resolution", format!("must be at least 2, got {resolution}")));
    }
    let n = resolution as f64;
    let mut rows = Vec::with_capacity((resolution + 1) * (resolution + 1));
    for i in 0..=resolution {
        for j in 0..=resolution {
            let (u1, u2) = (i as f64 / n, j as f64 / n);
            rows.push(ThresholdRow { inv_p1: u1, inv_p2: u2, verdict: threshold_inv(u1, u2, dims, variant)? });
        }
    }
    Ok(rows)
}

pub const TABLE_HEADER: &str = "inv_p1,inv_p2,region,alpha,variant,source";

pub fn table_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for r in rows {
        let a = r.verdict.threshold.map_or_else(|| "none".to_string(), |a| format!("{a}"));
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.inv_p1, r.inv_p2, r.verdict.region, a, r.verdict.variant, r.verdict.source
        ));
    }
    s
}
