//! Seeded test-function families.
//!
//! * `hermite-bump`: all modes of degree `<= degree` on the λ-nodes with
//!   `|λ|` in one dyadic band `[lo, 2lo]`. Each mode gets a random complex
//!   amplitude, a random x''-offset `τ_μ`, and a smooth envelope in `|λ|`
//!   vanishing at the band edges: `C(λ, μ) = a_μ b((|λ|-lo)/lo) e^{-iλ·τ_μ}`.
//! * `two-scale`: a `hermite-bump` field in `[lo, 2lo]` plus an independent
//!   one in `[lo/8, lo/4]`. The low band has x'-profiles eight times wider,
//!   so volumes are probed both where `r` and where `|x'|` dominates.
//! * [`random_field`]: i.i.d. coefficients on a given support (round trips).

use crate::error::{param, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    HermiteBump,
    TwoScale,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "hermite-bump" => Ok(FamilyKind::HermiteBump),
            "two-scale" => Ok(FamilyKind::TwoScale),
            other => Err(param("family", format!("unknown family {other:?}; known: hermite-bump, two-scale"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::HermiteBump => "hermite-bump",
            FamilyKind::TwoScale => "two-scale",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub seed: u64,
    /// Lower edge of the (upper) λ-band.
    pub band_lo: f64,
    pub degree: usize,
    /// Half-width of the box the x''-offsets are drawn from.
    pub offset: f64,
}

impl FamilySpec {
    pub fn hermite_bump(seed: u64, band_lo: f64) -> Self {
        FamilySpec { kind: FamilyKind::HermiteBump, seed, band_lo, degree: 4, offset: 20.0 }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        match self.kind {
            FamilyKind::HermiteBump => hermite_bump(grid, self.band_lo, self.degree, self.seed, self.offset),
            FamilyKind::TwoScale => {
                let hi = hermite_bump(grid, self.band_lo, self.degree, self.seed, self.offset)?;
                let lo = hermite_bump(grid, self.band_lo / 8.0, self.degree, self.seed.wrapping_add(0x9e37_79b9), self.offset)?;
                hi.sum(&lo)
            }
        }
    }
}

/// Smooth envelope on `(0, 1)` with peak 1 at `1/2`.
pub fn envelope(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (t * (1.0 - t))).exp()
    }
}

fn complex_amplitude(rng: &mut ChaCha8Rng) -> Complex64 {
    let r: f64 = rng.gen_range(0.5..1.5);
    let th: f64 = rng.gen_range(0.0..2.0 * PI);
    Complex64::from_polar(r, th)
}

pub fn hermite_bump(grid: &Grid, band_lo: f64, degree: usize, seed: u64, offset: f64) -> Result<SpectralField> {
    if !(band_lo > 0.0) {
        return Err(param("band_lo", "must be positive"));
    }
    let support = grid.lambda_band(band_lo, 2.0 * band_lo);
    if support.is_empty() {
        return Err(param("band_lo", format!("no λ-node of the grid lies in [{band_lo}, {}]", 2.0 * band_lo)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = SpectralField::zeros(grid, vec![], degree)?;
    let modes = probe.modes();
    let d2 = grid.dims.d2;
    // one amplitude per (mode, sign pattern of λ), one offset per mode
    let patterns = 1usize << d2;
    let mut amp = vec![Complex64::new(0.0, 0.0); modes.len() * patterns];
    let mut tau = vec![0.0; modes.len() * d2];
    for m in 0..modes.len() {
        for p in 0..patterns {
            amp[m * patterns + p] = complex_amplitude(&mut rng);
        }
        for a in 0..d2 {
            tau[m * d2 + a] = rng.gen_range(-offset..=offset);
        }
    }
    let modes_ref = &modes;
    SpectralField::from_fn(grid, support, degree, |n, mu| {
        let m = modes_ref.iter().position(|x| x == mu).unwrap();
        let pattern = n.iter().enumerate().fold(0usize, |acc, (a, &k)| acc | (usize::from(k < 0) << a));
        let lam = grid.lambda_vec(n);
        let abs = grid.lambda_abs(n);
        let phase: f64 = lam.iter().enumerate().map(|(a, l)| -l * tau[m * d2 + a]).sum();
        amp[m * patterns + pattern] * envelope((abs - band_lo) / band_lo) * Complex64::from_polar(1.0, phase)
    })
}

/// Independent uniform-disk coefficients on `support` for `|μ| <= degree`.
pub fn random_field(grid: &Grid, support: Vec<Vec<i64>>, degree: usize, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, support, degree)?;
    for c in f.coeffs.iter_mut() {
        *c = complex_amplitude(&mut rng);
    }
    Ok(f)
}
