//! Multiplier symbols with declared supports, and the named built-ins.

use crate::bump;
use crate::error::{param, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type Eval1 = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type Eval2 = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `F(η)`, zero outside `[support.0, support.1]`.
#[derive(Clone)]
pub struct Symbol1D {
    pub name: String,
    pub support: (f64, f64),
    /// Whether `F` is smooth on the real line (affects Sobolev quadrature only).
    pub smooth: bool,
    eval: Eval1,
}

impl fmt::Debug for Symbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol1D({}, {:?})", self.name, self.support)
    }
}

impl Symbol1D {
    pub fn new(
        name: impl Into<String>,
        support: (f64, f64),
        smooth: bool,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol1D { name: name.into(), support, smooth, eval: Arc::new(f) }
    }

    pub fn real(
        name: impl Into<String>,
        support: (f64, f64),
        smooth: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, support, smooth, move |t| Complex64::new(f(t), 0.0))
    }

    #[inline]
    pub fn eval(&self, eta: f64) -> Complex64 {
        if eta < self.support.0 || eta > self.support.1 {
            ZERO
        } else {
            (self.eval)(eta)
        }
    }

    pub fn zero() -> Self {
        Self::real("zero", (0.0, 0.0), true, |_| 0.0)
    }

    /// `(1 - η/R)_+^α` on `[0, R]`.
    pub fn riesz(alpha: f64, r: f64) -> Self {
        Self::real(format!("riesz({alpha},{r})"), (0.0, r), false, move |t| riesz_profile(1.0 - t / r, alpha))
    }

    /// Indicator of `[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Self {
        Self::real(format!("indicator({a},{b})"), (a, b), false, |_| 1.0)
    }

    /// `e^{-η²/(2σ²)}` on `[0, 8σ]`.
    pub fn gaussian(sigma: f64) -> Self {
        Self::real(format!("gaussian({sigma})"), (0.0, 8.0 * sigma), false, move |t| {
            (-t * t / (2.0 * sigma * sigma)).exp()
        })
    }

    /// Smooth bump `Θ(η / c)` supported in `[c/2, 2c]`.
    pub fn dyadic_bump(c: f64) -> Self {
        Self::real(format!("bump({c})"), (0.5 * c, 2.0 * c), true, move |t| bump::theta(t / c))
    }

    pub fn conj(&self) -> Self {
        let e = self.eval.clone();
        Self::new(format!("conj({})", self.name), self.support, self.smooth, move |t| e(t).conj())
    }

    pub fn mul(&self, other: &Symbol1D) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let sup = (self.support.0.max(other.support.0), self.support.1.min(other.support.1));
        Self::new(format!("{}*{}", self.name, other.name), sup, self.smooth && other.smooth, move |t| a(t) * b(t))
    }

    /// Parses `riesz(α,R)`, `indicator(a,b)`, `gaussian(σ)`, `bump(c)`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        let need = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(param("symbol", format!("{name} takes {n} arguments, got {}", args.len())))
            }
        };
        match name.as_str() {
            "riesz" => {
                need(2)?;
                Ok(Self::riesz(args[0], args[1]))
            }
            "indicator" => {
                need(2)?;
                Ok(Self::indicator(args[0], args[1]))
            }
            "gaussian" => {
                need(1)?;
                Ok(Self::gaussian(args[0]))
            }
            "bump" => {
                need(1)?;
                Ok(Self::dyadic_bump(args[0]))
            }
            _ => Err(param("symbol", format!("unknown 1D symbol {name:?}; known: riesz, indicator, gaussian, bump"))),
        }
    }
}

/// `r_+^α`, with `0^0 = 1` only when `r > 0`.
#[inline]
pub fn riesz_profile(r: f64, alpha: f64) -> f64 {
    if r > 0.0 {
        r.powf(alpha)
    } else {
        0.0
    }
}

/// `G(η₁, η₂)`, zero outside the box. `band`, when set, declares that `G`
/// also vanishes unless `η₁ + η₂` lies in it; evaluators use this to skip
/// pairs.
#[derive(Clone)]
pub struct Symbol2D {
    pub name: String,
    pub support: [(f64, f64); 2],
    pub band: Option<(f64, f64)>,
    eval: Eval2,
}

impl fmt::Debug for Symbol2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol2D({}, {:?}, band {:?})", self.name, self.support, self.band)
    }
}

impl Symbol2D {
    pub fn new(
        name: impl Into<String>,
        support: [(f64, f64); 2],
        band: Option<(f64, f64)>,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol2D { name: name.into(), support, band, eval: Arc::new(f) }
    }

    pub fn real(
        name: impl Into<String>,
        support: [(f64, f64); 2],
        band: Option<(f64, f64)>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, support, band, move |a, b| Complex64::new(f(a, b), 0.0))
    }

    #[inline]
    pub fn in_support(&self, e1: f64, e2: f64) -> bool {
        let [(a1, b1), (a2, b2)] = self.support;
        if e1 < a1 || e1 > b1 || e2 < a2 || e2 > b2 {
            return false;
        }
        match self.band {
            Some((lo, hi)) => {
                let s = e1 + e2;
                s >= lo && s <= hi
            }
            None => true,
        }
    }

    #[inline]
    pub fn eval(&self, e1: f64, e2: f64) -> Complex64 {
        if self.in_support(e1, e2) {
            (self.eval)(e1, e2)
        } else {
            ZERO
        }
    }

    pub fn zero() -> Self {
        Self::real("zero", [(0.0, 0.0), (0.0, 0.0)], None, |_, _| 0.0)
    }

    pub fn constant(c: f64, support: [(f64, f64); 2]) -> Self {
        Self::real(format!("const({c})"), support, None, move |_, _| c)
    }

    /// `F₁(η₁) F₂(η₂)`.
    pub fn separable(f1: &Symbol1D, f2: &Symbol1D) -> Self {
        let (a, b) = (f1.clone(), f2.clone());
        Self::new(format!("{}x{}", f1.name, f2.name), [f1.support, f2.support], None, move |x, y| a.eval(x) * b.eval(y))
    }

    /// `(1 - (η₁ + η₂)/R)_+^α` on `{η_i >= 0, η₁ + η₂ <= R}`.
    pub fn riesz(alpha: f64, r: f64) -> Self {
        Self::real(format!("riesz({alpha},{r})"), [(0.0, r), (0.0, r)], Some((0.0, r)), move |a, b| {
            riesz_profile(1.0 - (a + b) / r, alpha)
        })
    }

    /// `φ_j^α = (1 - η₁ - η₂)_+^α φ(2^j (1 - η₁ - η₂))`.
    pub fn dyadic(j: u32, alpha: f64) -> Self {
        let lo = 1.0 - 2f64.powi(1 - j as i32);
        let hi = 1.0 - 2f64.powi(-1 - j as i32);
        Self::real(format!("dyadic({j},{alpha})"), [(0.0, 1.0), (0.0, 1.0)], Some((lo, hi)), move |a, b| {
            dyadic_value(j, alpha, 1.0 - a - b)
        })
    }

    /// Parses `riesz(α,R)`, `dyadic(j,α)`, and `A*B` for 1D built-ins
    /// `A`, `B` (separable product).
    pub fn parse(s: &str) -> Result<Self> {
        if let Some((a, b)) = s.split_once('*') {
            return Ok(Self::separable(&Symbol1D::parse(a)?, &Symbol1D::parse(b)?));
        }
        let (name, args) = split_call(s)?;
        match (name.as_str(), args.len()) {
            ("riesz", 2) => Ok(Self::riesz(args[0], args[1])),
            ("dyadic", 2) => {
                if args[0] < 0.0 || args[0].fract() != 0.0 {
                    return Err(param("symbol", "dyadic index j must be a nonnegative integer"));
                }
                Ok(Self::dyadic(args[0] as u32, args[1]))
            }
            _ => Err(param(
                "symbol",
                format!("unknown 2D symbol {s:?}; known: riesz(α,R), dyadic(j,α), F1*F2 with 1D built-ins"),
            )),
        }
    }
}

/// `r_+^α φ(2^j r)` as a function of `r = 1 - η₁ - η₂`.
#[inline]
pub fn dyadic_value(j: u32, alpha: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let b = bump::theta(2f64.powi(j as i32) * r);
    if b == 0.0 {
        0.0
    } else {
        r.powf(alpha) * b
    }
}

fn split_call(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| param("symbol", format!("expected name(args), got {s:?}")))?;
    if !s.ends_with(')') {
        return Err(param("symbol", format!("expected name(args), got {s:?}")));
    }
    let name = s[..open].trim().to_string();
    let inner = &s[open + 1..s.len() - 1];
    let args = if inner.trim().is_empty() {
        vec![]
    } else {
        inner
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| param("symbol", format!("bad argument {a:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((name, args))
}
