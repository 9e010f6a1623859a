//! Spectral calculus for the Grushin operator `L = -Δ_{x'} - |x'|² Δ_{x''}` on
//! `R^{d1} x R^{d2}`, bilinear Bochner-Riesz means built on it, and numerical
//! probes for the weighted estimates that govern their boundedness.
//!
//! The canonical computable input is a [`SpectralField`]: finitely many scaled
//! Hermite modes on a discrete, punctured λ-lattice. Everything else
//! (synthesis, multipliers, bilinear operators, kernels, norms) is a pure
//! function of such fields and a [`Grid`].

pub mod bump;
pub mod config;
pub mod dims;
pub mod error;
pub mod family;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod hermite;
pub mod io;
pub mod multiplier;
pub mod probe;
pub mod quad;
pub mod reduce;
pub mod riesz;
pub mod suite;
pub mod symbol;
pub mod thresholds;
pub mod verify;

pub use dims::Dims;
pub use error::{Error, Result};
pub use field::{GriddedField, SpectralField};
pub use grid::{Grid, GridSpec};
pub use symbol::{Symbol1D, Symbol2D};
pub use num_complex::Complex64;


