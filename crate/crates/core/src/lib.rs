//! Multipole quantum noise: pseudo-Hilbert one-particle spaces, their Fock
//! representations, Wick correlations and weak-coupling coefficients.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dispersion;
pub mod draws;
pub mod error;
pub mod fock;
pub mod gamma;
mod poly;
pub mod quad;
pub mod schwartz;
pub mod suites;
pub mod wick;

pub use asymptotics::{ExpansionPoint, Grading, RateComparison, RateReport};
pub use dispersion::{Dimension, Dispersion, DispersionKind};
pub use error::{Error, Result};
pub use fock::{FockSpace, FockVector, MultiSectorState, Sector, Sign};
pub use gamma::{GammaRow, GammaTable, SupportReport};
pub use num_complex::Complex64 as C64;
pub use schwartz::{Atom, TestFunction};
pub use wick::{Channel, ChannelParams, Letter, Matching, NoiseChannel, ReservoirChannel};

/// Float formatting used in every CSV output: 17 significant digits, which
/// round-trips any `f64`. Negative zero prints as zero.
pub fn fmt_sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}
