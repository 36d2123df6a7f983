//! Damped harmonic oscillator under a non-Markovian weak-coupling master
//! equation, solved through its quantum characteristic function and
//! cross-checked against a truncated Fock-space integration.
//!
//! Units: `ħ = k_B = 1`; times in `1/ω₀`. Quadratures are
//! `X = (a + a†)/√2`, `P = (a − a†)/(i√2)`.

pub mod cli;
pub mod coefficients;
mod error;
pub mod grid;
pub mod homogeneous;
pub mod kernels;
pub mod mat2;
pub mod oracle;
pub mod propagator;
pub mod qcf;

pub use error::{Error, EXIT_IO, EXIT_NUMERICAL, EXIT_VALIDATION};
