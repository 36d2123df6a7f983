//! Brute-force reference: the master equation on a truncated Fock space.
//!
//! Operators are `d × d` complex matrices; superoperators are explicit
//! `d² × d²` maps on column-stacked operators (`vec(ρ)[i + j d] = ρ[i, j]`).

mod algebra;
mod band;
mod integrate;
mod superop;
mod weyl;

pub use algebra::{algebra_suite, weyl_residuals, AlgebraCheck, AlgebraReport, EXACT_TOL, WEYL_BLOCK, WEYL_POINT};
pub use integrate::{integrate, rhs, OracleOptions, OracleTrajectory};
pub use superop::{build_superops, generator, SuperKind, SuperMap, SuperOps};
pub use weyl::{chi_from_rho, expm, weyl_operator};

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::propagator::Mode;
use crate::qcf::{InitialState, MomentRow, StateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("truncation dimension {d} is too small (need at least {min})")]
    DimensionTooSmall { d: usize, min: usize },
    #[error(
        "population {leakage:.3e} in the top three Fock levels exceeds {threshold:.1e} at t = {t}; rerun with d >= {suggested_d}"
    )]
    Leakage {
        t: f64,
        leakage: f64,
        threshold: f64,
        suggested_d: usize,
    },
    #[error("Weyl operator at z = ({x}, {p}) is not converged within the truncation (change {estimate:.3e}); |z| is too large for d = {d}")]
    Truncation { x: f64, p: f64, d: usize, estimate: f64 },
    #[error("the oracle cannot prepare a {0} initial state")]
    UnsupportedState(&'static str),
    #[error("operator shape {found:?} does not match dimension {d}")]
    Shape { d: usize, found: (usize, usize) },
    #[error("coefficient grid does not match the integration grid")]
    GridMismatch,
}

/// Generator variants integrated by the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `−iH̄₀ˢ − D_S + γ(N+2)` with the renormalized Hamiltonian.
    Full,
    /// As `Full` with `H₀` in place of `H̄₀`.
    NoRenorm,
    /// `−iH₀ˢ − (Δ̄/2)((Xˢ)² + (Pˢ)²) + γ(N+2)`.
    Rwa,
    /// `−iH̄₀ˢ` alone: no diffusion, no damping term.
    UnitaryOnly,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoRenorm => "norenorm",
            Variant::Rwa => "rwa",
            Variant::UnitaryOnly => "unitary",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<Mode> for Variant {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Full => Variant::Full,
            Mode::NoRenorm => Variant::NoRenorm,
            Mode::Rwa => Variant::Rwa,
        }
    }
}

pub const MIN_DIMENSION: usize = 8;

/// `X = (a + a†)/√2` and `P = (a − a†)/(i√2)` on `d` Fock levels.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperators {
    pub d: usize,
    pub x: Array2<Complex64>,
    pub p: Array2<Complex64>,
}

impl FockOperators {
    pub fn new(d: usize) -> Result<Self, OracleError> {
        if d < MIN_DIMENSION {
            return Err(OracleError::DimensionTooSmall {
                d,
                min: MIN_DIMENSION,
            });
        }
        let mut x = Array2::zeros((d, d));
        let mut p = Array2::zeros((d, d));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for n in 0..d - 1 {
            let a = ((n + 1) as f64).sqrt() * s;
            // a[n, n+1] = √(n+1)
            x[[n, n + 1]] = Complex64::new(a, 0.0);
            x[[n + 1, n]] = Complex64::new(a, 0.0);
            p[[n, n + 1]] = Complex64::new(0.0, -a);
            p[[n + 1, n]] = Complex64::new(0.0, a);
        }
        Ok(FockOperators { d, x, p })
    }

    /// `(ω₀/2)(X² + P²)` built from the truncated `X`, `P`.
    pub fn h0(&self, omega0: f64) -> Array2<Complex64> {
        (self.x.dot(&self.x) + self.p.dot(&self.p)) * Complex64::new(0.5 * omega0, 0.0)
    }

    /// `(ω₀/2)[(1 − r/ω₀)X² + P² + (γ/ω₀)(XP + PX)]`.
    pub fn h0_bar(&self, omega0: f64, r: f64, gamma: f64) -> Array2<Complex64> {
        let xx = self.x.dot(&self.x);
        let pp = self.p.dot(&self.p);
        let xp = self.x.dot(&self.p) + self.p.dot(&self.x);
        let h = |v: f64| Complex64::new(v, 0.0);
        xx * h(0.5 * (omega0 - r)) + pp * h(0.5 * omega0) + xp * h(0.5 * gamma)
    }
}

/// Density matrix on `d` Fock levels.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    pub rho: Array2<Complex64>,
    pub t: f64,
}

impl TruncatedState {
    pub fn d(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.diag().sum()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.d();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.rho[[i, j]] - self.rho[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Population of the top three levels.
    pub fn leakage(&self) -> f64 {
        let d = self.d();
        (d.saturating_sub(3)..d).map(|n| self.rho[[n, n]].re).sum()
    }

    /// `tr(ρ A)`.
    pub fn expect(&self, a: &Array2<Complex64>) -> Complex64 {
        let d = self.d();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += a[[i, j]] * self.rho[[j, i]];
            }
        }
        acc
    }

    /// First and second moments with the truncated operators.
    pub fn moments(&self, ops: &FockOperators) -> MomentRow {
        let xx = ops.x.dot(&ops.x);
        let pp = ops.p.dot(&ops.p);
        let xp = ops.x.dot(&ops.p) + ops.p.dot(&ops.x);
        MomentRow {
            mean_x: self.expect(&ops.x).re,
            mean_p: self.expect(&ops.p).re,
            xx: self.expect(&xx).re,
            pp: self.expect(&pp).re,
            xp_sym: self.expect(&xp).re,
        }
    }

    /// Fock-basis representation of an analytic initial state, normalized
    /// on the `d` retained levels.
    pub fn from_initial(state: &InitialState, d: usize) -> Result<Self, OracleError> {
        if d < MIN_DIMENSION {
            return Err(OracleError::DimensionTooSmall {
                d,
                min: MIN_DIMENSION,
            });
        }
        let mut rho = Array2::zeros((d, d));
        match state.kind() {
            StateKind::Coherent { x0, p0 } => {
                let alpha = Complex64::new(*x0, *p0) * std::f64::consts::FRAC_1_SQRT_2;
                let psi = pure_amplitudes(d, |n, prev| {
                    if n == 0 {
                        Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0)
                    } else {
                        prev * alpha / (n as f64).sqrt()
                    }
                });
                outer(&mut rho, &psi);
            }
            StateKind::Thermal { nbar } => {
                let q = nbar / (nbar + 1.0);
                let mut pn = 1.0 / (nbar + 1.0);
                for n in 0..d {
                    rho[[n, n]] = Complex64::new(pn, 0.0);
                    pn *= q;
                }
            }
            StateKind::SqueezedVacuum { r, phi } => {
                let t = Complex64::from_polar(-r.tanh(), *phi);
                let mut psi = vec![Complex64::new(0.0, 0.0); d];
                let mut c = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
                let mut m = 0usize;
                while 2 * m < d {
                    psi[2 * m] = c;
                    // c_{m+1}/c_m = t √((2m+1)(2m+2)) / (2(m+1))
                    let ratio = (((2 * m + 1) * (2 * m + 2)) as f64).sqrt() / (2.0 * (m + 1) as f64);
                    c *= t * ratio;
                    m += 1;
                }
                outer(&mut rho, &psi);
            }
            StateKind::Fock { n } => {
                let n = *n as usize;
                if n >= d {
                    return Err(OracleError::DimensionTooSmall { d, min: n + 4 });
                }
                rho[[n, n]] = Complex64::new(1.0, 0.0);
            }
            StateKind::TabulatedChi(_) => return Err(OracleError::UnsupportedState("tabulated")),
        }
        let tr = rho.diag().sum().re;
        rho.mapv_inplace(|v| v / tr);
        Ok(TruncatedState { rho, t: 0.0 })
    }
}

fn pure_amplitudes<F: Fn(usize, Complex64) -> Complex64>(d: usize, next: F) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(d);
    let mut prev = Complex64::new(0.0, 0.0);
    for n in 0..d {
        prev = next(n, prev);
        out.push(prev);
    }
    out
}

fn outer(rho: &mut Array2<Complex64>, psi: &[Complex64]) {
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            rho[[i, j]] = a * b.conj();
        }
    }
}

/// Random Hermitian operator supported on levels `0..support`.
pub fn interior_test_operator(d: usize, support: usize, seed: u64) -> Array2<Complex64> {
    let mut s = seed | 1;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut a = Array2::zeros((d, d));
    for i in 0..support.min(d) {
        for j in 0..=i {
            let v = if i == j {
                Complex64::new(next(), 0.0)
            } else {
                Complex64::new(next(), next())
            };
            a[[i, j]] = v;
            a[[j, i]] = v.conj();
        }
    }
    a
}

/// Largest entry modulus.
pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
