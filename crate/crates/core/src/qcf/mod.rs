//! Quantum characteristic functions `χ(z) = tr{e^{i(pX−xP)}ρ}`, `z = (x, p)`:
//! initial states, evolution under a [`PropagatorBundle`], and observables.

mod state;
mod wigner;

pub use state::{GaussianMoments, InitialState, StateKind, TabulatedChi};
pub use wigner::{wigner, PhaseGrid, WignerField, WignerOptions};

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::mat2::Mat2;
use crate::propagator::{Mode, PropagatorBundle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcfError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("z = ({x}, {p}) lies outside the tabulated characteristic function")]
    OutOfRange { x: f64, p: f64 },
    #[error("{quantity} has imaginary residue {residue:.3e}; the phase-space sign convention is inconsistent")]
    ConventionMismatch { quantity: &'static str, residue: f64 },
    #[error("characteristic function has not decayed below 1e-12 within extent {extent}; use at least {suggested:.3}")]
    DomainTooSmall { extent: f64, suggested: f64 },
    #[error("z grid spacing {spacing:.3e} cannot resolve phase-space points out to {reach:.3}; use at least {suggested} z points")]
    TooCoarse {
        spacing: f64,
        reach: f64,
        suggested: usize,
    },
    #[error("Wigner function has imaginary part {0:.3e} above 1e-8")]
    ComplexWigner(f64),
    #[error("time index {index} out of range for a grid of {len} nodes")]
    BadIndex { index: usize, len: usize },
    #[error("characteristic function table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

fn check_index(bundle: &PropagatorBundle, k: usize) -> Result<(), QcfError> {
    if k >= bundle.len() {
        return Err(QcfError::BadIndex {
            index: k,
            len: bundle.len(),
        });
    }
    Ok(())
}

/// `χ₀(z)` of the initial state.
pub fn chi0_eval(state: &InitialState, z: [f64; 2]) -> Result<Complex64, QcfError> {
    state.chi(z)
}

/// `χ_t(z) = e^{−zᵗW̄z} χ₀(e^{−Γ/2} R⁻¹ z)` at node `k`.
pub fn evolve_chi(
    bundle: &PropagatorBundle,
    state: &InitialState,
    z: [f64; 2],
    k: usize,
) -> Result<Complex64, QcfError> {
    check_index(bundle, k)?;
    let damp = (-0.5 * bundle.big_gamma[k]).exp();
    let [a, b] = bundle.r_inv[k].apply(z);
    let gauss = (-bundle.w_bar[k].quad_form(z)).exp();
    Ok(state.chi([damp * a, damp * b])? * gauss)
}

/// Closed-form evolution of a Gaussian `χ`.
pub fn gaussian_evolve(bundle: &PropagatorBundle, g: &GaussianMoments, k: usize) -> GaussianMoments {
    let r_inv = &bundle.r_inv[k];
    let g_k = bundle.big_gamma[k];
    let c = bundle.w_bar[k].scale(2.0) + r_inv.congruence(&g.c).scale((-g_k).exp());
    let b = r_inv.transpose().apply(g.b);
    let damp = (-0.5 * g_k).exp();
    GaussianMoments::new([damp * b[0], damp * b[1]], symmetrized(c))
}

fn symmetrized(m: Mat2) -> Mat2 {
    let off = 0.5 * (m.get(0, 1) + m.get(1, 0));
    Mat2::symmetric(m.get(0, 0), off, m.get(1, 1))
}

/// First and second moments of `X`, `P`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentRow {
    pub mean_x: f64,
    pub mean_p: f64,
    pub xx: f64,
    pub pp: f64,
    /// `⟨XP + PX⟩`
    pub xp_sym: f64,
}

impl MomentRow {
    /// `⟨H₀⟩` with `H₀ = (ω₀/2)(X² + P²)`.
    pub fn energy(&self, omega0: f64) -> f64 {
        0.5 * omega0 * (self.xx + self.pp)
    }
}

/// Moments of a Gaussian `χ = exp(i bᵗz − ½ zᵗCz)`.
pub fn gaussian_moment_map(g: &GaussianMoments) -> MomentRow {
    let [bx, bp] = g.b;
    MomentRow {
        mean_x: bp,
        mean_p: -bx,
        xx: g.c.get(1, 1) + bp * bp,
        pp: g.c.get(0, 0) + bx * bx,
        xp_sym: -2.0 * g.c.get(0, 1) - 2.0 * bx * bp,
    }
}

/// Step for first derivatives of `χ`.
pub const FD_STEP_FIRST: f64 = 1e-4;
/// Step for second derivatives; smaller steps lose digits to cancellation.
pub const FD_STEP_SECOND: f64 = 2e-3;
const RESIDUE_TOL: f64 = 1e-9;

/// Moments from fourth-order central differences of `chi` at the origin.
pub fn chi_moments<F>(chi: F) -> Result<MomentRow, QcfError>
where
    F: Fn([f64; 2]) -> Result<Complex64, QcfError>,
{
    let i = Complex64::i();
    const C1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const C2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let along = |axis: usize, coef: &[f64; 5], h: f64| -> Result<Complex64, QcfError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, o) in coef.iter().zip(offsets) {
            if *c == 0.0 {
                continue;
            }
            let mut z = [0.0; 2];
            z[axis] = o * h;
            acc += *c * chi(z)?;
        }
        Ok(acc)
    };
    let h1 = FD_STEP_FIRST;
    let h2 = FD_STEP_SECOND;
    let dx = along(0, &C1, h1)? / (12.0 * h1);
    let dp = along(1, &C1, h1)? / (12.0 * h1);
    let dxx = along(0, &C2, h2)? / (12.0 * h2 * h2);
    let dpp = along(1, &C2, h2)? / (12.0 * h2 * h2);
    let mut dxp = Complex64::new(0.0, 0.0);
    for (a, oa) in C1.iter().zip(offsets) {
        for (b, ob) in C1.iter().zip(offsets) {
            if *a == 0.0 || *b == 0.0 {
                continue;
            }
            dxp += a * b * chi([oa * h2, ob * h2])?;
        }
    }
    dxp /= 144.0 * h2 * h2;

    let real = |quantity: &'static str, v: Complex64| {
        if v.im.abs() > RESIDUE_TOL {
            return Err(QcfError::ConventionMismatch {
                quantity,
                residue: v.im,
            });
        }
        Ok(v.re)
    };
    Ok(MomentRow {
        mean_x: real("<X>", -i * dp)?,
        mean_p: real("<P>", i * dx)?,
        xx: real("<X^2>", -dpp)?,
        pp: real("<P^2>", -dxx)?,
        xp_sym: real("<XP+PX>", 2.0 * dxp)?,
    })
}

/// Moments of the initial state.
pub fn initial_moments(state: &InitialState) -> Result<MomentRow, QcfError> {
    match state.gaussian() {
        Some(g) => Ok(gaussian_moment_map(g)),
        None => chi_moments(|z| state.chi(z)),
    }
}

/// Moments at node `k`: closed form for Gaussian states, finite differences
/// of `χ_t` otherwise.
pub fn moments(bundle: &PropagatorBundle, state: &InitialState, k: usize) -> Result<MomentRow, QcfError> {
    check_index(bundle, k)?;
    match state.gaussian() {
        Some(g) => Ok(gaussian_moment_map(&gaussian_evolve(bundle, g, k))),
        None => chi_moments(|z| evolve_chi(bundle, state, z, k)),
    }
}

/// `⟨H₀⟩_t` and whether it came from the closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub closed_form: bool,
}

/// `e^{−Γ}⟨H₀⟩₀ + ω₀ Δ_Γ` (RWA) or `+ ω₀ tr W̄` (NoRenorm). Full mode has no
/// closed form and returns the moment-based energy.
pub fn mean_energy(bundle: &PropagatorBundle, state: &InitialState, k: usize) -> Result<Energy, QcfError> {
    check_index(bundle, k)?;
    let w0 = bundle.omega0;
    let e0 = initial_moments(state)?.energy(w0);
    let decay = (-bundle.big_gamma[k]).exp() * e0;
    match bundle.mode {
        Mode::Rwa => Ok(Energy {
            value: decay + w0 * bundle.delta_gamma[k],
            closed_form: true,
        }),
        Mode::NoRenorm => Ok(Energy {
            value: decay + w0 * bundle.w_bar[k].trace(),
            closed_form: true,
        }),
        Mode::Full => Ok(Energy {
            value: moments(bundle, state, k)?.energy(w0),
            closed_form: false,
        }),
    }
}

/// Differences between NoRenorm and RWA second moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentGaps {
    pub dxx: f64,
    pub dpp: f64,
    pub dcorr: f64,
}

/// `(−Λ, Λ, 2Θ)` at node `k`; zero for an RWA bundle.
pub fn rwa_moment_gaps(bundle: &PropagatorBundle, k: usize) -> Result<MomentGaps, QcfError> {
    check_index(bundle, k)?;
    let (l, th) = (bundle.lambda[k], bundle.theta[k]);
    Ok(MomentGaps {
        dxx: -l,
        dpp: l,
        dcorr: 2.0 * th,
    })
}

/// Observables on the whole grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub rows: Vec<MomentRow>,
    pub energy: Vec<f64>,
    /// `e^{−Γ}⟨H₀⟩₀ + ω₀Δ_Γ`
    pub energy_rwa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
}

pub fn observable_series(bundle: &PropagatorBundle, state: &InitialState) -> Result<ObservableSeries, QcfError> {
    let w0 = bundle.omega0;
    let e0 = initial_moments(state)?.energy(w0);
    let rows: Vec<MomentRow> = (0..bundle.len())
        .into_par_iter()
        .map(|k| moments(bundle, state, k))
        .collect::<Result<_, _>>()?;
    let energy = rows.iter().map(|r| r.energy(w0)).collect();
    let energy_rwa = (0..bundle.len())
        .map(|k| (-bundle.big_gamma[k]).exp() * e0 + w0 * bundle.delta_gamma[k])
        .collect();
    Ok(ObservableSeries {
        mode: bundle.mode,
        times: bundle.grid.times().to_vec(),
        rows,
        energy,
        energy_rwa,
        lambda: bundle.lambda.clone(),
        theta: bundle.theta.clone(),
    })
}

impl ObservableSeries {
    /// Whether `⟨X²⟩ ≥ ⟨X⟩² − 1e−10` and `⟨P²⟩ ≥ ⟨P⟩² − 1e−10` everywhere.
    pub fn variances_nonnegative(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.xx >= r.mean_x * r.mean_x - 1e-10 && r.pp >= r.mean_p * r.mean_p - 1e-10)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# mode {}; columns: t, <X>, <P>, <X^2>, <P^2>, <XP+PX>, energy (from moments), energy_rwa (closed form), lambda, theta",
            self.mode
        )?;
        writeln!(out, "t,mean_x,mean_p,xx,pp,xp_sym,energy,energy_rwa,lambda,theta")?;
        for (k, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.times[k],
                r.mean_x,
                r.mean_p,
                r.xx,
                r.pp,
                r.xp_sym,
                self.energy[k],
                self.energy_rwa[k],
                self.lambda[k],
                self.theta[k]
            )?;
        }
        Ok(())
    }
}
