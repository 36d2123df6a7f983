//! Gaussian part of the evolution: `M`, `W`, `W̄`, the RWA scalar `Δ_Γ`,
//! and the `(Δ_Γ, Λ, Θ)` decomposition of `W̄`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::coefficients::{compute_coefficients, CoefficientError, CoefficientTable};
use crate::grid::{GridError, TimeGrid};
use crate::homogeneous::{
    approx_rotation, build_rotation, rotation_inverse, solve_fundamental, HomogeneousError,
};
use crate::kernels::{tabulate_kernels, KernelError, ReservoirSpec};
use crate::mat2::Mat2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("matrix is not symmetric: asymmetry {0:.3e} exceeds 1e-12")]
    Asymmetric(f64),
    #[error("evolution matrix is singular at t = {0}")]
    Singular(f64),
    #[error("unknown mode `{0}` (expected full, norenorm or rwa)")]
    UnknownMode(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Coefficients(#[from] CoefficientError),
    #[error(transparent)]
    Homogeneous(#[from] HomogeneousError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Exact `R` and the full congruence for `W̄`.
    Full,
    /// Pure rotation for `R`; `W̄` keeps the `2ω₀` terms.
    NoRenorm,
    /// Pure rotation for `R`; `W̄ = (Δ_Γ/2) I`.
    Rwa,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Full, Mode::NoRenorm, Mode::Rwa];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::NoRenorm => "norenorm",
            Mode::Rwa => "rwa",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = PropagatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "norenorm" => Ok(Mode::NoRenorm),
            "rwa" => Ok(Mode::Rwa),
            other => Err(PropagatorError::UnknownMode(other.to_string())),
        }
    }
}

/// Everything needed to evaluate `χ_t` at the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorBundle {
    pub grid: TimeGrid,
    pub mode: Mode,
    pub omega0: f64,
    pub big_gamma: Vec<f64>,
    pub r: Vec<Mat2>,
    pub r_inv: Vec<Mat2>,
    pub w_bar: Vec<Mat2>,
    /// RWA scalar `e^{−Γ}∫e^{Γ}Δ̄`, whatever the mode.
    pub delta_gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
}

impl PropagatorBundle {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Smallest eigenvalue of `W̄` over the grid.
    pub fn min_w_bar_eigenvalue(&self) -> f64 {
        self.w_bar
            .iter()
            .map(|w| w.sym_eigenvalues()[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# mode {}; columns: t, big_gamma, R11, R12, R21, R22, W11, W12, W22 (of W-bar), delta_gamma, lambda, theta",
            self.mode
        )?;
        writeln!(out, "t,big_gamma,R11,R12,R21,R22,W11,W12,W22,delta_gamma,lambda,theta")?;
        for (k, t) in self.grid.times().iter().enumerate() {
            let (r, w) = (&self.r[k], &self.w_bar[k]);
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                t,
                self.big_gamma[k],
                r.get(0, 0),
                r.get(0, 1),
                r.get(1, 0),
                r.get(1, 1),
                w.get(0, 0),
                w.get(0, 1),
                w.get(1, 1),
                self.delta_gamma[k],
                self.lambda[k],
                self.theta[k]
            )?;
        }
        Ok(())
    }
}

/// `M = [[Δ̄, −Π/2], [−Π/2, 0]]` at node `k`.
pub fn m_matrix(coeffs: &CoefficientTable, k: usize) -> Mat2 {
    Mat2::symmetric(coeffs.delta_bar[k], -0.5 * coeffs.pi[k], 0.0)
}

fn symmetrized(m: Mat2) -> Mat2 {
    let off = 0.5 * (m.get(0, 1) + m.get(1, 0));
    Mat2::symmetric(m.get(0, 0), off, m.get(1, 1))
}

/// `W(t) = ∫_0^t e^{Γ} Rᵗ M R dt₁` by cumulative trapezoid.
pub fn w_matrix(coeffs: &CoefficientTable, rotations: &[Mat2]) -> Result<Vec<Mat2>, PropagatorError> {
    coeffs.grid.check_len(rotations.len())?;
    let integrand: Vec<Mat2> = (0..coeffs.len())
        .map(|k| symmetrized(rotations[k].congruence(&m_matrix(coeffs, k)).scale(coeffs.big_gamma[k].exp())))
        .collect();
    let component = |i: usize, j: usize| {
        let f: Vec<f64> = integrand.iter().map(|m| m.get(i, j)).collect();
        coeffs.grid.cumulative_trapezoid(&f)
    };
    let (a, b, d) = (component(0, 0), component(0, 1), component(1, 1));
    Ok((0..coeffs.len()).map(|k| Mat2::symmetric(a[k], b[k], d[k])).collect())
}

/// `W̄ = e^{−Γ} R⁻ᵗ W R⁻¹` node by node.
pub fn w_bar_matrix(
    w: &[Mat2],
    rotations: &[Mat2],
    big_gamma: &[f64],
) -> Result<Vec<Mat2>, PropagatorError> {
    if w.len() != rotations.len() || w.len() != big_gamma.len() {
        return Err(GridError::LengthMismatch {
            expected: w.len(),
            found: rotations.len().min(big_gamma.len()),
        }
        .into());
    }
    w.iter()
        .zip(rotations)
        .zip(big_gamma)
        .map(|((w, r), g)| {
            if r.det().abs() < 1e-12 {
                return Err(PropagatorError::Singular(*g));
            }
            Ok(symmetrized(rotation_inverse(r).congruence(w).scale((-g).exp())))
        })
        .collect()
}

/// `W̄` with `R` replaced by the pure rotation at `ω₀`. Equal to
/// `e^{−Γ}∫e^{Γ}[Δ̄/2 + (Δ̄/2)C₂(t−t₁) − (Π/2)S₂(t−t₁)]dt₁`.
pub fn w_bar_no_renorm(coeffs: &CoefficientTable, omega0: f64) -> Result<Vec<Mat2>, PropagatorError> {
    let rot = approx_rotation(omega0, &coeffs.grid);
    let w = w_matrix(coeffs, &rot)?;
    w_bar_matrix(&w, &rot, &coeffs.big_gamma)
}

/// `Δ_Γ(t) = e^{−Γ(t)}∫_0^t e^{Γ(t₁)}Δ̄(t₁)dt₁`, so that RWA `W̄ = (Δ_Γ/2) I`.
pub fn delta_gamma(coeffs: &CoefficientTable) -> Vec<f64> {
    let f: Vec<f64> = (0..coeffs.len())
        .map(|k| coeffs.big_gamma[k].exp() * coeffs.delta_bar[k])
        .collect();
    coeffs
        .grid
        .cumulative_trapezoid(&f)
        .into_iter()
        .zip(&coeffs.big_gamma)
        .map(|(v, g)| (-g).exp() * v)
        .collect()
}

/// `(tr W̄, tr σ_z W̄, tr σ_x W̄)`.
pub fn lambda_theta(w_bar: &Mat2) -> Result<(f64, f64, f64), PropagatorError> {
    let asym = w_bar.asymmetry();
    if asym > 1e-12 {
        return Err(PropagatorError::Asymmetric(asym));
    }
    let (a, b, d) = (w_bar.get(0, 0), w_bar.get(0, 1), w_bar.get(1, 1));
    Ok((a + d, a - d, 2.0 * b))
}

/// Assembles the bundle for `mode` from a coefficient table.
pub fn propagator_from_coefficients(
    coeffs: &CoefficientTable,
    mode: Mode,
) -> Result<PropagatorBundle, PropagatorError> {
    let omega0 = coeffs.omega0;
    let dg = delta_gamma(coeffs);
    let (r, w_bar) = match mode {
        Mode::Full => {
            let r = build_rotation(&solve_fundamental(coeffs)?, coeffs)?;
            let w = w_matrix(coeffs, &r)?;
            let w_bar = w_bar_matrix(&w, &r, &coeffs.big_gamma)?;
            (r, w_bar)
        }
        Mode::NoRenorm => (
            approx_rotation(omega0, &coeffs.grid),
            w_bar_no_renorm(coeffs, omega0)?,
        ),
        Mode::Rwa => (
            approx_rotation(omega0, &coeffs.grid),
            dg.iter().map(|d| Mat2::scaled_identity(0.5 * d)).collect(),
        ),
    };
    let r_inv = r.iter().map(rotation_inverse).collect();
    let (mut lambda, mut theta) = (Vec::with_capacity(dg.len()), Vec::with_capacity(dg.len()));
    for w in &w_bar {
        let (_, l, t) = lambda_theta(w)?;
        lambda.push(l);
        theta.push(t);
    }
    Ok(PropagatorBundle {
        grid: coeffs.grid.clone(),
        mode,
        omega0,
        big_gamma: coeffs.big_gamma.clone(),
        r,
        r_inv,
        w_bar,
        delta_gamma: dg,
        lambda,
        theta,
    })
}

/// Kernels, coefficients and the bundle for one reservoir and grid.
pub fn build_propagator(
    spec: &ReservoirSpec,
    grid: &TimeGrid,
    omega0: f64,
    mode: Mode,
) -> Result<(CoefficientTable, PropagatorBundle), PropagatorError> {
    let coeffs = compute_coefficients(&tabulate_kernels(spec, grid)?, omega0)?;
    let bundle = propagator_from_coefficients(&coeffs, mode)?;
    Ok((coeffs, bundle))
}
