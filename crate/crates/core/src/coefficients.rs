//! Time-dependent master-equation coefficients built from the kernels.

use std::f64::consts::PI;
use std::io::Write;

use thiserror::Error;

use crate::grid::{GridError, TimeGrid};
use crate::kernels::KernelTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error(
        "time grid too coarse: step {step} covers {radians:.4} rad of omega0 (limit pi/5); use dt <= {required:.6}"
    )]
    TooCoarse {
        step: f64,
        radians: f64,
        required: f64,
    },
    #[error("omega0 must be positive and finite, found {0}")]
    BadOmega(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Largest phase advance of `ω₀` allowed per grid step.
pub const MAX_PHASE_PER_STEP: f64 = PI / 5.0;

/// `Δ̄, Π, r, γ, Γ` sampled on one grid. All vanish at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub grid: TimeGrid,
    pub delta_bar: Vec<f64>,
    pub pi: Vec<f64>,
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
    pub big_gamma: Vec<f64>,
    pub omega0: f64,
}

/// Coefficient values at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoefficientSample {
    pub delta_bar: f64,
    pub pi: f64,
    pub r: f64,
    pub gamma: f64,
}

impl CoefficientTable {
    pub fn zeros(grid: TimeGrid, omega0: f64) -> Self {
        let n = grid.len();
        CoefficientTable {
            grid,
            delta_bar: vec![0.0; n],
            pi: vec![0.0; n],
            r: vec![0.0; n],
            gamma: vec![0.0; n],
            big_gamma: vec![0.0; n],
            omega0,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn sample(&self, k: usize) -> CoefficientSample {
        CoefficientSample {
            delta_bar: self.delta_bar[k],
            pi: self.pi[k],
            r: self.r[k],
            gamma: self.gamma[k],
        }
    }

    /// Linear interpolation between nodes.
    pub fn at(&self, t: f64) -> Result<CoefficientSample, GridError> {
        let (k, th) = self.grid.locate(t)?;
        let a = self.sample(k);
        if th == 0.0 {
            return Ok(a);
        }
        let b = self.sample(k + 1);
        let lerp = |x: f64, y: f64| x + th * (y - x);
        Ok(CoefficientSample {
            delta_bar: lerp(a.delta_bar, b.delta_bar),
            pi: lerp(a.pi, b.pi),
            r: lerp(a.r, b.r),
            gamma: lerp(a.gamma, b.gamma),
        })
    }

    /// Samples at interval midpoints, cubic-interpolated from the nodes.
    /// Shared by every RK4 integrator so all of them see one coefficient path.
    pub fn midpoints(&self) -> Vec<CoefficientSample> {
        let g = &self.grid;
        let (d, p, r, y) = (
            g.midpoint_values(&self.delta_bar),
            g.midpoint_values(&self.pi),
            g.midpoint_values(&self.r),
            g.midpoint_values(&self.gamma),
        );
        (0..d.len())
            .map(|k| CoefficientSample {
                delta_bar: d[k],
                pi: p[k],
                r: r[k],
                gamma: y[k],
            })
            .collect()
    }

    /// `dγ/dt` by second-order finite differences on the grid.
    pub fn gamma_dot(&self) -> Vec<f64> {
        self.grid.derivative(&self.gamma)
    }

    /// Whether `Γ` is non-decreasing on the grid, checked only when `γ ≥ 0`
    /// everywhere. `None` means the premise does not hold.
    pub fn big_gamma_monotone(&self) -> Option<bool> {
        if self.gamma.iter().any(|&g| g < 0.0) {
            return None;
        }
        Some(self.big_gamma.windows(2).all(|w| w[1] >= w[0]))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# columns: t, delta_bar, pi, r, gamma, big_gamma (time in 1/omega0)"
        )?;
        writeln!(out, "t,delta_bar,pi,r,gamma,big_gamma")?;
        for (k, t) in self.grid.times().iter().enumerate() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                t, self.delta_bar[k], self.pi[k], self.r[k], self.gamma[k], self.big_gamma[k]
            )?;
        }
        Ok(())
    }
}

/// Cumulative cosine/sine transforms of the kernels against `ω₀τ`.
pub fn compute_coefficients(
    kernels: &KernelTable,
    omega0: f64,
) -> Result<CoefficientTable, CoefficientError> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(CoefficientError::BadOmega(omega0));
    }
    let grid = &kernels.grid;
    let step = grid.max_step();
    if omega0 * step > MAX_PHASE_PER_STEP {
        return Err(CoefficientError::TooCoarse {
            step,
            radians: omega0 * step,
            required: MAX_PHASE_PER_STEP / omega0,
        });
    }
    let (cos, sin): (Vec<f64>, Vec<f64>) = grid
        .times()
        .iter()
        .map(|&t| {
            let (s, c) = (omega0 * t).sin_cos();
            (c, s)
        })
        .unzip();
    let product = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };

    let delta_bar = grid.cumulative_trapezoid(&product(&kernels.kappa, &cos));
    let pi = grid.cumulative_trapezoid(&product(&kernels.kappa, &sin));
    let r: Vec<f64> = grid
        .cumulative_trapezoid(&product(&kernels.mu, &cos))
        .into_iter()
        .map(|v| 2.0 * v)
        .collect();
    let gamma = grid.cumulative_trapezoid(&product(&kernels.mu, &sin));
    let big_gamma: Vec<f64> = grid
        .cumulative_trapezoid(&gamma)
        .into_iter()
        .map(|v| 2.0 * v)
        .collect();

    Ok(CoefficientTable {
        grid: grid.clone(),
        delta_bar,
        pi,
        r,
        gamma,
        big_gamma,
        omega0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{markovian_asymptotes, tabulate_kernels, ReservoirSpec};

    fn table(alpha: f64, dt: f64, t_max: f64) -> CoefficientTable {
        let spec = ReservoirSpec::ohmic_exp(alpha, 5.0, 0.0).unwrap();
        let grid = TimeGrid::uniform(dt, t_max).unwrap();
        compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn zero_kernels_give_zero_table() {
        let grid = TimeGrid::uniform(0.1, 2.0).unwrap();
        let c = compute_coefficients(&KernelTable::zeros(grid.clone()), 1.0).unwrap();
        assert_eq!(c, CoefficientTable::zeros(grid, 1.0));
    }

    #[test]
    fn first_row_is_zero() {
        let c = table(0.1, 0.01, 1.0);
        let s = c.sample(0);
        assert_eq!((s.delta_bar, s.pi, s.r, s.gamma, c.big_gamma[0]), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn gamma_approaches_resonance_value() {
        let c = table(0.1, 0.01, 50.0);
        let g = *c.gamma.last().unwrap();
        assert!((g - 0.012862).abs() < 1e-4, "{g}");
        let a = markovian_asymptotes(&ReservoirSpec::ohmic_exp(0.1, 5.0, 0.0).unwrap(), 1.0).unwrap();
        assert!((g - a.gamma_inf).abs() < 1e-4);
        assert!((c.delta_bar.last().unwrap() - a.delta_bar_inf).abs() < 1e-4);
        assert!((c.r.last().unwrap() - a.r_inf).abs() < 1e-4);
    }

    #[test]
    fn big_gamma_derivative_is_twice_gamma() {
        let c = table(0.1, 0.01, 10.0);
        let d = c.grid.derivative(&c.big_gamma);
        // centered difference of a trapezoid integral: error h²·γ''/2, |γ''| < 3 here
        let tol = 1.5 * c.grid.max_step().powi(2);
        for k in 1..c.len() - 1 {
            assert!((d[k] - 2.0 * c.gamma[k]).abs() < tol, "node {k}");
        }
    }

    #[test]
    fn coarse_grid_is_refused() {
        let grid = TimeGrid::uniform(0.7, 7.0).unwrap();
        let err = compute_coefficients(&KernelTable::zeros(grid), 1.0).unwrap_err();
        assert!(matches!(err, CoefficientError::TooCoarse { .. }));
        assert!(err.to_string().contains("dt <="));
    }

    #[test]
    fn step_halving_converges_at_second_order() {
        let coarse = table(0.1, 0.02, 5.0);
        let mid = table(0.1, 0.01, 5.0);
        let fine = table(0.1, 0.005, 5.0);
        let e1 = (coarse.delta_bar.last().unwrap() - mid.delta_bar.last().unwrap()).abs();
        let e2 = (mid.delta_bar.last().unwrap() - fine.delta_bar.last().unwrap()).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn big_gamma_is_monotone_for_vacuum_ohmic() {
        let c = table(0.1, 0.01, 20.0);
        assert_ne!(c.big_gamma_monotone(), Some(false));
    }
}
