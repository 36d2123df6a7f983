//! Homogeneous dynamics: the fundamental solutions `c, s` of
//! `ÿ + Ω²(t) y = 0` with `Ω² = ω₀² − ω₀r − γ² − γ̇`, and the evolution
//! matrix `R = [[c, s], [−s_r, c_r]]`.

use std::io::Write;

use thiserror::Error;

use crate::coefficients::CoefficientTable;
use crate::grid::{GridError, TimeGrid};
use crate::mat2::Mat2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomogeneousError {
    #[error(
        "step too large for stability at t = {t}: effective frequency times step is {product:.3} (limit 0.5)"
    )]
    Unstable { t: f64, product: f64 },
    #[error(
        "effective squared frequency turned negative ({omega2:.4e}) at t = {t}; coupling is outside the weak-coupling regime"
    )]
    NegativeFrequency { t: f64, omega2: f64 },
    #[error("substep count must be at least 1")]
    BadSubsteps,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Solutions with `c(0)=1, ċ(0)=0` and `s(0)=0, ṡ(0)=ω₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalSolutions {
    pub grid: TimeGrid,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub c_dot: Vec<f64>,
    pub s_dot: Vec<f64>,
    pub omega0: f64,
}

impl FundamentalSolutions {
    /// `c ṡ − s ċ` at every node; equal to `ω₀` for the exact solution.
    pub fn wronskian(&self) -> Vec<f64> {
        (0..self.c.len())
            .map(|k| self.c[k] * self.s_dot[k] - self.s[k] * self.c_dot[k])
            .collect()
    }

    pub fn max_wronskian_defect(&self) -> f64 {
        self.wronskian()
            .iter()
            .map(|w| (w - self.omega0).abs())
            .fold(0.0, f64::max)
    }
}

/// `Ω²(t)` at the grid nodes, with `γ̇` from centered differences.
pub fn effective_frequency_sq(coeffs: &CoefficientTable) -> Vec<f64> {
    let w0 = coeffs.omega0;
    let gamma_dot = coeffs.gamma_dot();
    (0..coeffs.len())
        .map(|k| w0 * w0 - w0 * coeffs.r[k] - coeffs.gamma[k].powi(2) - gamma_dot[k])
        .collect()
}

pub fn solve_fundamental(coeffs: &CoefficientTable) -> Result<FundamentalSolutions, HomogeneousError> {
    solve_fundamental_substeps(coeffs, 1)
}

/// Classical RK4 with `substeps` steps per grid interval on the equivalent
/// first-order system for the columns of `R`, so `γ̇` is never
/// differentiated numerically. `r` and `γ` between nodes come from cubic
/// interpolation. `Ω²` is only used to screen the step and the regime.
pub fn solve_fundamental_substeps(
    coeffs: &CoefficientTable,
    substeps: usize,
) -> Result<FundamentalSolutions, HomogeneousError> {
    if substeps == 0 {
        return Err(HomogeneousError::BadSubsteps);
    }
    let grid = &coeffs.grid;
    let t = grid.times();
    let omega2 = effective_frequency_sq(coeffs);
    for (k, &w2) in omega2.iter().enumerate() {
        if w2 < 0.0 {
            return Err(HomogeneousError::NegativeFrequency { t: t[k], omega2: w2 });
        }
    }
    for k in 0..t.len().saturating_sub(1) {
        let product = omega2[k].max(omega2[k + 1]).sqrt() * (t[k + 1] - t[k]) / substeps as f64;
        if product > 0.5 {
            return Err(HomogeneousError::Unstable { t: t[k], product });
        }
    }

    let n = t.len();
    let w0 = coeffs.omega0;
    // Columns of R: [c, −s_r] and [s, c_r], each obeying
    // ẋ = ω₀p + γx, ṗ = −(ω₀ − r)x − γp.
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut out = FundamentalSolutions {
        grid: grid.clone(),
        c: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        c_dot: Vec::with_capacity(n),
        s_dot: Vec::with_capacity(n),
        omega0: w0,
    };
    let mut push = |y: &[f64; 4], r: f64, g: f64| {
        let d = rhs(w0, r, g, y);
        out.c.push(y[0]);
        out.c_dot.push(d[0]);
        out.s.push(y[2]);
        out.s_dot.push(d[2]);
    };
    push(&y, coeffs.r[0], coeffs.gamma[0]);
    let axpy = |y: &[f64; 4], a: f64, d: &[f64; 4]| {
        [y[0] + a * d[0], y[1] + a * d[1], y[2] + a * d[2], y[3] + a * d[3]]
    };
    let m = substeps as f64;
    for k in 0..n - 1 {
        let h = (t[k + 1] - t[k]) / m;
        let at = |j: f64| {
            if j == 0.0 {
                (coeffs.r[k], coeffs.gamma[k])
            } else if j == 2.0 * m {
                (coeffs.r[k + 1], coeffs.gamma[k + 1])
            } else {
                let theta = j / (2.0 * m);
                (
                    grid.cubic_in_interval(&coeffs.r, k, theta),
                    grid.cubic_in_interval(&coeffs.gamma, k, theta),
                )
            }
        };
        for j in 0..substeps {
            let j = 2.0 * j as f64;
            let (a, mid, b) = (at(j), at(j + 1.0), at(j + 2.0));
            let k1 = rhs(w0, a.0, a.1, &y);
            let k2 = rhs(w0, mid.0, mid.1, &axpy(&y, 0.5 * h, &k1));
            let k3 = rhs(w0, mid.0, mid.1, &axpy(&y, 0.5 * h, &k2));
            let k4 = rhs(w0, b.0, b.1, &axpy(&y, h, &k3));
            for i in 0..4 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        push(&y, coeffs.r[k + 1], coeffs.gamma[k + 1]);
    }
    Ok(out)
}

fn rhs(w0: f64, r: f64, g: f64, y: &[f64; 4]) -> [f64; 4] {
    [
        w0 * y[1] + g * y[0],
        -(w0 - r) * y[0] - g * y[1],
        w0 * y[3] + g * y[2],
        -(w0 - r) * y[2] - g * y[3],
    ]
}

/// `R(t)` at every node, with `c_r = (ṡ − γs)/ω₀` and `s_r = (γc − ċ)/ω₀`.
pub fn build_rotation(
    fund: &FundamentalSolutions,
    coeffs: &CoefficientTable,
) -> Result<Vec<Mat2>, HomogeneousError> {
    if fund.grid != coeffs.grid {
        return Err(GridError::LengthMismatch {
            expected: coeffs.len(),
            found: fund.grid.len(),
        }
        .into());
    }
    let w0 = fund.omega0;
    Ok((0..fund.c.len())
        .map(|k| {
            let g = coeffs.gamma[k];
            let c_r = (fund.s_dot[k] - g * fund.s[k]) / w0;
            let s_r = (g * fund.c[k] - fund.c_dot[k]) / w0;
            Mat2::new(fund.c[k], fund.s[k], -s_r, c_r)
        })
        .collect())
}

/// Determinant drift beyond which [`rotation_inverse`] renormalizes.
pub const DET_DRIFT_WARN: f64 = 1e-6;

/// `R⁻¹` as the adjugate, divided by `det R` once the determinant drifts.
pub fn rotation_inverse(r: &Mat2) -> Mat2 {
    let det = r.det();
    if (det - 1.0).abs() > DET_DRIFT_WARN {
        log::warn!("det R = {det:.9} drifted from 1; the time grid is likely under-resolved");
        return r.adjugate().scale(1.0 / det);
    }
    r.adjugate()
}

/// Pure rotation `[[cos ω₀t, sin ω₀t], [−sin ω₀t, cos ω₀t]]`.
pub fn approx_rotation(omega0: f64, grid: &TimeGrid) -> Vec<Mat2> {
    grid.times()
        .iter()
        .map(|&t| Mat2::rotation(omega0 * t))
        .collect()
}

pub fn write_rotation_csv<W: Write>(
    grid: &TimeGrid,
    rotations: &[Mat2],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "# columns: t, c, s, sr, cr, det; R = [[c, s], [-sr, cr]]")?;
    writeln!(out, "t,c,s,sr,cr,det")?;
    for (t, r) in grid.times().iter().zip(rotations) {
        writeln!(
            out,
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            t,
            r.get(0, 0),
            r.get(0, 1),
            -r.get(1, 0),
            r.get(1, 1),
            r.det()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::compute_coefficients;
    use crate::kernels::{tabulate_kernels, ReservoirSpec};

    fn ohmic(dt: f64, t_max: f64) -> CoefficientTable {
        let spec = ReservoirSpec::ohmic_exp(0.1, 5.0, 0.0).unwrap();
        let grid = TimeGrid::uniform(dt, t_max).unwrap();
        compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn free_limit_is_cos_sin() {
        let c = CoefficientTable::zeros(TimeGrid::uniform(0.01, 50.0).unwrap(), 1.0);
        let f = solve_fundamental(&c).unwrap();
        for (k, &t) in c.grid.times().iter().enumerate() {
            assert!((f.c[k] - t.cos()).abs() < 1e-8);
            assert!((f.s[k] - t.sin()).abs() < 1e-8);
        }
        let r = build_rotation(&f, &c).unwrap();
        let exact = approx_rotation(1.0, &c.grid);
        for (a, b) in r.iter().zip(&exact) {
            assert!((*a - *b).max_abs() < 1e-8);
        }
    }

    #[test]
    fn initial_conditions_are_exact() {
        let c = ohmic(0.01, 1.0);
        let f = solve_fundamental(&c).unwrap();
        assert_eq!((f.c[0], f.c_dot[0], f.s[0], f.s_dot[0]), (1.0, 0.0, 0.0, 1.0));
        assert_eq!(build_rotation(&f, &c).unwrap()[0], Mat2::IDENTITY);
    }

    #[test]
    fn wronskian_and_determinant_hold() {
        let c = ohmic(0.01, 40.0);
        let f = solve_fundamental(&c).unwrap();
        assert!(f.max_wronskian_defect() < 1e-8);
        let k = c.grid.nearest_index(37.7);
        assert!((f.wronskian()[k] - 1.0).abs() < 1e-8);
        for r in build_rotation(&f, &c).unwrap() {
            assert!((r.det() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn substep_refinement_is_fourth_order() {
        let c = ohmic(0.05, 20.0);
        let runs: Vec<_> = [1, 2, 4]
            .iter()
            .map(|&m| solve_fundamental_substeps(&c, m).unwrap())
            .collect();
        let diff = |a: &FundamentalSolutions, b: &FundamentalSolutions| {
            a.c.iter().zip(&b.c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let ratio = diff(&runs[0], &runs[1]) / diff(&runs[1], &runs[2]);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn approximate_rotation_error_scales_as_alpha_squared() {
        let worst = |alpha: f64| {
            let spec = ReservoirSpec::ohmic_exp(alpha, 5.0, 0.0).unwrap();
            let grid = TimeGrid::uniform(0.01, 10.0).unwrap();
            let c = compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap();
            let r = build_rotation(&solve_fundamental(&c).unwrap(), &c).unwrap();
            let a = approx_rotation(1.0, &c.grid);
            r.iter().zip(&a).map(|(x, y)| (*x - *y).max_abs()).fold(0.0, f64::max)
        };
        let ratio = worst(0.1) / worst(0.05);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
        let quarter = TimeGrid::new(vec![0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let q = approx_rotation(1.0, &quarter)[1];
        assert!((q - Mat2::new(0.0, 1.0, -1.0, 0.0)).max_abs() < 1e-15);
    }

    #[test]
    fn strong_coupling_is_refused() {
        let spec = ReservoirSpec::ohmic_exp(1.5, 5.0, 0.0).unwrap();
        let grid = TimeGrid::uniform(0.01, 5.0).unwrap();
        let c = compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap();
        assert!(matches!(
            solve_fundamental(&c),
            Err(HomogeneousError::NegativeFrequency { .. })
        ));
    }

    #[test]
    fn inverse_renormalizes_drifted_determinant() {
        let r = Mat2::new(1.0, 0.0, 0.0, 1.01);
        let inv = rotation_inverse(&r);
        assert!(((r * inv) - Mat2::IDENTITY).max_abs() < 1e-15);
        assert_eq!(rotation_inverse(&Mat2::rotation(0.3)), Mat2::rotation(0.3).adjugate());
    }
}
