use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{evolve_chi, gaussian_evolve, InitialState, QcfError};
use crate::propagator::PropagatorBundle;

/// `|χ|` threshold defining the integration boundary.
pub const DECAY_FLOOR: f64 = 1e-12;
const BOUNDARY_SAMPLES: usize = 65;
const MAX_EXTENT: f64 = 1e3;

/// Rectangular grid of phase-space points `u = (q, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self, QcfError> {
        for axis in [&q, &p] {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(QcfError::InvalidState(
                    "phase grid axes need at least two strictly increasing points".into(),
                ));
            }
        }
        Ok(PhaseGrid { q, p })
    }

    /// `points × points` samples of `[−extent, extent]²`.
    pub fn square(extent: f64, points: usize) -> Result<Self, QcfError> {
        if !(extent > 0.0) || points < 2 {
            return Err(QcfError::InvalidState(
                "phase grid needs a positive extent and at least 2 points".into(),
            ));
        }
        let axis = linspace(extent, points);
        Self::new(axis.clone(), axis)
    }

    fn reach(&self) -> f64 {
        self.q
            .iter()
            .chain(&self.p)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

fn linspace(extent: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * extent / (points - 1) as f64;
    (0..points).map(|i| -extent + i as f64 * step).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerOptions {
    /// Samples per axis of the `z` integration grid.
    pub z_points: usize,
    /// Half-width of the `z` grid; chosen from the decay of `χ_t` when `None`.
    pub z_extent: Option<f64>,
}

impl Default for WignerOptions {
    fn default() -> Self {
        WignerOptions {
            z_points: 256,
            z_extent: None,
        }
    }
}

/// `W(q, p)` with `values[[iq, ip]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Array2<f64>,
}

impl WignerField {
    /// Trapezoid integral over the phase grid.
    pub fn integral(&self) -> f64 {
        let wq = trapezoid_weights(&self.q);
        let wp = trapezoid_weights(&self.p);
        let mut acc = 0.0;
        for (i, a) in wq.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                acc += a * b * self.values[[i, j]];
            }
        }
        acc
    }

    /// `(q, p, W)` at the largest sample.
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for ((i, j), &v) in self.values.indexed_iter() {
            if v > best.2 {
                best = (self.q[i], self.p[j], v);
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# columns: q, p, w (Wigner function, long format, p fastest)")?;
        writeln!(out, "q,p,w")?;
        for (i, q) in self.q.iter().enumerate() {
            for (j, p) in self.p.iter().enumerate() {
                writeln!(out, "{:.15e},{:.15e},{:.15e}", q, p, self.values[[i, j]])?;
            }
        }
        Ok(())
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Largest `|χ|` on the boundary of `[−l, l]²`.
fn boundary_max<F>(chi: &F, l: f64) -> Result<f64, QcfError>
where
    F: Fn([f64; 2]) -> Result<Complex64, QcfError>,
{
    let mut worst: f64 = 0.0;
    for s in linspace(l, BOUNDARY_SAMPLES) {
        for z in [[s, l], [s, -l], [l, s], [-l, s]] {
            worst = worst.max(chi(z)?.norm());
        }
    }
    Ok(worst)
}

fn auto_extent<F>(chi: &F) -> Result<f64, QcfError>
where
    F: Fn([f64; 2]) -> Result<Complex64, QcfError>,
{
    let mut l = 1.0;
    loop {
        match boundary_max(chi, l) {
            Ok(m) if m < DECAY_FLOOR => return Ok(l),
            Ok(_) if l < MAX_EXTENT => l *= 1.1,
            Ok(_) => {
                return Err(QcfError::DomainTooSmall {
                    extent: l,
                    suggested: f64::INFINITY,
                })
            }
            Err(QcfError::OutOfRange { .. }) => {
                return Err(QcfError::DomainTooSmall {
                    extent: l / 1.1,
                    suggested: l,
                })
            }
            Err(e) => return Err(e),
        }
    }
}

/// `W(u) = (2π)⁻² ∫ χ_t(z) e^{−i zᵗJu} d²z` by separable trapezoid sums.
pub fn wigner(
    bundle: &PropagatorBundle,
    state: &InitialState,
    k: usize,
    grid: &PhaseGrid,
    opts: &WignerOptions,
) -> Result<WignerField, QcfError> {
    if opts.z_points < 8 {
        return Err(QcfError::InvalidState("z grid needs at least 8 points".into()));
    }
    let chi = |z: [f64; 2]| evolve_chi(bundle, state, z, k);
    chi([0.0, 0.0])?;
    let extent = match opts.z_extent {
        None => auto_extent(&chi)?,
        Some(l) => {
            let ok = match boundary_max(&chi, l) {
                Ok(m) => m < DECAY_FLOOR,
                Err(QcfError::OutOfRange { .. }) => false,
                Err(e) => return Err(e),
            };
            if !ok {
                let suggested = auto_extent(&chi).unwrap_or(f64::INFINITY);
                return Err(QcfError::DomainTooSmall { extent: l, suggested });
            }
            l
        }
    };

    let n = opts.z_points;
    let z = linspace(extent, n);
    let spacing = z[1] - z[0];
    // phase gradient of χ_t: the mean for Gaussian states
    let drift = state
        .gaussian()
        .map(|g| {
            let b = gaussian_evolve(bundle, g, k).b;
            b[0].abs().max(b[1].abs())
        })
        .unwrap_or(0.0);
    let reach = grid.reach() + drift;
    if spacing * reach > 1.5 {
        let suggested = (2.0 * extent * reach / 1.5).ceil() as usize + 1;
        return Err(QcfError::TooCoarse {
            spacing,
            reach,
            suggested,
        });
    }
    let w = trapezoid_weights(&z);

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| chi([z[i], z[j]]).map(|v| v * w[j])).collect())
        .collect::<Result<_, _>>()?;

    // e^{−i zᵗJu} = e^{i x u_p} e^{−i p u_q}
    let nq = grid.q.len();
    let np = grid.p.len();
    let partial: Vec<Vec<Complex64>> = rows
        .par_iter()
        .map(|row| {
            grid.q
                .iter()
                .map(|&q| {
                    row.iter()
                        .zip(&z)
                        .map(|(c, &pz)| c * Complex64::from_polar(1.0, -pz * q))
                        .sum()
                })
                .collect()
        })
        .collect();
    let norm = 1.0 / (4.0 * PI * PI);
    let out: Vec<Vec<Complex64>> = (0..nq)
        .into_par_iter()
        .map(|iq| {
            grid.p
                .iter()
                .map(|&up| {
                    let s: Complex64 = (0..n)
                        .map(|i| partial[i][iq] * (w[i] * Complex64::from_polar(1.0, z[i] * up)))
                        .sum();
                    s * norm
                })
                .collect()
        })
        .collect();

    let mut values = Array2::zeros((nq, np));
    let mut worst_im: f64 = 0.0;
    for (iq, row) in out.iter().enumerate() {
        for (ip, v) in row.iter().enumerate() {
            worst_im = worst_im.max(v.im.abs());
            values[[iq, ip]] = v.re;
        }
    }
    if worst_im > 1e-8 {
        return Err(QcfError::ComplexWigner(worst_im));
    }
    Ok(WignerField {
        q: grid.q.clone(),
        p: grid.p.clone(),
        values,
    })
}
