//! Constant-energy curve of the renormalized Hamiltonian
//! `½[(1 − r)x² + 2γxp + p²]` in units of `ω₀`.

use std::f64::consts::PI;
use std::io::Write;

use thiserror::Error;

use crate::mat2::Mat2;

pub const ELLIPSE_POINTS: usize = 360;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipseError {
    #[error("r/omega0 = {r} and gamma/omega0 = {gamma} must both lie in (-1, 1)")]
    OutOfRange { r: f64, gamma: f64 },
    #[error("quadratic form is not elliptic: 1 - r = {a}, determinant = {det}")]
    NotElliptic { a: f64, det: f64 },
}

/// Points `v` with `vᵗQv = 1`, plus the unit circle for reference.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    pub q: Mat2,
    pub theta: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub circle: Vec<[f64; 2]>,
}

impl Ellipse {
    /// `π / √det Q`.
    pub fn area(&self) -> f64 {
        PI / self.q.det().sqrt()
    }

    /// Angle of the major axis from the `x` axis, in `(−π/2, π/2]`; zero when
    /// the principal axes are the coordinate axes.
    pub fn tilt(&self) -> f64 {
        let (a, b, d) = (self.q.get(0, 0), self.q.get(0, 1), self.q.get(1, 1));
        if b == 0.0 {
            return 0.0;
        }
        // major axis of vᵗQv = 1 is the eigenvector of the smaller eigenvalue
        let angle = 0.5 * (2.0 * b).atan2(a - d) + PI / 2.0;
        if angle > PI / 2.0 {
            angle - PI
        } else {
            angle
        }
    }
}

/// Symmetric square root of a symmetric positive-definite 2×2 matrix.
fn sqrt_spd(m: &Mat2) -> Mat2 {
    let s = m.det().sqrt();
    let t = (m.trace() + 2.0 * s).sqrt();
    (*m + Mat2::scaled_identity(s)).scale(1.0 / t)
}

pub fn emit_ellipse(r: f64, gamma: f64) -> Result<Ellipse, EllipseError> {
    if !(r.abs() < 1.0 && gamma.abs() < 1.0) {
        return Err(EllipseError::OutOfRange { r, gamma });
    }
    let q = Mat2::symmetric(1.0 - r, gamma, 1.0);
    let (a, det) = (1.0 - r, q.det());
    if !(a > 0.0 && det > 0.0) {
        return Err(EllipseError::NotElliptic { a, det });
    }
    let inv = q.inverse().ok_or(EllipseError::NotElliptic { a, det })?;
    let l = sqrt_spd(&inv);
    let theta: Vec<f64> = (0..ELLIPSE_POINTS)
        .map(|k| 2.0 * PI * k as f64 / ELLIPSE_POINTS as f64)
        .collect();
    let points = theta.iter().map(|t| l.apply([t.cos(), t.sin()])).collect();
    let circle = theta.iter().map(|t| [t.cos(), t.sin()]).collect();
    Ok(Ellipse {
        q,
        theta,
        points,
        circle,
    })
}

pub fn write_ellipse_csv<W: Write>(e: &Ellipse, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# columns: curve, theta, x, p; curve 'ellipse' is v^T Q v = 1 with Q = [[{:.6}, {:.6}], [{:.6}, {:.6}]], area {:.12}, tilt {:.12} rad; curve 'circle' is the unit circle",
        e.q.get(0, 0),
        e.q.get(0, 1),
        e.q.get(1, 0),
        e.q.get(1, 1),
        e.area(),
        e.tilt()
    )?;
    writeln!(out, "curve,theta,x,p")?;
    for (name, pts) in [("ellipse", &e.points), ("circle", &e.circle)] {
        for (t, v) in e.theta.iter().zip(pts.iter()) {
            writeln!(out, "{name},{t:.15e},{:.15e},{:.15e}", v[0], v[1])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_on_the_curve() {
        let e = emit_ellipse(0.1, 0.1).unwrap();
        assert_eq!(e.points.len(), ELLIPSE_POINTS);
        for v in &e.points {
            assert!((e.q.quad_form(*v) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn examples() {
        let c = emit_ellipse(0.0, 0.0).unwrap();
        for (a, b) in c.points.iter().zip(&c.circle) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
        assert_eq!(emit_ellipse(0.1, 0.0).unwrap().tilt(), 0.0);
        assert!(emit_ellipse(0.1, 0.1).unwrap().tilt().abs() > 0.1);
        assert!((emit_ellipse(0.1, 0.1).unwrap().area() - PI / 0.89f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_elliptic() {
        assert!(matches!(emit_ellipse(1.5, 0.0), Err(EllipseError::OutOfRange { .. })));
        assert!(matches!(emit_ellipse(0.5, 0.9), Err(EllipseError::NotElliptic { .. })));
    }
}
