//! Banded matrices for the fast right-hand side.

use ndarray::Array2;
use num_complex::Complex64;

/// Nonzero diagonals `(offset, values)`: `A[i, i + offset] = values[i']`,
/// indexed by the row for `offset ≥ 0` and by the column otherwise.
#[derive(Clone, Debug)]
pub struct Band {
    d: usize,
    diagonals: Vec<(isize, Vec<Complex64>)>,
}

impl Band {
    pub fn from_dense(a: &Array2<Complex64>) -> Self {
        let d = a.nrows();
        let mut diagonals = Vec::new();
        for off in -(d as isize - 1)..=(d as isize - 1) {
            let len = d - off.unsigned_abs();
            let vals: Vec<Complex64> = (0..len)
                .map(|k| {
                    let (i, j) = if off >= 0 {
                        (k, k + off as usize)
                    } else {
                        (k + off.unsigned_abs(), k)
                    };
                    a[[i, j]]
                })
                .collect();
            if vals.iter().any(|v| *v != Complex64::new(0.0, 0.0)) {
                diagonals.push((off, vals));
            }
        }
        Band { d, diagonals }
    }

    /// `out = A ρ` (when `add` is false) or `out += s · A ρ`.
    pub fn left(&self, rho: &Array2<Complex64>, out: &mut Array2<Complex64>, s: Complex64, add: bool) {
        if !add {
            out.fill(Complex64::new(0.0, 0.0));
        }
        let d = self.d;
        for (off, vals) in &self.diagonals {
            for (k, a) in vals.iter().enumerate() {
                let (i, j) = if *off >= 0 {
                    (k, k + *off as usize)
                } else {
                    (k + off.unsigned_abs(), k)
                };
                let f = s * a;
                let (src, dst) = (rho.row(j), i);
                for c in 0..d {
                    out[[dst, c]] += f * src[c];
                }
            }
        }
    }

    /// `out = ρ A` (when `add` is false) or `out += s · ρ A`.
    pub fn right(&self, rho: &Array2<Complex64>, out: &mut Array2<Complex64>, s: Complex64, add: bool) {
        if !add {
            out.fill(Complex64::new(0.0, 0.0));
        }
        let d = self.d;
        for (off, vals) in &self.diagonals {
            for (k, a) in vals.iter().enumerate() {
                let (i, j) = if *off >= 0 {
                    (k, k + *off as usize)
                } else {
                    (k + off.unsigned_abs(), k)
                };
                // (ρA)[r, j] += ρ[r, i] A[i, j]
                let f = s * a;
                for r in 0..d {
                    out[[r, j]] += f * rho[[r, i]];
                }
            }
        }
    }
}
