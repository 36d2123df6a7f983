use ndarray::Array2;
use num_complex::Complex64;

use super::{FockOperators, OracleError, TruncatedState};

fn inf_norm(a: &Array2<Complex64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let norm = inf_norm(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|v| v / 2f64.powi(s));
    let n = a.nrows();
    let mut result = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..60 {
        term = term.dot(&scaled).mapv(|v| v / k as f64);
        result += &term;
        if inf_norm(&term) < 1e-18 * inf_norm(&result) {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// `e^{i(pX − xP)}` on `ops.d` levels.
pub fn weyl_operator(ops: &FockOperators, z: [f64; 2]) -> Array2<Complex64> {
    let [x, p] = z;
    let gen = (&ops.x * Complex64::new(0.0, p)) - (&ops.p * Complex64::new(0.0, x));
    expm(&gen)
}

const PAD_STEP: usize = 16;
const CHI_TOL: f64 = 1e-12;

/// `tr{e^{i(pX−xP)}ρ}`. The Weyl operator is built on a padded space and
/// its leading `d × d` block is used; padding grows until the value settles.
/// Displacements that would need more than `max(4d, 200)` levels are refused.
pub fn chi_from_rho(state: &TruncatedState, z: [f64; 2]) -> Result<Complex64, OracleError> {
    let d = state.d();
    let eval = |dim: usize| -> Result<Complex64, OracleError> {
        let ops = FockOperators::new(dim)?;
        let w = weyl_operator(&ops, z);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += w[[i, j]] * state.rho[[j, i]];
            }
        }
        Ok(acc)
    };
    let limit = (4 * d).max(200);
    // Levels reached by displacing the retained ones by |β| = |z|/√2.
    let beta = (0.5 * (z[0] * z[0] + z[1] * z[1])).sqrt();
    let reach = ((d as f64).sqrt() + beta + 4.0).powi(2);
    if reach > limit as f64 {
        return Err(OracleError::Truncation {
            x: z[0],
            p: z[1],
            d,
            estimate: f64::NAN,
        });
    }
    let mut dim = d + PAD_STEP;
    let mut prev = eval(dim)?;
    let mut change = f64::INFINITY;
    while dim + PAD_STEP <= limit {
        dim += PAD_STEP;
        let next = eval(dim)?;
        change = (next - prev).norm();
        if change < CHI_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(OracleError::Truncation {
        x: z[0],
        p: z[1],
        d,
        estimate: change,
    })
}
