use std::path::Path;

use num_complex::Complex64;

use super::QcfError;
use crate::mat2::Mat2;

/// `χ(z) = exp(i bᵗz − ½ zᵗCz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMoments {
    pub b: [f64; 2],
    pub c: Mat2,
}

impl GaussianMoments {
    pub fn new(b: [f64; 2], c: Mat2) -> Self {
        GaussianMoments { b, c }
    }

    pub fn chi(&self, z: [f64; 2]) -> Complex64 {
        let phase = self.b[0] * z[0] + self.b[1] * z[1];
        Complex64::from_polar((-0.5 * self.c.quad_form(z)).exp(), phase)
    }

    /// `det Cov − 1/4` of the physical covariance matrix; non-negative for
    /// states obeying the uncertainty relation.
    pub fn uncertainty_margin(&self) -> f64 {
        self.c.det() - 0.25
    }
}

/// `χ` sampled on a rectangular `(x, p)` grid, bilinearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedChi {
    x: Vec<f64>,
    p: Vec<f64>,
    /// row-major in `x`: `values[i * p.len() + j] = χ(x_i, p_j)`
    values: Vec<Complex64>,
}

const TABLE_TOL: f64 = 1e-9;

impl TabulatedChi {
    pub fn new(x: Vec<f64>, p: Vec<f64>, values: Vec<Complex64>) -> Result<Self, QcfError> {
        for axis in [&x, &p] {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(QcfError::InvalidState(
                    "tabulated axes need at least two strictly increasing samples".into(),
                ));
            }
        }
        if values.len() != x.len() * p.len() {
            return Err(QcfError::InvalidState(format!(
                "expected {} tabulated values, found {}",
                x.len() * p.len(),
                values.len()
            )));
        }
        let table = TabulatedChi { x, p, values };
        let origin = table.eval([0.0, 0.0])?;
        if (origin - 1.0).norm() > TABLE_TOL {
            return Err(QcfError::InvalidState(format!(
                "tabulated chi(0) = {origin}, expected 1"
            )));
        }
        for (i, &xi) in table.x.iter().enumerate() {
            for (j, &pj) in table.p.iter().enumerate() {
                if let Ok(mirror) = table.eval([-xi, -pj]) {
                    let here = table.values[i * table.p.len() + j];
                    if (here - mirror.conj()).norm() > TABLE_TOL {
                        return Err(QcfError::InvalidState(format!(
                            "tabulated chi violates chi(-z) = conj chi(z) at ({xi}, {pj})"
                        )));
                    }
                }
            }
        }
        Ok(table)
    }

    /// Reads a CSV with header `x,p,re,im` covering a full rectangular grid.
    pub fn from_csv_path(path: &Path) -> Result<Self, QcfError> {
        let text = std::fs::read_to_string(path).map_err(|e| QcfError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, QcfError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(QcfError::Parse {
            line: 1,
            message: "missing header `x,p,re,im`".into(),
        })?;
        if header.split(',').map(str::trim).ne(["x", "p", "re", "im"]) {
            return Err(QcfError::Parse {
                line: hline,
                message: format!("expected header `x,p,re,im`, found `{header}`"),
            });
        }
        let mut rows = Vec::new();
        for (line, row) in lines {
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(QcfError::Parse {
                    line,
                    message: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let mut v = [0.0; 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f.parse().map_err(|_| QcfError::Parse {
                    line,
                    message: format!("`{f}` is not a number"),
                })?;
            }
            rows.push(v);
        }
        let axis = |i: usize| {
            let mut a: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        };
        let (x, p) = (axis(0), axis(1));
        if rows.len() != x.len() * p.len() {
            return Err(QcfError::InvalidState(format!(
                "{} rows do not form a full {}x{} grid",
                rows.len(),
                x.len(),
                p.len()
            )));
        }
        let mut values = vec![None; rows.len()];
        for r in &rows {
            let i = x.binary_search_by(|v| v.total_cmp(&r[0])).expect("axis built from rows");
            let j = p.binary_search_by(|v| v.total_cmp(&r[1])).expect("axis built from rows");
            values[i * p.len() + j] = Some(Complex64::new(r[2], r[3]));
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| QcfError::InvalidState("duplicate grid point in tabulated chi".into()))?;
        Self::new(x, p, values)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn p_range(&self) -> (f64, f64) {
        (self.p[0], *self.p.last().unwrap())
    }

    fn cell(axis: &[f64], v: f64) -> Option<(usize, f64)> {
        let (lo, hi) = (axis[0], *axis.last().unwrap());
        if v < lo || v > hi {
            return None;
        }
        let k = axis.partition_point(|a| *a <= v).clamp(1, axis.len() - 1) - 1;
        Some((k, (v - axis[k]) / (axis[k + 1] - axis[k])))
    }

    pub fn eval(&self, z: [f64; 2]) -> Result<Complex64, QcfError> {
        let out = QcfError::OutOfRange { x: z[0], p: z[1] };
        let (i, u) = Self::cell(&self.x, z[0]).ok_or(out.clone())?;
        let (j, v) = Self::cell(&self.p, z[1]).ok_or(out)?;
        let n = self.p.len();
        let at = |a: usize, b: usize| self.values[a * n + b];
        Ok(at(i, j) * ((1.0 - u) * (1.0 - v))
            + at(i + 1, j) * (u * (1.0 - v))
            + at(i, j + 1) * ((1.0 - u) * v)
            + at(i + 1, j + 1) * (u * v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    Coherent { x0: f64, p0: f64 },
    Thermal { nbar: f64 },
    /// `S(ξ)|0⟩` with `ξ = r e^{iφ}`, `S(ξ) = exp(½(ξ* a² − ξ a†²))`.
    SqueezedVacuum { r: f64, phi: f64 },
    Fock { n: u32 },
    TabulatedChi(TabulatedChi),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    kind: StateKind,
    gaussian: Option<GaussianMoments>,
}

impl InitialState {
    pub fn new(kind: StateKind) -> Result<Self, QcfError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let gaussian = match &kind {
            StateKind::Coherent { x0, p0 } => {
                if !finite(&[*x0, *p0]) {
                    return Err(QcfError::InvalidState("coherent amplitude must be finite".into()));
                }
                Some(GaussianMoments::new([-p0, *x0], Mat2::scaled_identity(0.5)))
            }
            StateKind::Thermal { nbar } => {
                if !(*nbar >= 0.0) || !nbar.is_finite() {
                    return Err(QcfError::InvalidState(format!("nbar must be >= 0, found {nbar}")));
                }
                Some(GaussianMoments::new([0.0, 0.0], Mat2::scaled_identity(nbar + 0.5)))
            }
            StateKind::SqueezedVacuum { r, phi } => {
                if !(*r >= 0.0) || !finite(&[*r, *phi]) {
                    return Err(QcfError::InvalidState(format!("squeezing r must be >= 0, found {r}")));
                }
                let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
                let var_x = 0.5 * (ch - sh * phi.cos());
                let var_p = 0.5 * (ch + sh * phi.cos());
                let cov = -0.5 * sh * phi.sin();
                // χ = exp(−½ Var(pX − xP))
                Some(GaussianMoments::new([0.0, 0.0], Mat2::symmetric(var_p, -cov, var_x)))
            }
            StateKind::Fock { .. } | StateKind::TabulatedChi(_) => None,
        };
        Ok(InitialState { kind, gaussian })
    }

    pub fn coherent(x0: f64, p0: f64) -> Result<Self, QcfError> {
        Self::new(StateKind::Coherent { x0, p0 })
    }

    pub fn vacuum() -> Self {
        Self::coherent(0.0, 0.0).expect("vacuum is valid")
    }

    pub fn thermal(nbar: f64) -> Result<Self, QcfError> {
        Self::new(StateKind::Thermal { nbar })
    }

    pub fn squeezed(r: f64, phi: f64) -> Result<Self, QcfError> {
        Self::new(StateKind::SqueezedVacuum { r, phi })
    }

    pub fn fock(n: u32) -> Self {
        Self::new(StateKind::Fock { n }).expect("Fock states are valid")
    }

    pub fn tabulated(table: TabulatedChi) -> Self {
        Self::new(StateKind::TabulatedChi(table)).expect("table validated on construction")
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn gaussian(&self) -> Option<&GaussianMoments> {
        self.gaussian.as_ref()
    }

    pub fn chi(&self, z: [f64; 2]) -> Result<Complex64, QcfError> {
        if let Some(g) = &self.gaussian {
            return Ok(g.chi(z));
        }
        match &self.kind {
            StateKind::Fock { n } => {
                let s = z[0] * z[0] + z[1] * z[1];
                Ok(Complex64::new((-0.25 * s).exp() * laguerre(*n, 0.5 * s), 0.0))
            }
            StateKind::TabulatedChi(t) => t.eval(z),
            _ => unreachable!("Gaussian kinds carry moments"),
        }
    }
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3.0), 1.0);
        assert_eq!(laguerre(1, 1.0), 0.0);
        // L_3(x) = (−x³ + 9x² − 18x + 6)/6
        let x = 0.7f64;
        assert!((laguerre(3, x) - (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(InitialState::thermal(-1.0).is_err());
        assert!(InitialState::squeezed(-0.1, 0.0).is_err());
        assert!(InitialState::coherent(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn tabulated_csv_parses_and_interpolates() {
        let mut text = String::from("x,p,re,im\n");
        for x in [-1.0, 0.0, 1.0] {
            for p in [-1.0, 0.0, 1.0] {
                let v: f64 = (-0.25f64 * (x * x + p * p)).exp();
                text.push_str(&format!("{x},{p},{v},0\n"));
            }
        }
        let t = TabulatedChi::from_csv_str(&text).unwrap();
        assert_eq!(t.eval([0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        let mid = t.eval([0.5, 0.0]).unwrap().re;
        assert!((mid - 0.5 * (1.0 + (-0.25f64).exp())).abs() < 1e-15);
        assert!(matches!(t.eval([1.5, 0.0]), Err(QcfError::OutOfRange { .. })));
    }

    #[test]
    fn tabulated_rejects_unnormalized_or_asymmetric_tables() {
        let x = vec![-1.0, 0.0, 1.0];
        let ones = vec![Complex64::new(1.0, 0.0); 9];
        let mut bad = ones.clone();
        bad[4] = Complex64::new(0.9, 0.0);
        assert!(TabulatedChi::new(x.clone(), x.clone(), bad).is_err());
        let mut skew = ones.clone();
        skew[0] = Complex64::new(1.0, 0.1);
        assert!(TabulatedChi::new(x.clone(), x.clone(), skew).is_err());
        assert!(TabulatedChi::new(x.clone(), x, ones).is_ok());
    }

    #[test]
    fn squeezed_state_saturates_uncertainty() {
        let s = InitialState::squeezed(0.6, 1.1).unwrap();
        assert!(s.gaussian().unwrap().uncertainty_margin().abs() < 1e-14);
    }
}
