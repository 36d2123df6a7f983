//! Shared time grid and the cumulative integration / interpolation helpers
//! every table in the pipeline is built on.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("time grid is empty")]
    Empty,
    #[error("time grid must start at 0, found {0}")]
    NonZeroStart(f64),
    #[error("time grid must be strictly increasing (index {index}: {prev} -> {next})")]
    NotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("invalid uniform grid: dt = {dt}, t_max = {t_max}")]
    BadUniform { dt: f64, t_max: f64 },
    #[error("grid length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("time {t} lies outside the grid [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },
}

/// Strictly increasing time samples starting at 0 (units of 1/ω₀).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, GridError> {
        let first = *times.first().ok_or(GridError::Empty)?;
        if first != 0.0 {
            return Err(GridError::NonZeroStart(first));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(GridError::NotIncreasing {
                index: i + 1,
                prev: times[i],
                next: times[i + 1],
            });
        }
        Ok(TimeGrid { times })
    }

    /// Uniform grid `0, dt, 2dt, …` up to the last node not exceeding `t_max`
    /// (with a small tolerance so `t_max = n·dt` is always included).
    pub fn uniform(dt: f64, t_max: f64) -> Result<Self, GridError> {
        if !(dt > 0.0) || !dt.is_finite() || !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(GridError::BadUniform { dt, t_max });
        }
        let steps = (t_max / dt + 1e-9).floor() as usize;
        let times = (0..=steps).map(|k| k as f64 * dt).collect();
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    pub fn max_step(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the node closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.times.len() => self.times.len() - 1,
            Err(i) => {
                if (t - self.times[i - 1]) <= (self.times[i] - t) {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Interval `k` and fraction `θ ∈ [0, 1]` with `t = t_k + θ (t_{k+1} − t_k)`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64), GridError> {
        let n = self.times.len();
        let t_max = self.t_max();
        let tol = 1e-12 * t_max.max(1.0);
        if t < -tol || t > t_max + tol {
            return Err(GridError::OutOfRange { t, t_max });
        }
        if n == 1 {
            return Ok((0, 0.0));
        }
        let k = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (a, b) = (self.times[k], self.times[k + 1]);
        Ok((k, ((t - a) / (b - a)).clamp(0.0, 1.0)))
    }

    /// Linear interpolation of `values` (sampled on this grid) at `t`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> Result<f64, GridError> {
        self.check_len(values.len())?;
        let (k, theta) = self.locate(t)?;
        if values.len() == 1 {
            return Ok(values[0]);
        }
        Ok(values[k] + theta * (values[k + 1] - values[k]))
    }

    pub fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.times.len() {
            return Err(GridError::LengthMismatch {
                expected: self.times.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// Composite-trapezoid running integral `I_k = ∫_0^{t_k} f`; `I_0 = 0`.
    pub fn cumulative_trapezoid(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.times.len());
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.times.windows(2).zip(f.windows(2)).map(|(t, y)| {
                acc += 0.5 * (t[1] - t[0]) * (y[0] + y[1]);
                acc
            }))
            .collect()
    }

    /// Cubic Lagrange interpolation inside interval `k` at fraction `theta`,
    /// through four nearby nodes with the stencil shifted inward at the ends.
    pub fn cubic_in_interval(&self, f: &[f64], k: usize, theta: f64) -> f64 {
        let t = &self.times;
        let n = t.len();
        if n == 1 {
            return f[0];
        }
        let width = n.min(4);
        let lo = k.saturating_sub(1).min(n - width);
        let hi = lo + width - 1;
        let x = t[k] + theta * (t[k + 1] - t[k]);
        (lo..=hi)
            .map(|i| {
                let w: f64 = (lo..=hi)
                    .filter(|&j| j != i)
                    .map(|j| (x - t[j]) / (t[i] - t[j]))
                    .product();
                w * f[i]
            })
            .sum()
    }

    /// [`Self::cubic_in_interval`] at every interval midpoint.
    pub fn midpoint_values(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.times.len());
        (0..self.times.len().saturating_sub(1))
            .map(|k| self.cubic_in_interval(f, k, 0.5))
            .collect()
    }

    /// Second-order derivative estimate: centered differences in the
    /// interior, one-sided three-point formulas at both ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let t = &self.times;
        let n = t.len();
        if n < 2 {
            return vec![0.0; n];
        }
        if n == 2 {
            let s = (f[1] - f[0]) / (t[1] - t[0]);
            return vec![s, s];
        }
        let mut out = vec![0.0; n];
        for k in 1..n - 1 {
            let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
            // Three-point non-uniform centered formula.
            out[k] = (-h1 / (h0 * (h0 + h1))) * f[k - 1]
                + ((h1 - h0) / (h0 * h1)) * f[k]
                + (h0 / (h1 * (h0 + h1))) * f[k + 1];
        }
        let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
        out[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * f[0] + (h0 + h1) / (h0 * h1) * f[1]
            - h0 / (h1 * (h0 + h1)) * f[2];
        let (h0, h1) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        out[n - 1] = h1 / (h0 * (h0 + h1)) * f[n - 3] - (h0 + h1) / (h0 * h1) * f[n - 2]
            + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * f[n - 1];
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TimeGrid::new(vec![]), Err(GridError::Empty));
        assert!(matches!(TimeGrid::new(vec![0.1, 0.2]), Err(GridError::NonZeroStart(_))));
        assert!(matches!(
            TimeGrid::new(vec![0.0, 0.2, 0.2]),
            Err(GridError::NotIncreasing { index: 2, .. })
        ));
    }

    #[test]
    fn uniform_includes_endpoint() {
        let g = TimeGrid::uniform(0.01, 30.0).unwrap();
        assert_eq!(g.len(), 3001);
        assert!((g.t_max() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let g = TimeGrid::uniform(0.1, 2.0).unwrap();
        let f: Vec<f64> = g.times().iter().map(|t| 3.0 * t + 1.0).collect();
        let i = g.cumulative_trapezoid(&f);
        for (t, v) in g.times().iter().zip(&i) {
            assert!((v - (1.5 * t * t + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_is_exact_for_quadratic() {
        let g = TimeGrid::uniform(0.05, 1.0).unwrap();
        let f: Vec<f64> = g.times().iter().map(|t| t * t - 2.0 * t).collect();
        for (t, d) in g.times().iter().zip(g.derivative(&f)) {
            assert!((d - (2.0 * t - 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn midpoints_are_exact_for_cubics() {
        let g = TimeGrid::new(vec![0.0, 0.1, 0.25, 0.3, 0.5, 0.7]).unwrap();
        let p = |t: f64| t * t * t - 2.0 * t * t + 0.5;
        let f: Vec<f64> = g.times().iter().map(|&t| p(t)).collect();
        let m = g.midpoint_values(&f);
        assert_eq!(m.len(), 5);
        for (w, v) in g.times().windows(2).zip(m) {
            assert!((v - p(0.5 * (w[0] + w[1]))).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolation_hits_nodes() {
        let g = TimeGrid::uniform(0.5, 2.0).unwrap();
        let v = [0.0, 1.0, 4.0, 9.0, 16.0];
        assert_eq!(g.interpolate(&v, 1.0).unwrap(), 4.0);
        assert_eq!(g.interpolate(&v, 1.25).unwrap(), 6.5);
        assert!(g.interpolate(&v, 2.5).is_err());
    }
}
