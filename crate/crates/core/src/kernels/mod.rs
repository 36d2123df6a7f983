//! Bath correlation `κ(τ)` and susceptibility `μ(τ)` kernels.
//!
//! Both are expressed through a spectral density `J(ω)`:
//!
//! ```text
//! κ(τ) = α² ∫_0^∞ J(ω) coth(ω/2T) cos(ωτ) dω
//! μ(τ) = α² ∫_0^∞ J(ω) sin(ωτ) dω
//! ```
//!
//! Units are ħ = k_B = 1 with frequencies in units of ω₀. Closed forms are
//! used for the vacuum part of the analytic families; the thermal part
//! `J(ω)(coth(ω/2T) − 1)` decays exponentially and is always integrated
//! numerically.

pub mod quadrature;
pub mod special;

use std::f64::consts::{FRAC_2_PI, PI};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{GridError, TimeGrid};
use quadrature::{decay_cutoff, fourier_integral, Tolerance, Trig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid reservoir: {0}")]
    InvalidSpec(String),
    #[error(
        "quadrature did not converge at tau = {tau}: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    Quadrature {
        tau: f64,
        estimate: f64,
        tolerance: f64,
    },
    #[error("kernel diverges at tau = {tau} for the {family} family (T = {temperature})")]
    Divergent {
        tau: f64,
        family: &'static str,
        temperature: f64,
    },
    #[error("tau = {tau} is outside the tabulated range [0, {max}]")]
    OutOfRange { tau: f64, max: f64 },
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("kernel table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading kernel table {path}: {message}")]
    Io { path: String, message: String },
}

/// Sampled `(τ, κ, μ)` triples, linearly interpolated between samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedKernel {
    tau: Vec<f64>,
    kappa: Vec<f64>,
    mu: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(tau: Vec<f64>, kappa: Vec<f64>, mu: Vec<f64>) -> Result<Self, KernelError> {
        if kappa.len() != tau.len() || mu.len() != tau.len() {
            return Err(KernelError::InvalidSpec(format!(
                "tabulated columns differ in length ({}, {}, {})",
                tau.len(),
                kappa.len(),
                mu.len()
            )));
        }
        TimeGrid::new(tau.clone())?;
        if kappa.iter().chain(&mu).any(|v| !v.is_finite()) {
            return Err(KernelError::InvalidSpec("non-finite tabulated value".into()));
        }
        if mu[0].abs() > 1e-12 {
            return Err(KernelError::InvalidSpec(format!(
                "tabulated mu(0) must vanish, found {}",
                mu[0]
            )));
        }
        Ok(TabulatedKernel { tau, kappa, mu })
    }

    /// Reads a `tau,kappa,mu` CSV file.
    pub fn from_csv_path(path: &Path) -> Result<Self, KernelError> {
        let text = std::fs::read_to_string(path).map_err(|e| KernelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, KernelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(KernelError::Parse {
            line: 1,
            message: "missing header `tau,kappa,mu`".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["tau", "kappa", "mu"] {
            return Err(KernelError::Parse {
                line: hline,
                message: format!("expected header `tau,kappa,mu`, found `{header}`"),
            });
        }
        let (mut tau, mut kappa, mut mu) = (Vec::new(), Vec::new(), Vec::new());
        for (line, row) in lines {
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(KernelError::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| KernelError::Parse {
                    line,
                    message: format!("`{s}` is not a number"),
                })
            };
            tau.push(parse(fields[0])?);
            kappa.push(parse(fields[1])?);
            mu.push(parse(fields[2])?);
        }
        Self::new(tau, kappa, mu)
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau.last().expect("validated non-empty")
    }

    fn interpolate(&self, values: &[f64], tau: f64) -> Result<f64, KernelError> {
        if tau < 0.0 || tau > self.tau_max() * (1.0 + 1e-12) {
            return Err(KernelError::OutOfRange {
                tau,
                max: self.tau_max(),
            });
        }
        let k = match self.tau.binary_search_by(|x| x.total_cmp(&tau)) {
            Ok(i) => return Ok(values[i]),
            Err(i) => i.min(self.tau.len() - 1).max(1) - 1,
        };
        if k + 1 >= self.tau.len() {
            return Ok(values[k]);
        }
        let th = (tau - self.tau[k]) / (self.tau[k + 1] - self.tau[k]);
        Ok(values[k] + th * (values[k + 1] - values[k]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `J(ω) = ω e^{−ω/ω_c}`
    OhmicExpCutoff,
    /// `J(ω) = (2/π) ω ω_c² / (ω_c² + ω²)`
    OhmicLorentzDrude,
    Tabulated(TabulatedKernel),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::OhmicExpCutoff => "ohmic_exp",
            Family::OhmicLorentzDrude => "lorentz_drude",
            Family::Tabulated(_) => "tabulated",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirSpec {
    pub family: Family,
    pub coupling_alpha: f64,
    pub cutoff_wc: f64,
    pub temperature: f64,
}

/// Below this frequency `J(ω)·coth(ω/2T)` is replaced by its `ω → 0` limit.
const COTH_REGULARIZATION: f64 = 1e-8;

impl ReservoirSpec {
    pub fn ohmic_exp(alpha: f64, wc: f64, temperature: f64) -> Result<Self, KernelError> {
        Self {
            family: Family::OhmicExpCutoff,
            coupling_alpha: alpha,
            cutoff_wc: wc,
            temperature,
        }
        .validated()
    }

    pub fn lorentz_drude(alpha: f64, wc: f64, temperature: f64) -> Result<Self, KernelError> {
        Self {
            family: Family::OhmicLorentzDrude,
            coupling_alpha: alpha,
            cutoff_wc: wc,
            temperature,
        }
        .validated()
    }

    /// A tabulated reservoir; the samples already include the coupling.
    pub fn tabulated(table: TabulatedKernel) -> Self {
        Self {
            family: Family::Tabulated(table),
            coupling_alpha: 1.0,
            cutoff_wc: 1.0,
            temperature: 0.0,
        }
    }

    pub fn validated(self) -> Result<Self, KernelError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.coupling_alpha >= 0.0) || !self.coupling_alpha.is_finite() {
            return Err(KernelError::InvalidSpec(format!(
                "coupling alpha must be >= 0, found {}",
                self.coupling_alpha
            )));
        }
        if !(self.cutoff_wc > 0.0) || !self.cutoff_wc.is_finite() {
            return Err(KernelError::InvalidSpec(format!(
                "cutoff wc must be > 0, found {}",
                self.cutoff_wc
            )));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(KernelError::InvalidSpec(format!(
                "temperature must be >= 0, found {}",
                self.temperature
            )));
        }
        Ok(())
    }

    fn alpha2(&self) -> f64 {
        self.coupling_alpha * self.coupling_alpha
    }

    /// Spectral density without the `α²` prefactor.
    pub fn spectral_density(&self, omega: f64) -> Result<f64, KernelError> {
        Ok(omega * self.j_over_omega(omega)?)
    }

    fn j_over_omega(&self, omega: f64) -> Result<f64, KernelError> {
        let wc = self.cutoff_wc;
        match self.family {
            Family::OhmicExpCutoff => Ok((-omega / wc).exp()),
            Family::OhmicLorentzDrude => Ok(FRAC_2_PI * wc * wc / (wc * wc + omega * omega)),
            Family::Tabulated(_) => Err(KernelError::UnsupportedFamily("tabulated")),
        }
    }

    /// `J(ω)·(coth(ω/2T) − 1)`, regularized at small ω.
    fn thermal_weight(&self, omega: f64) -> f64 {
        let t = self.temperature;
        let jw = self.j_over_omega(omega).unwrap_or(0.0);
        if omega < COTH_REGULARIZATION {
            // ω·2/(e^{ω/T} − 1) → 2T
            return jw * (2.0 * t - omega);
        }
        jw * omega * 2.0 / (omega / t).exp_m1()
    }

    fn natural_width(&self) -> f64 {
        let mut w = self.cutoff_wc;
        if self.temperature > 0.0 {
            w = w.min(self.temperature);
        }
        w.clamp(0.05, 5.0)
    }

    fn thermal_part(&self, tau: f64) -> Result<f64, KernelError> {
        if self.temperature == 0.0 {
            return Ok(0.0);
        }
        let width = self.natural_width();
        let cutoff = decay_cutoff(|w| self.thermal_weight(w), width, 1e-18);
        let tol = Tolerance::default();
        let r = fourier_integral(|w| self.thermal_weight(w), tau, Trig::Cos, cutoff, width, &tol);
        check_quadrature(tau, &r, &tol)?;
        Ok(r.value)
    }
}

fn check_quadrature(
    tau: f64,
    r: &quadrature::QuadResult,
    tol: &Tolerance,
) -> Result<(), KernelError> {
    let allowed = tol.abs.max(tol.rel * r.scale.max(r.value.abs()));
    if !r.converged && r.error > allowed {
        return Err(KernelError::Quadrature {
            tau,
            estimate: r.error,
            tolerance: allowed,
        });
    }
    Ok(())
}

/// Correlation kernel `κ(τ)`.
pub fn kappa(spec: &ReservoirSpec, tau: f64) -> Result<f64, KernelError> {
    spec.validate()?;
    check_tau(tau)?;
    if let Family::Tabulated(table) = &spec.family {
        return table.interpolate(&table.kappa, tau);
    }
    if spec.coupling_alpha == 0.0 {
        return Ok(0.0);
    }
    let wc = spec.cutoff_wc;
    let vacuum = match spec.family {
        Family::OhmicExpCutoff => {
            let u = wc * wc * tau * tau;
            wc * wc * (1.0 - u) / ((1.0 + u) * (1.0 + u))
        }
        Family::OhmicLorentzDrude => {
            if tau == 0.0 {
                return Err(KernelError::Divergent {
                    tau,
                    family: spec.family.name(),
                    temperature: spec.temperature,
                });
            }
            // ∫ ω cos(ωτ)/(ω² + ω_c²) dω = −½[e^{−x}Ei(x) − e^{x}E₁(x)], x = ω_c τ
            let x = wc * tau;
            FRAC_2_PI * wc * wc * (-0.5) * (special::scaled_ei(x) - special::scaled_e1(x))
        }
        Family::Tabulated(_) => unreachable!(),
    };
    Ok(spec.alpha2() * (vacuum + spec.thermal_part(tau)?))
}

/// Susceptibility kernel `μ(τ)`; temperature independent.
pub fn mu(spec: &ReservoirSpec, tau: f64) -> Result<f64, KernelError> {
    spec.validate()?;
    check_tau(tau)?;
    if let Family::Tabulated(table) = &spec.family {
        return table.interpolate(&table.mu, tau);
    }
    if spec.coupling_alpha == 0.0 || tau == 0.0 {
        return Ok(0.0);
    }
    let wc = spec.cutoff_wc;
    let value = match spec.family {
        Family::OhmicExpCutoff => {
            let u = wc * wc * tau * tau;
            2.0 * wc.powi(3) * tau / ((1.0 + u) * (1.0 + u))
        }
        Family::OhmicLorentzDrude => wc * wc * (-wc * tau).exp(),
        Family::Tabulated(_) => unreachable!(),
    };
    Ok(spec.alpha2() * value)
}

fn check_tau(tau: f64) -> Result<(), KernelError> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(KernelError::InvalidSpec(format!(
            "kernels are evaluated at tau >= 0 only, found {tau}"
        )));
    }
    Ok(())
}

/// `κ` and `μ` by direct quadrature of the full spectral integrals, with no
/// closed forms involved. Only defined for exponentially cut-off densities.
pub fn kernels_by_quadrature(spec: &ReservoirSpec, tau: f64) -> Result<(f64, f64), KernelError> {
    spec.validate()?;
    check_tau(tau)?;
    if !matches!(spec.family, Family::OhmicExpCutoff) {
        return Err(KernelError::UnsupportedFamily(spec.family.name()));
    }
    let t = spec.temperature;
    let full = |w: f64| {
        let jw = (-w / spec.cutoff_wc).exp();
        if t == 0.0 {
            jw * w
        } else if w < COTH_REGULARIZATION {
            jw * 2.0 * t
        } else {
            jw * w / (w / (2.0 * t)).tanh()
        }
    };
    let width = spec.natural_width();
    let cutoff = decay_cutoff(full, width, 1e-18);
    let tol = Tolerance::default();
    let k = fourier_integral(full, tau, Trig::Cos, cutoff, width, &tol);
    check_quadrature(tau, &k, &tol)?;
    let m = fourier_integral(
        |w: f64| w * (-w / spec.cutoff_wc).exp(),
        tau,
        Trig::Sin,
        cutoff,
        width,
        &tol,
    );
    check_quadrature(tau, &m, &tol)?;
    Ok((spec.alpha2() * k.value, spec.alpha2() * m.value))
}

/// `κ`, `μ` sampled on a shared time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub grid: TimeGrid,
    pub kappa: Vec<f64>,
    pub mu: Vec<f64>,
}

impl KernelTable {
    pub fn new(grid: TimeGrid, kappa: Vec<f64>, mu: Vec<f64>) -> Result<Self, KernelError> {
        grid.check_len(kappa.len())?;
        grid.check_len(mu.len())?;
        if mu[0] != 0.0 {
            return Err(KernelError::InvalidSpec(format!(
                "mu(0) must be 0, found {}",
                mu[0]
            )));
        }
        Ok(KernelTable { grid, kappa, mu })
    }

    /// All-zero kernels (uncoupled oscillator).
    pub fn zeros(grid: TimeGrid) -> Self {
        let n = grid.len();
        KernelTable {
            grid,
            kappa: vec![0.0; n],
            mu: vec![0.0; n],
        }
    }
}

/// Evaluates both kernels at every grid node.
pub fn tabulate_kernels(spec: &ReservoirSpec, grid: &TimeGrid) -> Result<KernelTable, KernelError> {
    spec.validate()?;
    let pairs: Vec<(f64, f64)> = grid
        .times()
        .par_iter()
        .map(|&t| Ok((kappa(spec, t)?, mu(spec, t)?)))
        .collect::<Result<_, KernelError>>()?;
    let (kappa, mu) = pairs.into_iter().unzip();
    KernelTable::new(grid.clone(), kappa, mu)
}

/// Long-time limits of the master-equation coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovianAsymptotes {
    pub delta_bar_inf: f64,
    pub pi_inf: f64,
    pub r_inf: f64,
    pub gamma_inf: f64,
}

/// Horizon of the τ-quadrature for the principal-value asymptotes.
const ASYMPTOTE_HORIZON: f64 = 200.0;

pub fn markovian_asymptotes(
    spec: &ReservoirSpec,
    omega0: f64,
) -> Result<MarkovianAsymptotes, KernelError> {
    spec.validate()?;
    if let Family::Tabulated(_) = spec.family {
        return Err(KernelError::UnsupportedFamily("tabulated"));
    }
    if spec.coupling_alpha == 0.0 {
        return Ok(MarkovianAsymptotes {
            delta_bar_inf: 0.0,
            pi_inf: 0.0,
            r_inf: 0.0,
            gamma_inf: 0.0,
        });
    }
    let resonance = spec.alpha2() * 0.5 * PI * spec.spectral_density(omega0)?;
    let coth = if spec.temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega0 / (2.0 * spec.temperature)).tanh()
    };
    let r_inf = 2.0 * tau_transform(|t| mu(spec, t), omega0, Trig::Cos)?;
    let pi_inf = tau_transform(|t| kappa(spec, t), omega0, Trig::Sin)?;
    Ok(MarkovianAsymptotes {
        delta_bar_inf: resonance * coth,
        pi_inf,
        r_inf,
        gamma_inf: resonance,
    })
}

/// `∫_0^∞ f(τ) trig(ω₀τ) dτ`: adaptive quadrature to the horizon plus a
/// two-term integration-by-parts estimate of the remaining tail.
fn tau_transform<F>(f: F, omega0: f64, trig: Trig) -> Result<f64, KernelError>
where
    F: Fn(f64) -> Result<f64, KernelError> + Sync,
{
    let period = 2.0 * PI / omega0;
    let panels = (ASYMPTOTE_HORIZON / (0.5 * period)).ceil() as usize;
    let horizon = panels as f64 * 0.5 * period;
    let width = 0.5 * period;
    let tol = Tolerance {
        rel: 1e-10,
        abs: 1e-13,
        max_depth: 20,
    };
    let trig_fn = move |t: f64| match trig {
        Trig::Cos => (omega0 * t).cos(),
        Trig::Sin => (omega0 * t).sin(),
    };
    // The innermost panel holds the kernel's fast structure; refine it.
    let parts: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let lo = k as f64 * width;
            let hi = lo + width;
            let failed = std::sync::Mutex::new(None);
            let r = quadrature::integrate_panels(
                |t| match f(t) {
                    Ok(v) => v * trig_fn(t),
                    Err(e) => {
                        failed.lock().unwrap().get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                if k == 0 { width / 16.0 } else { width },
                &tol,
            );
            if let Some(e) = failed.into_inner().unwrap() {
                return Err(e);
            }
            Ok(r.value)
        })
        .collect::<Result<_, KernelError>>()?;
    let body: f64 = parts.iter().sum();
    // ∫_L^∞ f e^{iωτ} ≈ −f(L)e^{iωL}/(iω) + f'(L)e^{iωL}/(iω)²
    let h = 1e-3;
    let fl = f(horizon)?;
    let dfl = (f(horizon + h)? - f(horizon - h)?) / (2.0 * h);
    let (s, c) = (omega0 * horizon).sin_cos();
    let tail = match trig {
        Trig::Cos => -fl * s / omega0 - dfl * c / (omega0 * omega0),
        Trig::Sin => fl * c / omega0 - dfl * s / (omega0 * omega0),
    };
    Ok(body + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic() -> ReservoirSpec {
        ReservoirSpec::ohmic_exp(0.1, 5.0, 0.0).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let s = ReservoirSpec::ohmic_exp(0.0, 5.0, 1.0).unwrap();
        assert_eq!(kappa(&s, 0.7).unwrap(), 0.0);
        assert_eq!(mu(&s, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_values() {
        let s = ohmic();
        assert!((kappa(&s, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(kappa(&s, 0.2).unwrap().abs() < 1e-15);
        assert!((mu(&s, 0.2).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(mu(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(ReservoirSpec::ohmic_exp(-0.1, 5.0, 0.0).is_err());
        assert!(ReservoirSpec::ohmic_exp(0.1, 0.0, 0.0).is_err());
        assert!(ReservoirSpec::ohmic_exp(0.1, 5.0, -1.0).is_err());
        assert!(kappa(&ohmic(), -1.0).is_err());
    }

    #[test]
    fn lorentz_drude_is_divergent_at_origin() {
        let s = ReservoirSpec::lorentz_drude(0.1, 5.0, 0.0).unwrap();
        assert!(matches!(kappa(&s, 0.0), Err(KernelError::Divergent { .. })));
        assert!(kappa(&s, 0.3).unwrap().is_finite());
        // small-ω behaviour J ≈ (2/π)ω fixes the long-time tail −α²(2/π)/τ²
        let k = kappa(&s, 40.0).unwrap();
        let tail = -0.01 * FRAC_2_PI / 1600.0;
        assert!((k / tail - 1.0).abs() < 0.01, "{k} vs {tail}");
    }

    #[test]
    fn tabulated_csv_round_trip() {
        let text = "tau,kappa,mu\n0,0.25,0\n0.5,0.1,0.05\n1.0,-0.02,0.01\n";
        let table = TabulatedKernel::from_csv_str(text).unwrap();
        let s = ReservoirSpec::tabulated(table);
        assert_eq!(kappa(&s, 0.5).unwrap(), 0.1);
        assert!((mu(&s, 0.25).unwrap() - 0.025).abs() < 1e-15);
        assert!(matches!(kappa(&s, 2.0), Err(KernelError::OutOfRange { .. })));
    }

    #[test]
    fn tabulated_csv_errors_carry_line_numbers() {
        let bad = "tau,kappa,mu\n0,0.25,0\n0.5,x,0.05\n";
        assert_eq!(
            TabulatedKernel::from_csv_str(bad).unwrap_err(),
            KernelError::Parse {
                line: 3,
                message: "`x` is not a number".into()
            }
        );
        assert!(TabulatedKernel::from_csv_str("t,k,m\n0,0,0\n").is_err());
        assert!(TabulatedKernel::from_csv_str("tau,kappa,mu\n0,1,0\n0,1,0\n").is_err());
    }

    #[test]
    fn markovian_asymptotes_at_zero_temperature() {
        let a = markovian_asymptotes(&ohmic(), 1.0).unwrap();
        let expected = 0.01 * 0.5 * PI * (-0.2f64).exp();
        assert!((a.gamma_inf - expected).abs() < 1e-15);
        assert!((a.gamma_inf - 0.012862).abs() < 1e-5);
        assert_eq!(a.delta_bar_inf, a.gamma_inf);
        assert!(a.r_inf.is_finite() && a.pi_inf.is_finite());
    }

    #[test]
    fn tabulated_family_has_no_asymptotes() {
        let t = TabulatedKernel::new(vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            markovian_asymptotes(&ReservoirSpec::tabulated(t), 1.0),
            Err(KernelError::UnsupportedFamily(_))
        ));
    }
}
