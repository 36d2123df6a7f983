//! Flat `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kernels::{ReservoirSpec, TabulatedKernel};
use crate::propagator::Mode;
use crate::qcf::{InitialState, TabulatedChi};
use crate::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: expected `section.key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey {
        line: usize,
        key: String,
        suggestion: Option<String>,
    },
    #[error("line {line}: `{key}` already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("line {line}: `{key}` expects {expected}, found `{found}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: `{key}` {message}")]
    Invalid {
        line: usize,
        key: String,
        message: String,
    },
}

const KEYS: &[&str] = &[
    "reservoir.family",
    "reservoir.alpha",
    "reservoir.wc",
    "reservoir.temperature",
    "reservoir.kernel_csv",
    "oscillator.omega0",
    "state.kind",
    "state.x0",
    "state.p0",
    "state.nbar",
    "state.r",
    "state.phi",
    "state.n",
    "state.chi_csv",
    "grid.dt",
    "grid.t_max",
    "run.modes",
    "output.dir",
    "oracle.d",
    "oracle.leakage",
    "wigner.enabled",
    "wigner.times",
    "wigner.extent",
    "wigner.points",
    "wigner.z_points",
    "wigner.z_extent",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyName {
    OhmicExp,
    LorentzDrude,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateConfig {
    Coherent { x0: f64, p0: f64 },
    Thermal { nbar: f64 },
    Squeezed { r: f64, phi: f64 },
    Fock { n: u32 },
    Tabulated { chi_csv: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerConfig {
    pub enabled: bool,
    pub times: Vec<f64>,
    pub extent: f64,
    pub points: usize,
    pub z_points: usize,
    pub z_extent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub family: FamilyName,
    pub alpha: f64,
    pub wc: f64,
    pub temperature: f64,
    pub kernel_csv: Option<PathBuf>,
    /// Always 1; accepted in the file only as documentation.
    pub omega0: f64,
    pub state: StateConfig,
    pub dt: f64,
    pub t_max: f64,
    /// Analytic modes, in file order without repeats.
    pub modes: Vec<Mode>,
    pub oracle: bool,
    pub output_dir: PathBuf,
    pub oracle_d: usize,
    pub oracle_leakage: f64,
    pub wigner: WignerConfig,
}

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    map: BTreeMap<String, Entry>,
}

impl Fields {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|e| (e.line, e.value.as_str()))
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.line)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| ConfigError::Type {
                line,
                key: key.to_string(),
                expected,
                found: v.to_string(),
            }),
        }
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.parsed::<f64>(key, "a number")?.unwrap_or(default))
    }

    fn required_real(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.parsed::<f64>(key, "a number")?.ok_or(ConfigError::Missing(key))
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            line: self.line(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn check(&self, key: &str, ok: bool, message: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.invalid(key, message))
        }
    }
}

fn suggest(key: &str) -> Option<String> {
    let tail = key.rsplit('.').next().unwrap_or(key);
    KEYS.iter()
        .map(|k| {
            let k_tail = k.rsplit('.').next().unwrap_or(k);
            let score = strsim::jaro_winkler(key, k).max(strsim::jaro_winkler(tail, k_tail));
            (score, *k)
        })
        .filter(|(s, _)| *s > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string())
}

/// Reads and validates a config file. Relative paths inside it are taken
/// relative to the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
                suggestion: suggest(key),
            });
        }
        if let Some(prev) = map.get(key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
                first: prev.line,
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    build(&Fields { map }, base)
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn build(f: &Fields, base: &Path) -> Result<RunConfig, ConfigError> {
    let family = match f.raw("reservoir.family").map(|(_, v)| v) {
        None | Some("ohmic_exp") => FamilyName::OhmicExp,
        Some("lorentz_drude") => FamilyName::LorentzDrude,
        Some("tabulated") => FamilyName::Tabulated,
        Some(other) => {
            return Err(f.invalid(
                "reservoir.family",
                format!("must be ohmic_exp, lorentz_drude or tabulated, not `{other}`"),
            ))
        }
    };
    let kernel_csv = f.raw("reservoir.kernel_csv").map(|(_, v)| resolve(base, v));
    let alpha = if family == FamilyName::Tabulated {
        f.real("reservoir.alpha", 0.0)?
    } else {
        f.required_real("reservoir.alpha")?
    };
    f.check("reservoir.alpha", alpha.is_finite() && alpha >= 0.0, "must be finite and non-negative")?;
    let wc = f.real("reservoir.wc", 5.0)?;
    f.check("reservoir.wc", wc.is_finite() && wc > 0.0, "must be positive")?;
    let temperature = f.real("reservoir.temperature", 0.0)?;
    f.check("reservoir.temperature", temperature.is_finite() && temperature >= 0.0, "must be non-negative")?;
    match (family, &kernel_csv) {
        (FamilyName::Tabulated, None) => return Err(ConfigError::Missing("reservoir.kernel_csv")),
        (FamilyName::Tabulated, Some(_)) | (_, None) => {}
        (_, Some(_)) => {
            return Err(f.invalid("reservoir.kernel_csv", "is only used with reservoir.family = tabulated"))
        }
    }

    let omega0 = f.real("oscillator.omega0", 1.0)?;
    f.check("oscillator.omega0", omega0 == 1.0, "is fixed to 1 (all quantities are in units of omega0)")?;

    let state = match f.raw("state.kind").map(|(_, v)| v).unwrap_or("coherent") {
        "coherent" => StateConfig::Coherent {
            x0: f.real("state.x0", 0.0)?,
            p0: f.real("state.p0", 0.0)?,
        },
        "thermal" => {
            let nbar = f.real("state.nbar", 0.0)?;
            f.check("state.nbar", nbar >= 0.0, "must be non-negative")?;
            StateConfig::Thermal { nbar }
        }
        "squeezed" => StateConfig::Squeezed {
            r: f.real("state.r", 0.0)?,
            phi: f.real("state.phi", 0.0)?,
        },
        "fock" => StateConfig::Fock {
            n: f.parsed::<u32>("state.n", "a non-negative integer")?.unwrap_or(0),
        },
        "tabulated" => StateConfig::Tabulated {
            chi_csv: f
                .raw("state.chi_csv")
                .map(|(_, v)| resolve(base, v))
                .ok_or(ConfigError::Missing("state.chi_csv"))?,
        },
        other => {
            return Err(f.invalid(
                "state.kind",
                format!("must be coherent, thermal, squeezed, fock or tabulated, not `{other}`"),
            ))
        }
    };

    let dt = f.required_real("grid.dt")?;
    f.check("grid.dt", dt.is_finite() && dt > 0.0, "must be positive")?;
    let t_max = f.required_real("grid.t_max")?;
    f.check("grid.t_max", t_max.is_finite() && t_max >= dt, "must be at least grid.dt")?;

    let (_, modes_raw) = f.raw("run.modes").ok_or(ConfigError::Missing("run.modes"))?;
    let mut modes = Vec::new();
    let mut oracle = false;
    for name in list(modes_raw) {
        if name == "oracle" {
            oracle = true;
            continue;
        }
        let mode: Mode = name.parse().map_err(|_| {
            f.invalid(
                "run.modes",
                format!("lists unknown mode `{name}` (expected full, norenorm, rwa, oracle)"),
            )
        })?;
        if !modes.contains(&mode) {
            modes.push(mode);
        }
    }
    f.check("run.modes", oracle || !modes.is_empty(), "must name at least one mode")?;

    let output_dir = resolve(base, f.raw("output.dir").map_or("out", |(_, v)| v));
    let oracle_d = f.parsed::<usize>("oracle.d", "a positive integer")?.unwrap_or(30);
    f.check("oracle.d", oracle_d >= crate::oracle::MIN_DIMENSION, "must be at least 8")?;
    let oracle_leakage = f.real("oracle.leakage", 1e-6)?;
    f.check("oracle.leakage", oracle_leakage > 0.0, "must be positive")?;

    let enabled = f.parsed::<bool>("wigner.enabled", "true or false")?.unwrap_or(false);
    let times = match f.raw("wigner.times") {
        None => vec![t_max],
        Some((line, v)) => list(v)
            .map(|s| {
                s.parse::<f64>().map_err(|_| ConfigError::Type {
                    line,
                    key: "wigner.times".into(),
                    expected: "a comma-separated list of numbers",
                    found: v.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    f.check(
        "wigner.times",
        times.iter().all(|t| (0.0..=t_max).contains(t)),
        "must lie within [0, grid.t_max]",
    )?;
    let extent = f.real("wigner.extent", 5.0)?;
    f.check("wigner.extent", extent > 0.0, "must be positive")?;
    let points = f.parsed::<usize>("wigner.points", "a positive integer")?.unwrap_or(101);
    f.check("wigner.points", points >= 2, "must be at least 2")?;
    let z_points = f.parsed::<usize>("wigner.z_points", "a positive integer")?.unwrap_or(256);
    f.check("wigner.z_points", z_points >= 8, "must be at least 8")?;
    let z_extent = f.parsed::<f64>("wigner.z_extent", "a number")?;
    if let Some(z) = z_extent {
        f.check("wigner.z_extent", z > 0.0, "must be positive")?;
    }

    Ok(RunConfig {
        family,
        alpha,
        wc,
        temperature,
        kernel_csv,
        omega0,
        state,
        dt,
        t_max,
        modes,
        oracle,
        output_dir,
        oracle_d,
        oracle_leakage,
        wigner: WignerConfig {
            enabled,
            times,
            extent,
            points,
            z_points,
            z_extent,
        },
    })
}

impl RunConfig {
    pub fn reservoir_spec(&self) -> Result<ReservoirSpec, Error> {
        Ok(match self.family {
            FamilyName::OhmicExp => ReservoirSpec::ohmic_exp(self.alpha, self.wc, self.temperature)?,
            FamilyName::LorentzDrude => ReservoirSpec::lorentz_drude(self.alpha, self.wc, self.temperature)?,
            FamilyName::Tabulated => {
                let path = self.kernel_csv.as_ref().ok_or(ConfigError::Missing("reservoir.kernel_csv"))?;
                ReservoirSpec::tabulated(TabulatedKernel::from_csv_path(path)?)
            }
        })
    }

    pub fn initial_state(&self) -> Result<InitialState, Error> {
        Ok(match &self.state {
            StateConfig::Coherent { x0, p0 } => InitialState::coherent(*x0, *p0)?,
            StateConfig::Thermal { nbar } => InitialState::thermal(*nbar)?,
            StateConfig::Squeezed { r, phi } => InitialState::squeezed(*r, *phi)?,
            StateConfig::Fock { n } => InitialState::fock(*n),
            StateConfig::Tabulated { chi_csv } => InitialState::tabulated(TabulatedChi::from_csv_path(chi_csv)?),
        })
    }
}
