//! Config-driven runs, artifact writing and the phase-space ellipse.

mod config;
mod ellipse;
mod run;

pub use config::{parse_config, parse_config_str, ConfigError, FamilyName, RunConfig, StateConfig, WignerConfig};
pub use ellipse::{emit_ellipse, write_ellipse_csv, Ellipse, EllipseError, ELLIPSE_POINTS};
pub use run::{diff_observables, run, DiffReport, DiffRow, RunSummary};
