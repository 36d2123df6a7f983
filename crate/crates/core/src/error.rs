use std::path::PathBuf;

use thiserror::Error;

use crate::cli::{ConfigError, EllipseError};
use crate::coefficients::CoefficientError;
use crate::grid::GridError;
use crate::homogeneous::HomogeneousError;
use crate::kernels::KernelError;
use crate::oracle::OracleError;
use crate::propagator::PropagatorError;
use crate::qcf::QcfError;

/// Any failure of a full run, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("kernels: {0}")]
    Kernel(#[from] KernelError),
    #[error("coefficients: {0}")]
    Coefficients(#[from] CoefficientError),
    #[error("homogeneous: {0}")]
    Homogeneous(#[from] HomogeneousError),
    #[error("propagator: {0}")]
    Propagator(#[from] PropagatorError),
    #[error("qcf: {0}")]
    Qcf(#[from] QcfError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("ellipse: {0}")]
    Ellipse(#[from] EllipseError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for invalid input, 2 for numerical failure, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(ConfigError::Io { .. }) => EXIT_IO,
            Error::Config(_) | Error::Grid(_) | Error::Ellipse(_) => EXIT_VALIDATION,
            Error::Kernel(e) => kernel_code(e),
            Error::Coefficients(_) => EXIT_VALIDATION,
            Error::Homogeneous(e) => homogeneous_code(e),
            Error::Propagator(e) => match e {
                PropagatorError::Asymmetric(_) | PropagatorError::Singular(_) => EXIT_NUMERICAL,
                PropagatorError::Kernel(k) => kernel_code(k),
                PropagatorError::Homogeneous(h) => homogeneous_code(h),
                _ => EXIT_VALIDATION,
            },
            Error::Qcf(e) => match e {
                QcfError::ConventionMismatch { .. }
                | QcfError::DomainTooSmall { .. }
                | QcfError::TooCoarse { .. }
                | QcfError::ComplexWigner(_) => EXIT_NUMERICAL,
                QcfError::Io { .. } => EXIT_IO,
                _ => EXIT_VALIDATION,
            },
            Error::Oracle(e) => match e {
                OracleError::Leakage { .. } | OracleError::Truncation { .. } => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            },
            Error::Io { .. } => EXIT_IO,
        }
    }
}

fn kernel_code(e: &KernelError) -> i32 {
    match e {
        KernelError::Quadrature { .. } | KernelError::Divergent { .. } => EXIT_NUMERICAL,
        KernelError::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn homogeneous_code(e: &HomogeneousError) -> i32 {
    match e {
        HomogeneousError::Unstable { .. } | HomogeneousError::NegativeFrequency { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}
