use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the numerical kernels, the channel representations and
/// the reconstruction algorithms.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max defect {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max defect {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace violation: trace {0:.12} differs from the expected value")]
    TraceViolation(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate image spectrum (gap {gap:.3e} below tolerance)")]
    DegenerateImage { gap: f64 },

    #[error("Gram-Schmidt residual {residual:.3e} for candidate {index}: candidates are not a basis")]
    LinearDependence { index: usize, residual: f64 },

    #[error("phase of column {column} undefined: overlap {overlap:.3e}")]
    PhaseUndefined { column: usize, overlap: f64 },

    #[error("trace product has imaginary part {0:.3e}")]
    NonRealResult(f64),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("invalid output rank {rank} for dimension {dim}")]
    InvalidRank { rank: u64, dim: u64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Warning {
    /// Leading eigenvalues of the inspected spectrum nearly coincide.
    NearDegenerate,
    /// The channel's unitarity estimate is below the configured threshold.
    LowUnitarity,
    /// An eigenphase sits on the branch cut of the principal logarithm.
    BranchAmbiguity,
    /// The matrix handed to the polar projection is (numerically) singular.
    RankDeficient,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Warning::NearDegenerate => "near-degenerate",
            Warning::LowUnitarity => "low-unitarity",
            Warning::BranchAmbiguity => "branch-ambiguity",
            Warning::RankDeficient => "rank-deficient",
        };
        f.write_str(s)
    }
}
