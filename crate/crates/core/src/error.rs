use thiserror::Error;

use crate::lattice::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed lattice spec: {0}")]
    Malformed(String),

    #[error("invalid quotient graph: {}", format_diagnostics(.0))]
    InvalidGraph(Vec<Diagnostic>),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fugacity {phi} is outside the radius of convergence")]
    BeyondRadius { phi: f64 },

    #[error("density {alpha} is outside the range of R")]
    DensityOutOfRange { alpha: f64 },

    #[error("state space too large: {0}")]
    StateSpaceTooLarge(String),

    #[error("unstable time step {dt} (limit {limit})")]
    UnstableTimeStep { dt: f64, limit: f64 },

    #[error("spectral solver requires a linear response")]
    NonlinearResponse,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("maximum principle violated: {0}")]
    MaximumPrinciple(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
