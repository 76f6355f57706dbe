use crystal_hydro::Error as CoreError;
use thiserror::Error;

use crate::profile::ParseError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad input: spec, config, profile or arguments.
    #[error("{0}")]
    Invalid(String),

    #[error("profile: {0}")]
    Profile(#[from] ParseError),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// 1 for validation failures, 2 for runtime errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Invalid(_) | HarnessError::Profile(_) => 1,
            HarnessError::Core(CoreError::Malformed(_) | CoreError::InvalidGraph(_) | CoreError::DimensionMismatch { .. }) => 1,
            _ => 2,
        }
    }
}
