use std::path::PathBuf;

use cca_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const INVALID_PARAMETER: u8 = 3;
    pub const NUMERICAL_FAILURE: u8 = 4;
    pub const PRECONDITION: u8 = 5;
    pub const VALIDATION_FAILED: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Quadrature { .. }
                | CoreError::SeriesDivergence { .. }
                | CoreError::EigenFailure
                | CoreError::BesselRange { .. } => exit::NUMERICAL_FAILURE,
                CoreError::InsufficientWindow { .. }
                | CoreError::Unreachable { .. }
                | CoreError::LatticeSize(_)
                | CoreError::SiteOutOfRange { .. }
                | CoreError::WrapViolation { .. } => exit::PRECONDITION,
                _ => exit::INVALID_PARAMETER,
            },
            CliError::Config(_) => exit::INVALID_PARAMETER,
            CliError::Io { .. } | CliError::Csv { .. } => exit::IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_error_class() {
        let quad = CoreError::Quadrature {
            estimate: Default::default(),
            error: 1.0,
            tolerance: 1e-300,
            panels: 10,
        };
        assert_eq!(CliError::from(quad).exit_code(), exit::NUMERICAL_FAILURE);
        let wrap = CoreError::WrapViolation {
            t_max: 1.0,
            limit: 0.5,
        };
        assert_eq!(CliError::from(wrap).exit_code(), exit::PRECONDITION);
        assert_eq!(
            CliError::from(CoreError::Degenerate("g = 0")).exit_code(),
            exit::INVALID_PARAMETER
        );
        let io = CliError::io("x")(std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), exit::IO);
    }
}
