use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const SIZE_CAP: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] catalysis::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: catalysis::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use catalysis::Error as E;
        match self {
            CliError::Core(e) | CliError::Input { source: e, .. } => match e {
                E::SizeCap { .. } | E::OracleCap { .. } => exit::SIZE_CAP,
                E::UndefinedRate(_) | E::NoFiniteN(_) | E::NotMajorized | E::FiniteTemperature => {
                    exit::INFEASIBLE
                }
                _ => exit::INPUT,
            },
            CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::Io { .. } | CliError::Config(_) | CliError::Csv(_) => exit::INPUT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
