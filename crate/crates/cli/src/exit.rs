//! Error-to-exit-code mapping: 1 usage, 2 data, 3 numerical.

use molforge::train::TrainError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn data(e: impl fmt::Display) -> CliError {
        CliError::Data(e.to_string())
    }

    pub fn usage(e: impl fmt::Display) -> CliError {
        CliError::Usage(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> CliError {
        match &e {
            TrainError::Diverged { .. } => CliError::Numerical(e.to_string()),
            TrainError::Model(molforge::model::ModelError::NonFiniteLoss) => {
                CliError::Numerical(e.to_string())
            }
            TrainError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<molforge::model::ModelError> for CliError {
    fn from(e: molforge::model::ModelError) -> CliError {
        match e {
            molforge::model::ModelError::NonFiniteLoss => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<molforge::corpus::CorpusError> for CliError {
    fn from(e: molforge::corpus::CorpusError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}
