use shockrec_core::config::ConfigError;
use shockrec_core::{FlowError, HhtError, ModelError, PhiError, ScaleError};

/// Command failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input, configuration or usage (exit 2).
    Input(String),
    /// The price model left its valid region (exit 3).
    Model(String),
    /// The series cannot be analyzed (exit 4).
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Model(_) => 3,
            CliError::Analysis(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Model(m) | CliError::Analysis(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PhiError> for CliError {
    fn from(e: PhiError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonPositivePrice { .. } | ModelError::ThreadPool(_) => CliError::Model(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<HhtError> for CliError {
    fn from(e: HhtError) -> Self {
        match e {
            HhtError::TooShort { .. } | HhtError::NonFiniteInput { .. } => CliError::Input(e.to_string()),
            HhtError::NotOscillatory | HhtError::EmptyValidRange => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<ScaleError> for CliError {
    fn from(e: ScaleError) -> Self {
        match e {
            ScaleError::LengthMismatch { .. } | ScaleError::TooShort { .. } => CliError::Input(e.to_string()),
            _ => CliError::Analysis(e.to_string()),
        }
    }
}
