use thiserror::Error;

/// Failures of the harness itself, as opposed to per-row evaluation failures.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] varjac_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse input: {0}")]
    Parse(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(varjac_core::Error::Convergence { .. }) => exit::CONVERGENCE,
            HarnessError::Core(varjac_core::Error::Consistency(_)) => exit::CONSISTENCY,
            _ => exit::CONFIG,
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Parse(e.to_string())
    }
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
    pub const CONSISTENCY: i32 = 4;
}
