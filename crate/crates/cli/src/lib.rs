//! Scenario runner and verification suite on top of the `stoqlab` library.
//!
//! * [`config`]: flat dotted-key configs, parsed and validated in one pass.
//! * [`scenario`]: runs one scenario and writes its CSV/JSON artifacts plus
//!   `manifest.json`.
//! * [`verify`]: the acceptance suite with its pass/fail report.

pub mod analysis;
pub mod config;
pub mod scenario;
pub mod setup;
pub mod verify;

pub use config::{parse_config, parse_config_with, ConfigError, ConfigErrors, Scenario, ScenarioConfig};
pub use scenario::{run_scenario, RunOutcome};
pub use verify::{run_suite, CheckStatus, SuiteOptions, VerifyReport};

/// Process exit status of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    CheckFailure,
    InvalidInput,
    InternalError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::CheckFailure => 1,
            ExitStatus::InvalidInput => 2,
            ExitStatus::InternalError => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad configuration or a violated precondition (exit 2).
    #[error("{0}")]
    Invalid(String),
    /// Numerical or I/O failure (exit 3).
    #[error("{0}")]
    Internal(String),
}

impl RunError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            RunError::Invalid(_) => ExitStatus::InvalidInput,
            RunError::Internal(_) => ExitStatus::InternalError,
        }
    }
}

impl From<stoqlab::Error> for RunError {
    fn from(e: stoqlab::Error) -> Self {
        use stoqlab::Error as E;
        match e {
            E::InvalidGrid(_) | E::GridMismatch(_) | E::InvalidParameter { .. } | E::Precondition(_) => {
                RunError::Invalid(e.to_string())
            }
            E::NonFinite { .. } | E::EigenNonConvergence { .. } | E::SingularMatrix { .. } | E::Io(_) => {
                RunError::Internal(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Internal(e.to_string())
    }
}
