use innometer::corpus::{CorpusError, EngineConfigError};
use innometer::evidence::EvidenceError;
use innometer::evolver::EvolverError;
use innometer::indicators::IndicatorError;
use innometer::pattern::PatternError;
use innometer::SourceError;
use thiserror::Error;

/// Failures grouped by exit status: bad input (2) or a failing source (3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Source(String),
}

impl CliError {
    pub fn input(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Source(_) => 3,
        }
    }
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        CliError::Source(e.to_string())
    }
}

impl From<EngineConfigError> for CliError {
    fn from(e: EngineConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EvidenceError> for CliError {
    fn from(e: EvidenceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<IndicatorError> for CliError {
    fn from(e: IndicatorError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EvolverError> for CliError {
    fn from(e: EvolverError) -> Self {
        match e {
            EvolverError::Source(e) => e.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}
