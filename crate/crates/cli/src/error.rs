//! CLI error type carrying the exit-code contract:
//! 1 = computation failed, 2 = configuration error, 3 = budget exceeded.

use qflab_core::analysis::AnalysisError;
use qflab_core::escape::EscapeError;
use qflab_core::loggrowth::GrowthError;
use qflab_core::maps::MapError;
use qflab_core::topology::TopologyError;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration; names the offending key where one exists.
    Config { key: Option<String>, message: String },
    /// A declared resource limit (profile reach, ladder length, cell
    /// budget) was hit before the computation could finish.
    Budget(String),
    /// The computation itself failed.
    Computation(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config { key: Some(key.to_string()), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Computation(_) => 1,
            CliError::Config { .. } => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { key: Some(key), message } => {
                write!(f, "config error: key '{key}': {message}")
            }
            CliError::Config { key: None, message } => write!(f, "config error: {message}"),
            CliError::Budget(message) => write!(f, "budget exceeded: {message}"),
            CliError::Computation(message) => write!(f, "computation failed: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::ProfileExhausted { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<MapError<f64>> for CliError {
    fn from(e: MapError<f64>) -> Self {
        match e {
            MapError::Growth(g) => g.into(),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<EscapeError<f64>> for CliError {
    fn from(e: EscapeError<f64>) -> Self {
        match e {
            EscapeError::Map(m) => m.into(),
            EscapeError::LadderTooShort { .. } | EscapeError::LadderExhaustedForK2(_) => {
                CliError::Budget(e.to_string())
            }
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::TooManyCells { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<AnalysisError<f64>> for CliError {
    fn from(e: AnalysisError<f64>) -> Self {
        match e {
            AnalysisError::InvalidParameter(message) => CliError::Config { key: None, message },
            AnalysisError::Map(m) => m.into(),
            AnalysisError::Escape(s) => s.into(),
            AnalysisError::Topology(t) => t.into(),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Computation(format!("I/O: {e}"))
    }
}
