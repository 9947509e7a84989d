//! Driver errors and their exit statuses.

use serde::Serialize;
use thiserror::Error;

use crate::plot::PlotError;
use crate::table::TableError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config{}: {message}", field.as_ref().map(|f| format!(" at `{f}`")).unwrap_or_default())]
    Config { field: Option<String>, message: String },
    #[error("solver failure: {0}")]
    Solver(meissner_core::Error),
    #[error("acceptance failed: {0}")]
    Acceptance(String),
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { field: None, message: message.into() }
    }

    pub fn at(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: Some(field.into()), message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Plot(_) | CliError::Table(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Acceptance(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "CONFIG_INVALID",
            CliError::Solver(_) => "SOLVER_FAILURE",
            CliError::Acceptance(_) => "ACCEPTANCE_FAILURE",
            CliError::Io { .. } => "IO",
            CliError::Plot(_) => "PLOT_INPUT_INVALID",
            CliError::Table(_) => "TABLE_INVALID",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let field = match self {
            CliError::Config { field, .. } => field.clone(),
            CliError::Plot(PlotError::MissingColumn(c) | PlotError::NonPositiveLogData(c) | PlotError::NonNumeric(c)) => {
                Some(c.clone())
            }
            _ => None,
        };
        ErrorReport { error: self.kind(), exit_code: self.exit_code(), message: self.to_string(), field }
    }
}

/// Core errors that describe bad input are configuration failures; the rest
/// happened inside a solve.
impl From<meissner_core::Error> for CliError {
    fn from(e: meissner_core::Error) -> Self {
        use meissner_core::Error as E;
        match e {
            E::InvalidSpec(_)
            | E::InvalidParameters(_)
            | E::InvalidData(_)
            | E::ZeroDatum
            | E::NonGradientData
            | E::NonzeroMean(_)
            | E::NonzeroFlux(_)
            | E::Incompatible { .. }
            | E::AboveThreshold { .. }
            | E::NonPositiveCoefficient(_) => CliError::config(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

/// Machine-readable error printed on every nonzero exit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}
