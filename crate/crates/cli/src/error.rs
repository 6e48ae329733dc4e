// SPDX-License-Identifier: Apache-2.0

use hqisweep::analysis::AnalysisError;
use hqisweep::config::ConfigError;
use hqisweep::edaflow::EdaError;
use hqisweep::generation::GenerationError;
use hqisweep::report::ReportError;
use hqisweep::sweep::SweepError;
use hqisweep::taskset::TasksetError;

pub const OTHER: u8 = 1;
pub const VALIDATION: u8 = 2;
pub const INCOMPLETE: u8 = 3;
pub const TOOLING: u8 = 4;

/// A message plus the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: VALIDATION, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        CliError { code: OTHER, message: message.into() }
    }

    fn with(code: u8, e: impl std::fmt::Display) -> Self {
        CliError { code, message: e.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::with(VALIDATION, e)
    }
}

impl From<TasksetError> for CliError {
    fn from(e: TasksetError) -> Self {
        CliError::with(VALIDATION, e)
    }
}

impl From<GenerationError> for CliError {
    fn from(e: GenerationError) -> Self {
        let code = match e {
            GenerationError::Endpoint(_) => TOOLING,
            _ => VALIDATION,
        };
        CliError::with(code, e)
    }
}

impl From<EdaError> for CliError {
    fn from(e: EdaError) -> Self {
        let code = match e {
            EdaError::ToolMissing(_) | EdaError::Config(_) => TOOLING,
            EdaError::GoldenFailed { .. } => VALIDATION,
            EdaError::Io(_) | EdaError::SynthParse(_) => OTHER,
        };
        CliError::with(code, e)
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Incomplete(_) => CliError::with(INCOMPLETE, e),
            SweepError::Domain(_) => CliError::with(VALIDATION, e),
            SweepError::Eda(inner) => inner.into(),
            SweepError::Store { .. } | SweepError::Metrics(_) => CliError::with(OTHER, e),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::with(OTHER, e)
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Sweep(s) => s.into(),
            ReportError::Analysis(a) => a.into(),
            ReportError::Metrics(_) => CliError::with(OTHER, e),
            ReportError::Unavailable(_) => CliError::with(VALIDATION, e),
        }
    }
}
