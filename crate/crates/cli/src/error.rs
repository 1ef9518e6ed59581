use std::io;

use drinfeld_core::drinfeld::DrinfeldError;
use drinfeld_core::extend::ExtendError;
use drinfeld_core::sheaves::SheafError;
use drinfeld_core::FfError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}:{column}: parse error: {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("{}schema error at {at}: {msg}", path.as_ref().map(|p| format!("{p}: ")).unwrap_or_default())]
    Schema { path: Option<String>, at: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Cap(_) => 3,
            _ => 2,
        }
    }

    pub fn in_file(self, file: &str) -> CliError {
        match self {
            CliError::Schema { path: None, at, msg } => CliError::Schema { path: Some(file.into()), at, msg },
            other => other,
        }
    }
}

fn classify(cap: bool, msg: String) -> CliError {
    if cap {
        CliError::Cap(msg)
    } else {
        CliError::Input(msg)
    }
}

impl From<FfError> for CliError {
    fn from(e: FfError) -> Self {
        classify(matches!(e, FfError::CapExceeded { .. }), e.to_string())
    }
}

impl From<DrinfeldError> for CliError {
    fn from(e: DrinfeldError) -> Self {
        classify(e.is_cap_exceeded(), e.to_string())
    }
}

impl From<ExtendError> for CliError {
    fn from(e: ExtendError) -> Self {
        classify(e.is_cap_exceeded(), e.to_string())
    }
}

impl From<SheafError> for CliError {
    fn from(e: SheafError) -> Self {
        classify(e.is_cap_exceeded(), e.to_string())
    }
}
