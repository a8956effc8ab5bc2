use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("unknown experiment {0}")]
    UnknownExperiment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read input {0}")]
    Input(String),

    #[error("the {0} experiment needs a zero table (--zeros)")]
    MissingZeroTable(&'static str),

    #[error("cannot write output {path}: {source}")]
    Output { path: String, source: std::io::Error },

    #[error(transparent)]
    Compute(#[from] zetalab::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::UnknownExperiment(_) => "unknown_experiment",
            CliError::Config(_) => "invalid_config",
            CliError::Input(_) => "input",
            CliError::MissingZeroTable(_) => "missing_zero_table",
            CliError::Output { .. } => "output",
            CliError::Compute(_) => "computation",
        }
    }

    /// 2 for problems with the request, 1 for failures while running it.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } | CliError::Compute(_) => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
