use kinetics_core::KineticsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid config key `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error(transparent)]
    Kinetics(#[from] KineticsError),

    #[error("cannot write `{path}`: {source}")]
    Output { path: String, source: std::io::Error },

    #[error("cannot read `{path}`: {source}")]
    Input { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Kinetics(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}
