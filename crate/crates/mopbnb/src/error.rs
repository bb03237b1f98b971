use thiserror::Error;

/// Errors surfaced by the solver library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown problem id {0:?} (known: zdt1, zdt2, zdt3, ff)")]
    UnknownProblem(String),

    #[error("unknown optimizer id {0:?} (known: mopbnb-so, mopbnb-wr, uniform, nsga2)")]
    UnknownOptimizer(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
