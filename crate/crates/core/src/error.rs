use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("degenerate family: tau1 = tau2 with beta3 != 0")]
    DegenerateFamily,
    #[error("family error: {0}")]
    Family(String),
    #[error("no sign change in bracket [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
