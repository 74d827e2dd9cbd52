use thiserror::Error;

/// Errors carry the CLI exit-code class they map to.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a function or family.
    #[error("domain error: {0}")]
    Domain(String),
    /// A precondition or schema check failed.
    #[error("validation failed: {0}")]
    Validation(String),
    /// An algorithm did not converge or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The requested quantity has no available representation.
    #[error("unavailable: {0}")]
    Unavailable(String),
}

impl Error {
    /// Exit code under the CLI contract: 2 for validation-type, 3 for numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
