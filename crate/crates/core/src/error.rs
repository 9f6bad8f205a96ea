use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("invalid input: {0}")]
    Input(String),
    /// A documented precondition does not hold for otherwise well-formed input.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The value lies outside the monoid a map is defined on.
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no admissible representative: {0}")]
    EmptyChoice(String),
    /// A configured bound (depth, witness exponent, degree) was exhausted.
    #[error("resource limit reached: {0}")]
    Resource(String),
    /// An internally produced certificate failed its own re-check.
    #[error("certificate check failed: {0}")]
    Certification(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            Error::Certification(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
