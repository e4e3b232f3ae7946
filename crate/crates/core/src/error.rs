use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// The variants are grouped the way callers need to react to them: bad input,
/// numerically unusable problems, and exhausted resource budgets.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    #[error("variance is undefined for rows {rows:?}")]
    UndefinedVariance { rows: Vec<usize> },

    #[error("division domain error: {0}")]
    DivisionDomain(String),

    #[error("resource limit exceeded: {what} (cap {cap})")]
    Resource { what: String, cap: usize },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn conditioning(msg: impl Into<String>) -> Self {
        Error::Conditioning(msg.into())
    }

    /// True for errors caused by malformed or out-of-domain arguments.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::DivisionDomain(_))
    }

    /// True for numerical failures (conditioning, undefined moments).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Conditioning(_) | Error::UndefinedVariance { .. })
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}
