use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive enumeration would exceed its budget.
    #[error("resource guard: {what} needs {needed} but the budget allows {budget}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
