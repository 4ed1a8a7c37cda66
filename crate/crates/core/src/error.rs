use thiserror::Error;

/// Failures raised by the numeric kernels.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request would exceed a configured enumeration or memory budget.
    #[error("{what} needs {requested}, over the budget of {budget}{hint}")]
    Resource {
        what: &'static str,
        requested: u128,
        budget: u128,
        hint: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: &'static str, requested: u128, budget: u128) -> Self {
        Error::Resource {
            what,
            requested,
            budget,
            hint: "",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
