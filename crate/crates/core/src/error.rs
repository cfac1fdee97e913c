use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// Distribution or problem parameters failed validation at construction.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The family does not have an eventually concave hazard function.
    #[error("hazard function not eventually concave under this family restriction: {0}")]
    NotEventuallyConcave(String),

    /// A registry lookup failed.
    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    /// A metric is undefined for the given inputs.
    #[error("undefined: {0}")]
    Undefined(&'static str),

    /// A brute-force reference failed to reach its tolerance.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    /// The request is outside what the operation supports.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
