use thiserror::Error;

/// Failure modes shared by every simulation routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied value is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A computation produced a value it cannot recover from.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The walk visited a site for which no scenery value was supplied.
    #[error("scenery undefined at site {0}")]
    MissingScenery(i64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
