use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A model, tuple or family handed to an operation does not fit the model.
    #[error("invalid input: {0}")]
    Input(String),

    /// A rule construction mode was requested for a constraint form that does not support it.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    /// The queried pair was never withdrawn during the traced iteration.
    ///
    /// This does not mean that no explanation exists: a failure-cut iteration may stop
    /// before the closure removes the value.
    #[error("({value}, {var}) was not withdrawn in this trace")]
    NotInTrace { value: i64, var: String },

    /// A trace or explanation violates an internal invariant.
    #[error("internal consistency error: {0}")]
    Internal(String),
}
