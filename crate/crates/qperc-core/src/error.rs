use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The request would exceed a hard resource limit (qubit cap, search budget).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A circuit or layout is malformed (index out of range, overlapping registers, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A value cannot be represented in the chosen fixed-point encoding.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// Malformed assembly text.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Random search exhausted its query budget without finding a separator.
    #[error("search budget exhausted after {0} queries")]
    Budget(u64),

    /// An operation that requires at least one marked state was asked for none.
    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
