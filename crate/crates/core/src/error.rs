use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the lattice library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter lies outside the domain where the object is defined.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Weighted norm with a negative power and mass at the weight's center.
    #[error("singular weight: power {power} is negative and the sequence is nonzero at the center")]
    SingularWeight { power: f64 },

    /// Window or grid geometry does not fit the requested operation.
    #[error("window mismatch: {0}")]
    Window(String),

    /// A grid value is NaN or infinite.
    #[error("non-finite value at linear index {index}")]
    NonFinite { index: usize },

    /// The requested construction has no nontrivial solution.
    #[error("infeasible construction: {0}")]
    Infeasible(String),

    /// An experiment configuration violates a parameter relation.
    #[error("invalid configuration: {relation}")]
    Config { relation: String },

    /// An input file could not be parsed.
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}
