use thiserror::Error;

/// Errors raised by geometry, graph, and solver operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A builder or operation precondition does not hold for the given rays.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Geometry collapsed (coincident rays, a ray at the pole, no admissible plan).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("ray lies outside the gnomonic chart (angle to pole {angle:.12} rad)")]
    OutOfChart { angle: f64 },

    #[error("certification rejected: max |<x,y>| = {max_inner:.3e} exceeds {ortho_eps:.1e}")]
    CertificationRejected { max_inner: f64, ortho_eps: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
