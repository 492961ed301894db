use thiserror::Error;

use crate::cremona::{HomaloidalType, QuadraticStep};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Noether's loop reached a triple containing an infinitely near point.
    /// Carries the steps performed so far and the type that blocked.
    #[error("infinitely near obstruction at base point {point} after {} step(s)", .steps.len())]
    InfinitelyNearObstruction {
        point: usize,
        steps: Vec<QuadraticStep>,
        obstruction: Box<HomaloidalType>,
    },

    #[error("degenerate result: {0}")]
    DegenerateResult(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid resolution graph: {0}")]
    InvalidGraph(String),

    #[error("function is not compatible with the graph structure at vertex {vertex}")]
    NotCompatible { vertex: usize },

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

impl Error {
    /// True for errors caused by the shape of the input rather than by the
    /// mathematics of a well-formed request.
    pub fn is_malformed(&self) -> bool {
        matches!(
            self,
            Error::MalformedInput(_)
                | Error::IndexOutOfRange { .. }
                | Error::LengthMismatch { .. }
                | Error::InvalidGraph(_)
        )
    }
}
