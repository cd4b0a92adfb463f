use thiserror::Error;

use crate::driver::ChartTree;
use crate::invariant::TraceStep;

/// Partial state carried by a resource error so callers can report how far
/// the engine got.
#[derive(Debug, Clone)]
pub enum Partial {
    Trace(Vec<TraceStep>),
    Tree(Box<ChartTree>),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Ambient mismatch, empty generator lists, length mismatches.
    #[error("structural error: {0}")]
    Structural(String),

    /// A precondition of an operation was violated by its caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Bad user input that parses but is not acceptable (e.g. non-reduced).
    #[error("input error: {0}")]
    Input(String),

    /// An internal mathematical invariant failed to hold.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("verification failure on edge {parent} -> {child}: {msg}")]
    Verification {
        parent: usize,
        child: usize,
        msg: String,
    },

    #[error("resource limit exceeded: {msg}")]
    Resource {
        msg: String,
        partial: Option<Partial>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn diagnostic(msg: impl Into<String>) -> Self {
        Error::Diagnostic(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Input(_) => 1,
            Error::Structural(_) | Error::Contract(_) => 2,
            Error::Diagnostic(_) | Error::Verification { .. } => 3,
            Error::Resource { .. } => 4,
        }
    }
}
