use std::fmt;

/// Which half of the coupled system produced a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Ambient,
    Hypersurface,
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::Ambient => write!(f, "ambient"),
            Subsystem::Hypersurface => write!(f, "hypersurface"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pole singularity: {0}")]
    PoleSingularity(String),

    #[error("{subsystem} step rejected at t = {t}: {reason}")]
    StepRejected {
        subsystem: Subsystem,
        t: f64,
        reason: String,
    },

    #[error("degenerate curve node {node}: {reason}")]
    DegenerateNode { node: usize, reason: String },

    #[error("{msg} at line {line}")]
    Parse { line: usize, msg: String },

    #[error("version mismatch: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Re-tags a step rejection with the simulation time at which it happened.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::StepRejected {
                subsystem, reason, ..
            } => Error::StepRejected {
                subsystem,
                t,
                reason,
            },
            other => other,
        }
    }
}
