use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("degenerate half-space normal (norm {0:e})")]
    DegenerateNormal(f64),

    #[error("empty polyhedron")]
    EmptyPolyhedron,

    #[error("polyhedron not compact")]
    NotCompact,

    #[error("numeric abort at step {step} (t = {time}): {reason}")]
    NumericAbort {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("step size underflow at t = {time} (h = {step:e}); problem may be stiff")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
