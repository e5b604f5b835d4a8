//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a structural check (unreduced word, non-SPD matrix,
    /// Im z <= 0, bad probability vector, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// Two values belong to different space kinds.
    #[error("kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },

    /// A numerical routine left its reliable regime; the message carries
    /// condition diagnostics where available.
    #[error("numerical: {0}")]
    Numerical(String),

    /// Drift estimate at or below the ballisticity threshold; directional
    /// constructions refuse to run rather than fabricate a direction.
    #[error("not ballistic: drift estimate {a_hat:.6} is at or below threshold {threshold:.0e}")]
    NotBallistic { a_hat: f64, threshold: f64 },

    /// An iterative limit did not meet its truncation rule within budget.
    /// The last two iterates are carried for diagnosis.
    #[error("no convergence within budget ({steps} evaluations): last two values {prev}, {last}")]
    NonConvergence { steps: usize, prev: f64, last: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Dense matrix product left the f64 range. The stabilized accumulation
    /// in `matrixcocycle` covers this regime.
    #[error("dense product overflow at step {step}; use the stabilized path in `matrixcocycle`")]
    DenseOverflow { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
