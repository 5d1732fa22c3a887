use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The charge constraint cannot be met, e.g. a zero profile at nonzero charge.
    #[error("charge constraint infeasible: {0}")]
    Infeasible(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("evolution blew up at t = {t}: max |psi| = {max_modulus:e}")]
    BlowUp { t: f64, max_modulus: f64 },

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// A numerical invariant that must hold by construction did not.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
