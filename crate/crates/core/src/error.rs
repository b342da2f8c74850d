use alloc::boxed::Box;

use crate::protocol::Player;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("outcome {outcome} is outside the outcome space")]
    OutcomeOutOfDomain { outcome: f64 },

    #[error("prediction is outside the prediction space: {reason}")]
    PredictionOutOfDomain { reason: &'static str },

    #[error("point has {got} coordinates but the outcome grid has {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("unsupported for this game: {0}")]
    Unsupported(&'static str),

    /// Every expert in the pool has weight zero.
    #[error("expert pool collapsed: every weight is zero")]
    PoolCollapse,

    /// Substitution could not find a prediction dominated by the generalized
    /// prediction: the learning rate is too large or the game is not mixable.
    #[error("MixabilityViolation: no prediction is dominated by the mixture (excess {excess:e})")]
    MixabilityViolation { excess: f64 },

    #[error(
        "divergence overestimate: no canonical prediction below the target (excess {excess:e})"
    )]
    DivergenceOverestimate { excess: f64 },

    #[error("step {step}: {player} made an invalid move: {source}")]
    InvalidMove {
        step: usize,
        player: Player,
        source: Box<Error>,
    },

    #[error("check `{check}` needs trace metadata that is missing: {detail}")]
    MissingMetadata {
        check: &'static str,
        detail: &'static str,
    },
}
