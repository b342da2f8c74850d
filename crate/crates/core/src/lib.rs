//! Games of prediction, α-divergences between predictions, the Aggregating
//! Algorithm, and Sceptic strategies that compete with a pair of Predictors.
//!
//! A game is a triple `(Ω, Γ, ℓ)`. Two Predictors announce `γ1, γ2`, a Sceptic
//! who sees both announces `γ̃`, then Nature announces `ω`. The Sceptic
//! strategies here guarantee that either the Predictors' forecasts merge or
//! the Sceptic eventually does much better than one of them.
//!
//! ```
//! use jeffreys_core::{Game, GameKind, Prediction};
//! use jeffreys_core::sceptic::{level2_step, Level2Config};
//!
//! let game = Game::new(GameKind::SquareLoss).unwrap();
//! let cfg = Level2Config::new(0.0, 1e-3).unwrap();
//! let (gamma, d) = level2_step(&game, &0.0.into(), &1.0.into(), &cfg, 1).unwrap();
//! assert_eq!(gamma, Prediction::Scalar(0.5));
//! assert_eq!(d, 1.0);
//! ```
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aggregating;
pub mod divergence;
mod error;
pub mod game;
pub mod numeric;
pub mod protocol;
pub mod sceptic;
pub mod strategies;
pub mod verify;

pub use aggregating::{
    aa_observe, aa_regret_slack, aa_step, run_expert_advice, substitute, AaLog, ExpertAdviceRun,
    ExpertPool, MixabilityParams,
};
pub use divergence::{
    alpha_divergence_log_loss, alpha_divergence_square_loss, lower_alpha_divergence,
    lower_alpha_divergence_numeric, upper_alpha_divergence_numeric, DivergenceResult, Method, Side,
};
pub use error::{Error, Result};
pub use game::{CanonicalPoint, Game, GameBuilder, GameKind, OutcomeGrid, Prediction};
pub use protocol::{
    run_protocol, NatureInfo, NatureStrategy, NatureView, Player, PredictorStrategy, PredictorView,
    ScepticAudit, ScepticStrategy, ScepticView, StepRecord, Trace,
};
pub use strategies::{Nature, Predictor};
pub use verify::{
    classify_disjuncts, report, verify_run, Check, CheckResult, DisjunctVerdicts, RunReport,
    Thresholds, Verdict,
};
