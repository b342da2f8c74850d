//! Sceptic strategies: the level-2 divergence strategy, the level-1 strategy
//! for convex games with its ledger, and the level-3 lift.

mod level1;
mod level2;
mod level3;

pub use level1::{level1_step, LedgerStep, Level1Sceptic, SaturatingShape, DEFAULT_SHAPE_SCALE};
pub use level2::{
    level2_inequality_slack, level2_step, Level2Config, Level2Sceptic, NUMERIC_DIVERGENCE_TOL,
};
pub use level3::{Level3Config, Level3Lift, LiftExpert, DEFAULT_K_MAX};
