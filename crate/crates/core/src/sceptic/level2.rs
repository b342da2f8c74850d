use alloc::vec::Vec;

use libm::{exp, log};

use crate::divergence::{
    alpha_weights, log_loss_divergence_unchecked, lower_alpha_divergence_numeric,
};
use crate::error::{Error, Result};
use crate::game::{Game, GameKind, Prediction, DEFAULT_TOL};
use crate::numeric::{excess, CompensatedSum};
use crate::protocol::{ScepticAudit, ScepticStrategy, ScepticView, StepRecord};

/// Bisection width used when the divergence has no closed form.
pub const NUMERIC_DIVERGENCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level2Config {
    pub alpha: f64,
    pub epsilon: f64,
}

impl Level2Config {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (-1, 1)"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        Ok(Level2Config { alpha, epsilon })
    }

    /// `(1-α)/2 · (1+α)/2`.
    pub fn ab(&self) -> f64 {
        let (a, b) = alpha_weights(self.alpha);
        a * b
    }
}

/// One move of the level-2 Sceptic at step `n` (1-based), together with the
/// divergence `D` it was built from.
///
/// The square-loss games play the weighted mean and the log-loss games the
/// normalised geometric mean `γ1^a γ2^b`; both meet the target with equality.
/// Other games search the canonical predictions below
/// `a λ1 + b λ2 - ab D + ε 2^{-n}`.
pub fn level2_step(
    game: &Game,
    gamma1: &Prediction,
    gamma2: &Prediction,
    config: &Level2Config,
    n: usize,
) -> Result<(Prediction, f64)> {
    let (a, b) = alpha_weights(config.alpha);
    match (game.kind(), gamma1, gamma2) {
        (
            GameKind::SquareLoss | GameKind::BoundedSquareLoss,
            Prediction::Scalar(x),
            Prediction::Scalar(y),
        ) => {
            let d = x - y;
            Ok((Prediction::Scalar(a * x + b * y), d * d))
        }
        (GameKind::LogLoss { .. }, Prediction::Distribution(p), Prediction::Distribution(q)) => {
            let d = log_loss_divergence_unchecked(p, q, config.alpha);
            if d.is_finite() {
                let ln_z = -config.ab() * d;
                let gamma: Vec<f64> = p
                    .iter()
                    .zip(q)
                    .map(|(&u, &v)| {
                        if u == 0.0 || v == 0.0 {
                            0.0
                        } else {
                            exp(a * log(u) + b * log(v) - ln_z)
                        }
                    })
                    .collect();
                Ok((Prediction::Distribution(gamma), d))
            } else {
                // Disjoint supports: every outcome costs one Predictor +∞.
                Ok((gamma1.mix(a, gamma2).expect("same shape"), d))
            }
        }
        _ => {
            let div = lower_alpha_divergence_numeric(
                game,
                gamma1,
                gamma2,
                config.alpha,
                NUMERIC_DIVERGENCE_TOL,
            )?;
            let d = div.value;
            let bonus = config.epsilon * libm::exp2(-(n as f64));
            let l1 = game.canonical_point(gamma1)?;
            let l2 = game.canonical_point(gamma2)?;
            let ab_d = config.ab() * d;
            let target: Vec<f64> = l1
                .values()
                .iter()
                .zip(l2.values())
                .map(|(x, y)| a * x + b * y - ab_d + bonus)
                .collect();
            let (gamma, value) = game.minimax_unchecked(&target);
            if value > DEFAULT_TOL {
                return Err(Error::DivergenceOverestimate { excess: value });
            }
            Ok((gamma, d))
        }
    }
}

/// The level-2 Sceptic: competes with the α-mixture of the two Predictors,
/// ahead by `ab Σ D` up to `ε`.
#[derive(Clone, Debug)]
pub struct Level2Sceptic {
    game: Game,
    config: Level2Config,
    last_divergence: Option<f64>,
}

impl Level2Sceptic {
    pub fn new(game: &Game, config: Level2Config) -> Self {
        Level2Sceptic {
            game: game.clone(),
            config,
            last_divergence: None,
        }
    }

    pub fn config(&self) -> &Level2Config {
        &self.config
    }
}

impl ScepticStrategy for Level2Sceptic {
    fn name(&self) -> &'static str {
        "level2"
    }

    fn predict(&mut self, view: &ScepticView<'_>) -> Result<Prediction> {
        let (gamma, d) = level2_step(
            &self.game,
            view.gamma1,
            view.gamma2,
            &self.config,
            view.step,
        )?;
        self.last_divergence = Some(d);
        Ok(gamma)
    }

    fn observe(&mut self, _omega: f64, _g1: &Prediction, _g2: &Prediction) -> Result<()> {
        Ok(())
    }

    fn divergence_term(&self) -> Option<f64> {
        self.last_divergence
    }

    fn take_audit(&mut self) -> ScepticAudit {
        ScepticAudit {
            level2: Some(self.config),
            ..ScepticAudit::default()
        }
    }
}

/// `slack(N) = a L1_N + b L2_N - ab Σ_{n≤N} D_n + ε - L̃_N`, one value per
/// recorded step. Non-negative whenever the level-2 guarantee holds.
///
/// Once a Predictor's cumulative loss is infinite the slack is `+∞` for good;
/// an infinite Sceptic loss or divergence before that makes it `-∞`.
pub fn level2_inequality_slack(steps: &[StepRecord], config: &Level2Config) -> Result<Vec<f64>> {
    let (a, b) = alpha_weights(config.alpha);
    let ab = config.ab();
    let mut acc = CompensatedSum::new();
    acc.add(config.epsilon);
    let (mut rhs_inf, mut lhs_inf) = (false, false);
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        let d = s.divergence_term.ok_or(Error::MissingMetadata {
            check: "divergence_bound",
            detail: "step records carry no divergence term",
        })?;
        let rhs = a * s.loss1 + b * s.loss2;
        if rhs == f64::INFINITY {
            rhs_inf = true;
        } else if s.loss_sceptic == f64::INFINITY || d == f64::INFINITY {
            lhs_inf = true;
        } else {
            acc.add(excess(rhs - ab * d, s.loss_sceptic));
        }
        out.push(if rhs_inf {
            f64::INFINITY
        } else if lhs_inf {
            f64::NEG_INFINITY
        } else {
            acc.value()
        });
    }
    Ok(out)
}
