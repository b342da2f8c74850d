//! The Aggregating Algorithm over a finite (possibly truncated countable)
//! pool of experts, for perfectly mixable games.
//!
//! With learning rate `η` and prior weights `p_k`, the algorithm guarantees
//! `L̃_N ≤ L_N^[k] + C ln(1/p_k)` for every expert `k` and horizon `N`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::{exp, log};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, GameKind, Prediction, DEFAULT_TOL};
use crate::numeric::{excess, log_sum_exp, CompensatedSum};
use crate::protocol::{NatureStrategy, NatureView, Player, PredictorStrategy, PredictorView};

/// Learning rate and regret constant of the Aggregating Algorithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixabilityParams {
    pub eta: f64,
    pub c: f64,
}

impl MixabilityParams {
    pub fn new(eta: f64, c: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter("eta and C must be positive"));
        }
        Ok(MixabilityParams { eta, c })
    }

    /// `(η, C)` for the bundled perfectly mixable games: log-loss `(1, 1)`,
    /// bounded square-loss `(2, 1/2)`.
    pub fn for_game(kind: GameKind) -> Option<Self> {
        match kind {
            GameKind::LogLoss { .. } => Some(MixabilityParams { eta: 1.0, c: 1.0 }),
            GameKind::BoundedSquareLoss => Some(MixabilityParams { eta: 2.0, c: 0.5 }),
            _ => None,
        }
    }

    /// Default parameters for `game`, checked with the midpoint mixability test.
    pub fn verified_for(game: &Game) -> Result<Self> {
        let params = Self::for_game(game.kind()).ok_or(Error::MixabilityViolation {
            excess: f64::INFINITY,
        })?;
        params.verify(game)?;
        Ok(params)
    }

    pub fn verify(&self, game: &Game) -> Result<()> {
        if game.check_perfectly_mixable(self.eta, DEFAULT_TOL)? {
            Ok(())
        } else {
            Err(Error::MixabilityViolation {
                excess: f64::INFINITY,
            })
        }
    }
}

/// Expert weights, kept in log space; normalisation happens on read.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpertPool {
    log_weights: Vec<f64>,
    priors: Vec<f64>,
}

impl ExpertPool {
    /// Priors must be positive with `Σ p_k ≤ 1`; a deficit is allowed.
    pub fn new(priors: Vec<f64>) -> Result<Self> {
        if priors.is_empty() {
            return Err(Error::InvalidParameter("expert pool is empty"));
        }
        if priors.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("priors must be positive"));
        }
        let total: f64 = priors.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter("priors must sum to at most 1"));
        }
        Ok(ExpertPool {
            log_weights: priors.iter().map(|&p| log(p)).collect(),
            priors,
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    fn log_normalizer(&self) -> Result<f64> {
        let z = log_sum_exp(self.log_weights.iter().copied());
        if z == f64::NEG_INFINITY {
            Err(Error::PoolCollapse)
        } else {
            Ok(z)
        }
    }

    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let z = self.log_normalizer()?;
        Ok(self.log_weights.iter().map(|&w| exp(w - z)).collect())
    }

    /// `g(ω) = -(1/η) ln Σ_k w_k e^{-η λ_k(ω)}` with normalised weights `w_k`.
    pub fn generalized_prediction<P: AsRef<[f64]>>(
        &self,
        expert_points: &[P],
        eta: f64,
    ) -> Result<Vec<f64>> {
        if expert_points.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: expert_points.len(),
            });
        }
        let z = self.log_normalizer()?;
        let dim = expert_points[0].as_ref().len();
        if expert_points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(Error::InvalidParameter(
                "expert loss profiles differ in length",
            ));
        }
        Ok((0..dim)
            .map(|i| {
                let lse = log_sum_exp(
                    self.log_weights
                        .iter()
                        .zip(expert_points)
                        .map(|(&lw, p)| lw - eta * p.as_ref()[i]),
                );
                -(lse - z) / eta
            })
            .collect())
    }

    /// Exponential-weights update `log w_k -= η·loss_k`.
    pub fn observe(&mut self, expert_losses: &[f64], eta: f64) -> Result<()> {
        if expert_losses.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: expert_losses.len(),
            });
        }
        for (w, &l) in self.log_weights.iter_mut().zip(expert_losses) {
            *w -= eta * l;
        }
        Ok(())
    }
}

/// A prediction whose loss is dominated by the generalized prediction `g` on
/// the outcome grid, up to `tol`.
///
/// Log-loss games use the exact minimiser `γ ∝ e^{-g}` (the Bayes mixture
/// when `η = 1`); other games use the grid search of
/// [`Game::minimax_prediction`].
pub fn substitute(game: &Game, g: &[f64], tol: f64) -> Result<Prediction> {
    if g.len() != game.outcome_grid().len() {
        return Err(Error::DimensionMismatch {
            expected: game.outcome_grid().len(),
            got: g.len(),
        });
    }
    let (prediction, value) = if game.kind().is_log_loss() {
        let ln_z = log_sum_exp(g.iter().map(|&x| -x));
        if ln_z == f64::NEG_INFINITY {
            return Err(Error::PoolCollapse);
        }
        let gamma: Vec<f64> = g.iter().map(|&x| exp(-x - ln_z)).collect();
        (Prediction::Distribution(gamma), ln_z)
    } else {
        game.minimax_unchecked(g)
    };
    if value > tol {
        return Err(Error::MixabilityViolation { excess: value });
    }
    Ok(prediction)
}

/// One prediction of the Aggregating Algorithm; the pool is not modified.
pub fn aa_step(
    pool: &ExpertPool,
    expert_predictions: &[Prediction],
    game: &Game,
    eta: f64,
) -> Result<Prediction> {
    let points: Vec<_> = expert_predictions
        .iter()
        .map(|p| game.canonical_point(p))
        .collect::<Result<_>>()?;
    let g = pool.generalized_prediction(&points, eta)?;
    substitute(game, &g, DEFAULT_TOL)
}

/// `aa_observe`: losses of every expert at the realised outcome.
pub fn aa_observe(
    pool: &mut ExpertPool,
    game: &Game,
    omega: f64,
    expert_predictions: &[Prediction],
    eta: f64,
) -> Result<Vec<f64>> {
    let losses = expert_predictions
        .iter()
        .map(|p| game.loss(omega, p))
        .collect::<Result<Vec<_>>>()?;
    pool.observe(&losses, eta)?;
    Ok(losses)
}

/// Per-step losses of every expert and of the aggregate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AaLog {
    pub eta: f64,
    pub c: f64,
    pub priors: Vec<f64>,
    /// `expert_losses[n][k]`: loss of expert `k` at step `n + 1`.
    pub expert_losses: Vec<Vec<f64>>,
    pub aggregate_losses: Vec<f64>,
}

impl AaLog {
    pub fn new(params: MixabilityParams, priors: Vec<f64>) -> Self {
        AaLog {
            eta: params.eta,
            c: params.c,
            priors,
            expert_losses: Vec::new(),
            aggregate_losses: Vec::new(),
        }
    }

    pub fn push(&mut self, expert_losses: Vec<f64>, aggregate_loss: f64) {
        self.expert_losses.push(expert_losses);
        self.aggregate_losses.push(aggregate_loss);
    }

    pub fn horizon(&self) -> usize {
        self.aggregate_losses.len()
    }

    /// Minimum over experts and horizons of the regret slack.
    pub fn worst_slack(&self) -> f64 {
        aa_regret_slack(self)
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `slack_k(N) = L_N^[k] + C ln(1/p_k) - L̃_N` for `N = 1..=horizon`, one
/// series per expert. Non-negative for a correct Aggregating Algorithm.
pub fn aa_regret_slack(log: &AaLog) -> Vec<Vec<f64>> {
    (0..log.priors.len())
        .map(|k| {
            let mut acc = CompensatedSum::new();
            acc.add(log.c * -libm::log(log.priors[k]));
            log.expert_losses
                .iter()
                .zip(&log.aggregate_losses)
                .map(|(row, &agg)| {
                    acc.add(excess(row[k], agg));
                    acc.value()
                })
                .collect()
        })
        .collect()
}

/// Outcome of a prediction-with-expert-advice run.
#[derive(Clone, Debug)]
pub struct ExpertAdviceRun {
    pub outcomes: Vec<f64>,
    pub predictions: Vec<Prediction>,
    pub log: AaLog,
}

impl ExpertAdviceRun {
    pub fn cumulative_loss(&self) -> f64 {
        let s: CompensatedSum = self.log.aggregate_losses.iter().copied().collect();
        s.value()
    }
}

/// Runs the Aggregating Algorithm against `experts` for `horizon` steps.
///
/// Nature sees the first two experts as "Predictors" and the aggregate as
/// "Sceptic". Expert `k` draws from RNG stream `16 + k`, Nature from stream 3.
pub fn run_expert_advice(
    game: &Game,
    experts: &mut [Box<dyn PredictorStrategy>],
    nature: &mut dyn NatureStrategy,
    priors: Vec<f64>,
    params: MixabilityParams,
    horizon: usize,
    seed: u64,
) -> Result<ExpertAdviceRun> {
    let mut pool = ExpertPool::new(priors.clone())?;
    if experts.len() != pool.len() {
        return Err(Error::DimensionMismatch {
            expected: pool.len(),
            got: experts.len(),
        });
    }
    let mut expert_rngs: Vec<ChaCha8Rng> = (0..experts.len())
        .map(|k| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(16 + k as u64);
            r
        })
        .collect();
    let mut nature_rng = ChaCha8Rng::seed_from_u64(seed);
    nature_rng.set_stream(3);

    let mut outcomes = Vec::with_capacity(horizon);
    let mut predictions = Vec::with_capacity(horizon);
    let mut log = AaLog::new(params, priors);
    for n in 1..=horizon {
        let view = PredictorView {
            step: n,
            game,
            outcomes: &outcomes,
        };
        let advice: Vec<Prediction> = experts
            .iter_mut()
            .zip(expert_rngs.iter_mut())
            .map(|(e, rng)| e.predict(&view, rng))
            .collect();
        for p in &advice {
            game.validate_prediction(p)
                .map_err(|e| Error::InvalidMove {
                    step: n,
                    player: Player::Predictor1,
                    source: Box::new(e),
                })?;
        }
        let gamma = aa_step(&pool, &advice, game, params.eta).map_err(|e| Error::InvalidMove {
            step: n,
            player: Player::Sceptic,
            source: Box::new(e),
        })?;
        let second = advice.get(1).unwrap_or(&advice[0]);
        let Some(omega) = nature.outcome(
            &NatureView {
                step: n,
                game,
                gamma1: &advice[0],
                gamma2: second,
                gamma_sceptic: &gamma,
                outcomes: &outcomes,
            },
            &mut nature_rng,
        ) else {
            break;
        };
        game.validate_outcome(omega)
            .map_err(|e| Error::InvalidMove {
                step: n,
                player: Player::Nature,
                source: Box::new(e),
            })?;
        let losses = aa_observe(&mut pool, game, omega, &advice, params.eta)?;
        log.push(losses, game.loss_unchecked(omega, &gamma));
        outcomes.push(omega);
        predictions.push(gamma);
    }
    Ok(ExpertAdviceRun {
        outcomes,
        predictions,
        log,
    })
}
