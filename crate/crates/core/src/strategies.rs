//! Built-in Nature and Predictor strategies.

use alloc::vec::Vec;

use libm::pow;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::game::{Game, Prediction};
use crate::numeric::{excess, CompensatedSum};
use crate::protocol::{NatureInfo, NatureStrategy, NatureView, PredictorStrategy, PredictorView};

/// Probability floor for scalar-driven predictors in log-loss games.
pub const PROBABILITY_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Nature {
    IidBernoulli {
        p: f64,
    },
    IidUniform {
        lo: f64,
        hi: f64,
    },
    IidCategorical {
        probs: Vec<f64>,
    },
    Constant {
        omega: f64,
    },
    Replay {
        outcomes: Vec<f64>,
        position: usize,
    },
    /// Maximises `ℓ(ω, γ̃) - min(ℓ(ω, γ1), ℓ(ω, γ2))` over `candidates`
    /// (the game's outcome grid when `None`); ties go to the smaller `ω`.
    AdversarialGreedy {
        candidates: Option<Vec<f64>>,
    },
}

impl Nature {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Nature::IidBernoulli { p })
        } else {
            Err(Error::InvalidParameter(
                "Bernoulli parameter must lie in [0, 1]",
            ))
        }
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Nature::IidUniform { lo, hi })
        } else {
            Err(Error::InvalidParameter(
                "uniform range must be finite with lo <= hi",
            ))
        }
    }

    pub fn categorical(probs: Vec<f64>) -> Result<Self> {
        let s: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "categorical probabilities must sum to 1",
            ));
        }
        Ok(Nature::IidCategorical { probs })
    }

    pub fn constant(omega: f64) -> Self {
        Nature::Constant { omega }
    }

    pub fn replay(outcomes: Vec<f64>) -> Self {
        Nature::Replay {
            outcomes,
            position: 0,
        }
    }

    pub fn adversarial_greedy(candidates: Option<Vec<f64>>) -> Result<Self> {
        if let Some(c) = &candidates {
            if c.is_empty() || c.iter().any(|x| x.is_nan()) {
                return Err(Error::InvalidParameter("candidate grid must be non-empty"));
            }
        }
        Ok(Nature::AdversarialGreedy { candidates })
    }

    /// Checks that every outcome this Nature can produce is in the game.
    pub fn check(&self, game: &Game) -> Result<()> {
        let all = |xs: &[f64]| xs.iter().try_for_each(|&w| game.validate_outcome(w));
        match self {
            Nature::IidBernoulli { .. } => all(&[0.0, 1.0]),
            Nature::IidUniform { lo, hi } => {
                if game.log_loss_outcomes().is_some() {
                    return Err(Error::Unsupported("continuous outcomes in a log-loss game"));
                }
                all(&[*lo, *hi])
            }
            Nature::IidCategorical { probs } => {
                let idx: Vec<f64> = (0..probs.len()).map(|i| i as f64).collect();
                all(&idx)
            }
            Nature::Constant { omega } => all(&[*omega]),
            Nature::Replay { outcomes, .. } => all(outcomes),
            Nature::AdversarialGreedy { candidates } => match candidates {
                Some(c) => all(c),
                None => Ok(()),
            },
        }
    }
}

fn greedy(view: &NatureView<'_>, candidates: &[f64]) -> f64 {
    let g = view.game;
    let score = |w: f64| {
        let ls = g.loss_unchecked(w, view.gamma_sceptic);
        let l1 = g.loss_unchecked(w, view.gamma1);
        let l2 = g.loss_unchecked(w, view.gamma2);
        excess(ls, l1.min(l2))
    };
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (sorted[0], score(sorted[0]));
    for &w in &sorted[1..] {
        let v = score(w);
        if v > best.1 {
            best = (w, v);
        }
    }
    best.0
}

impl NatureStrategy for Nature {
    fn outcome(&mut self, view: &NatureView<'_>, rng: &mut dyn RngCore) -> Option<f64> {
        match self {
            Nature::IidBernoulli { p } => Some(if rng.random::<f64>() < *p { 1.0 } else { 0.0 }),
            Nature::IidUniform { lo, hi } => Some(*lo + (*hi - *lo) * rng.random::<f64>()),
            Nature::IidCategorical { probs } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return Some(i as f64);
                    }
                }
                Some((probs.len() - 1) as f64)
            }
            Nature::Constant { omega } => Some(*omega),
            Nature::Replay { outcomes, position } => {
                let w = outcomes.get(*position).copied();
                *position += 1;
                w
            }
            Nature::AdversarialGreedy { candidates } => Some(match candidates {
                Some(c) => greedy(view, c),
                None => greedy(view, view.game.outcome_grid()),
            }),
        }
    }

    fn info(&self) -> NatureInfo {
        match self {
            Nature::IidBernoulli { p } => NatureInfo::Bernoulli { p: *p },
            _ => NatureInfo::Other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictor {
    Constant(Prediction),
    /// Mean of past outcomes, `initial` before the first one.
    RunningMean {
        initial: f64,
        sum: CompensatedSum,
        seen: usize,
    },
    /// `target` plus Gaussian noise of standard deviation `sigma0 / n^power`.
    NoisyTarget {
        target: f64,
        sigma0: f64,
        power: f64,
    },
    /// `start + delta·(n - 1)`.
    Drift {
        start: f64,
        delta: f64,
    },
}

impl Predictor {
    pub fn running_mean(initial: f64) -> Self {
        Predictor::RunningMean {
            initial,
            sum: CompensatedSum::new(),
            seen: 0,
        }
    }

    pub fn noisy_target(target: f64, sigma0: f64, power: f64) -> Result<Self> {
        if !(sigma0 >= 0.0 && sigma0.is_finite() && power >= 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(
                "noise schedule must be finite and non-negative",
            ));
        }
        Ok(Predictor::NoisyTarget {
            target,
            sigma0,
            power,
        })
    }

    /// Scalar-driven predictors are defined for scalar games and binary
    /// log-loss (where the scalar is the probability of outcome 1).
    pub fn check(&self, game: &Game) -> Result<()> {
        match self {
            Predictor::Constant(p) => game.validate_prediction(p),
            _ => match game.log_loss_outcomes() {
                Some(m) if m != 2 => Err(Error::Unsupported(
                    "scalar-driven predictors need a scalar or binary log-loss game",
                )),
                _ => Ok(()),
            },
        }
    }
}

/// Turns a scalar into a prediction of `game`, clamped to its prediction space.
pub fn scalar_prediction(game: &Game, x: f64) -> Prediction {
    match game.log_loss_outcomes() {
        Some(_) => {
            let p = if x.is_nan() {
                0.5
            } else {
                x.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
            };
            Prediction::Distribution(alloc::vec![1.0 - p, p])
        }
        None => game.clamp_prediction(Prediction::Scalar(x)),
    }
}

impl PredictorStrategy for Predictor {
    fn predict(&mut self, view: &PredictorView<'_>, rng: &mut dyn RngCore) -> Prediction {
        let n = view.step as f64;
        let x = match self {
            Predictor::Constant(p) => return p.clone(),
            Predictor::RunningMean { initial, sum, seen } => {
                for &w in &view.outcomes[*seen..] {
                    sum.add(w);
                }
                *seen = view.outcomes.len();
                if *seen == 0 {
                    *initial
                } else {
                    sum.value() / *seen as f64
                }
            }
            Predictor::NoisyTarget {
                target,
                sigma0,
                power,
            } => {
                let sigma = *sigma0 / pow(n, *power);
                if sigma > 0.0 {
                    *target
                        + Normal::new(0.0, sigma)
                            .map(|d| d.sample(rng))
                            .unwrap_or(0.0)
                } else {
                    *target
                }
            }
            Predictor::Drift { start, delta } => *start + *delta * (n - 1.0),
        };
        scalar_prediction(view.game, x)
    }
}
