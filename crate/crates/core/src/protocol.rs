//! The three-player game of prediction: two Predictors, a Sceptic and Nature.
//!
//! Each step the Predictors announce `γ1, γ2`, the Sceptic announces `γ̃`
//! seeing only `γ1, γ2` and past outcomes, then Nature announces `ω`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aggregating::AaLog;
use crate::error::{Error, Result};
use crate::game::{Game, Prediction};
use crate::numeric::CompensatedSum;
use crate::sceptic::{LedgerStep, Level2Config};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Predictor1,
    Predictor2,
    Sceptic,
    Nature,
}

impl Player {
    pub fn name(self) -> &'static str {
        match self {
            Player::Predictor1 => "predictor1",
            Player::Predictor2 => "predictor2",
            Player::Sceptic => "sceptic",
            Player::Nature => "nature",
        }
    }

    /// RNG stream used by this player.
    pub fn stream(self) -> u64 {
        match self {
            Player::Predictor1 => 1,
            Player::Predictor2 => 2,
            Player::Nature => 3,
            Player::Sceptic => 4,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The ChaCha8 generator a player draws from for a given run seed.
pub fn player_rng(seed: u64, player: Player) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(player.stream());
    rng
}

pub struct PredictorView<'a> {
    pub step: usize,
    pub game: &'a Game,
    pub outcomes: &'a [f64],
}

pub trait PredictorStrategy {
    fn predict(&mut self, view: &PredictorView<'_>, rng: &mut dyn RngCore) -> Prediction;
}

/// Everything the Sceptic may look at. There is deliberately no way to reach
/// the current outcome from here.
pub struct ScepticView<'a> {
    pub step: usize,
    pub gamma1: &'a Prediction,
    pub gamma2: &'a Prediction,
    pub outcomes: &'a [f64],
}

/// What a Sceptic leaves behind for the verifiers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScepticAudit {
    pub level2: Option<Level2Config>,
    pub ledger: Option<Vec<LedgerStep>>,
    pub aa: Option<AaLog>,
}

pub trait ScepticStrategy {
    fn name(&self) -> &'static str;

    fn predict(&mut self, view: &ScepticView<'_>) -> Result<Prediction>;

    /// Called after Nature moves, with the same `γ1, γ2` as the preceding
    /// [`predict`](Self::predict).
    fn observe(&mut self, omega: f64, gamma1: &Prediction, gamma2: &Prediction) -> Result<()>;

    /// `D` used at the last prediction, when the strategy has one.
    fn divergence_term(&self) -> Option<f64> {
        None
    }

    fn take_audit(&mut self) -> ScepticAudit {
        ScepticAudit::default()
    }
}

impl<S: ScepticStrategy + ?Sized> ScepticStrategy for Box<S> {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn predict(&mut self, view: &ScepticView<'_>) -> Result<Prediction> {
        (**self).predict(view)
    }
    fn observe(&mut self, omega: f64, gamma1: &Prediction, gamma2: &Prediction) -> Result<()> {
        (**self).observe(omega, gamma1, gamma2)
    }
    fn divergence_term(&self) -> Option<f64> {
        (**self).divergence_term()
    }
    fn take_audit(&mut self) -> ScepticAudit {
        (**self).take_audit()
    }
}

pub struct NatureView<'a> {
    pub step: usize,
    pub game: &'a Game,
    pub gamma1: &'a Prediction,
    pub gamma2: &'a Prediction,
    pub gamma_sceptic: &'a Prediction,
    pub outcomes: &'a [f64],
}

/// Facts about Nature that some verifiers depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NatureInfo {
    Bernoulli { p: f64 },
    Other,
}

pub trait NatureStrategy {
    /// `None` ends the run early (a replay ran out of outcomes).
    fn outcome(&mut self, view: &NatureView<'_>, rng: &mut dyn RngCore) -> Option<f64>;

    fn info(&self) -> NatureInfo {
        NatureInfo::Other
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub gamma1: Prediction,
    pub gamma2: Prediction,
    pub gamma_sceptic: Prediction,
    pub omega: f64,
    pub loss1: f64,
    pub loss2: f64,
    pub loss_sceptic: f64,
    pub cum1: f64,
    pub cum2: f64,
    pub cum_sceptic: f64,
    /// `|γ1 - γ2|`, or the Hellinger-type distance `sqrt(D^(0))` for log-loss.
    pub gap: f64,
    pub divergence_term: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub game: Game,
    pub seed: u64,
    pub horizon: usize,
    pub sceptic_name: &'static str,
    pub steps: Vec<StepRecord>,
    pub nature: NatureInfo,
    pub audit: ScepticAudit,
    /// Nature stopped before `horizon`.
    pub truncated: bool,
}

impl Trace {
    pub fn outcomes(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.omega)
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.steps.last()
    }

    /// `(L1, L2, L̃)` at the end of the run.
    pub fn final_losses(&self) -> (f64, f64, f64) {
        self.last()
            .map(|s| (s.cum1, s.cum2, s.cum_sceptic))
            .unwrap_or((0.0, 0.0, 0.0))
    }
}

pub(crate) fn gap(g1: &Prediction, g2: &Prediction) -> f64 {
    match (g1, g2) {
        (Prediction::Scalar(a), Prediction::Scalar(b)) => libm::fabs(a - b),
        (Prediction::Distribution(p), Prediction::Distribution(q)) => {
            libm::sqrt(crate::divergence::log_loss_divergence_unchecked(p, q, 0.0).max(0.0))
        }
        _ => f64::NAN,
    }
}

fn invalid(step: usize, player: Player) -> impl FnOnce(Error) -> Error {
    move |e| Error::InvalidMove {
        step,
        player,
        source: Box::new(e),
    }
}

/// Plays `horizon` steps. An invalid move from any player aborts the run
/// with the step index and the offender.
pub fn run_protocol(
    game: &Game,
    predictor1: &mut dyn PredictorStrategy,
    predictor2: &mut dyn PredictorStrategy,
    sceptic: &mut dyn ScepticStrategy,
    nature: &mut dyn NatureStrategy,
    horizon: usize,
    seed: u64,
) -> Result<Trace> {
    let mut rng1 = player_rng(seed, Player::Predictor1);
    let mut rng2 = player_rng(seed, Player::Predictor2);
    let mut rng_nature = player_rng(seed, Player::Nature);

    let mut outcomes: Vec<f64> = Vec::with_capacity(horizon);
    let mut steps = Vec::with_capacity(horizon);
    let (mut cum1, mut cum2, mut cum_s) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let mut truncated = false;

    for n in 1..=horizon {
        let pview = PredictorView {
            step: n,
            game,
            outcomes: &outcomes,
        };
        let gamma1 = predictor1.predict(&pview, &mut rng1);
        game.validate_prediction(&gamma1)
            .map_err(invalid(n, Player::Predictor1))?;
        let gamma2 = predictor2.predict(&pview, &mut rng2);
        game.validate_prediction(&gamma2)
            .map_err(invalid(n, Player::Predictor2))?;

        let gamma_s = sceptic
            .predict(&ScepticView {
                step: n,
                gamma1: &gamma1,
                gamma2: &gamma2,
                outcomes: &outcomes,
            })
            .and_then(|g| game.validate_prediction(&g).map(|_| g))
            .map_err(invalid(n, Player::Sceptic))?;
        let divergence_term = sceptic.divergence_term();

        let Some(omega) = nature.outcome(
            &NatureView {
                step: n,
                game,
                gamma1: &gamma1,
                gamma2: &gamma2,
                gamma_sceptic: &gamma_s,
                outcomes: &outcomes,
            },
            &mut rng_nature,
        ) else {
            truncated = true;
            break;
        };
        game.validate_outcome(omega)
            .map_err(invalid(n, Player::Nature))?;

        let loss1 = game.loss_unchecked(omega, &gamma1);
        let loss2 = game.loss_unchecked(omega, &gamma2);
        let loss_s = game.loss_unchecked(omega, &gamma_s);
        cum1.add(loss1);
        cum2.add(loss2);
        cum_s.add(loss_s);
        sceptic
            .observe(omega, &gamma1, &gamma2)
            .map_err(invalid(n, Player::Sceptic))?;
        outcomes.push(omega);
        steps.push(StepRecord {
            n,
            gap: gap(&gamma1, &gamma2),
            gamma1,
            gamma2,
            gamma_sceptic: gamma_s,
            omega,
            loss1,
            loss2,
            loss_sceptic: loss_s,
            cum1: cum1.value(),
            cum2: cum2.value(),
            cum_sceptic: cum_s.value(),
            divergence_term,
        });
    }

    Ok(Trace {
        game: game.clone(),
        seed,
        horizon,
        sceptic_name: sceptic.name(),
        steps,
        nature: nature.info(),
        audit: sceptic.take_audit(),
        truncated,
    })
}
