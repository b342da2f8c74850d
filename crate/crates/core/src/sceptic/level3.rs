use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::exp2;

use crate::aggregating::{aa_step, AaLog, ExpertPool, MixabilityParams};
use crate::error::{Error, Result};
use crate::game::{Game, Prediction};
use crate::numeric::{excess, CompensatedSum};
use crate::protocol::{ScepticAudit, ScepticStrategy, ScepticView};

pub const DEFAULT_K_MAX: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Level3Config {
    pub k_max: u32,
}

impl Default for Level3Config {
    fn default() -> Self {
        Level3Config {
            k_max: DEFAULT_K_MAX,
        }
    }
}

impl Level3Config {
    pub fn new(k_max: u32) -> Result<Self> {
        if (1..=1000).contains(&k_max) {
            Ok(Level3Config { k_max })
        } else {
            Err(Error::InvalidParameter("k_max must lie in 1..=1000"))
        }
    }

    /// Experts in pool order: `(1,1), (1,2), (2,1), (2,2), …`.
    pub fn experts(&self) -> impl Iterator<Item = (u32, u8)> {
        (1..=self.k_max).flat_map(|k| [(k, 1u8), (k, 2u8)])
    }

    /// Threshold `2^k`.
    pub fn threshold(k: u32) -> f64 {
        exp2(k as f64)
    }

    /// Prior `2^{-k-1}`.
    pub fn prior(k: u32) -> f64 {
        exp2(-(k as f64) - 1.0)
    }

    pub fn priors(&self) -> Vec<f64> {
        self.experts().map(|(k, _)| Self::prior(k)).collect()
    }
}

/// State of expert `(k, j)` of the lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftExpert {
    pub k: u32,
    /// The Predictor (1 or 2) this expert defects to.
    pub follows: u8,
    pub threshold: f64,
    /// First step at which the expert plays as its Predictor.
    pub switched_at: Option<usize>,
}

/// The level-3 lift of a base Sceptic: the Aggregating Algorithm over experts
/// `(k, j)` that copy the base Sceptic until Predictor `j` trails it by more
/// than `2^k`, and copy Predictor `j` from then on.
pub struct Level3Lift {
    game: Game,
    params: MixabilityParams,
    base: Box<dyn ScepticStrategy>,
    pool: ExpertPool,
    experts: Vec<LiftExpert>,
    cum: [CompensatedSum; 2],
    cum_base: CompensatedSum,
    base_prediction: Option<Prediction>,
    advice: Vec<Prediction>,
    own: Option<Prediction>,
    log: AaLog,
}

impl Level3Lift {
    /// Refuses games where `params` fail the mixability check.
    pub fn new(
        game: &Game,
        base: Box<dyn ScepticStrategy>,
        params: MixabilityParams,
        config: Level3Config,
    ) -> Result<Self> {
        params.verify(game)?;
        let priors = config.priors();
        Ok(Level3Lift {
            game: game.clone(),
            params,
            base,
            pool: ExpertPool::new(priors.clone())?,
            experts: config
                .experts()
                .map(|(k, j)| LiftExpert {
                    k,
                    follows: j,
                    threshold: Level3Config::threshold(k),
                    switched_at: None,
                })
                .collect(),
            cum: [CompensatedSum::new(); 2],
            cum_base: CompensatedSum::new(),
            base_prediction: None,
            advice: Vec::new(),
            own: None,
            log: AaLog::new(params, priors),
        })
    }

    pub fn experts(&self) -> &[LiftExpert] {
        &self.experts
    }

    pub fn pool(&self) -> &ExpertPool {
        &self.pool
    }
}

impl ScepticStrategy for Level3Lift {
    fn name(&self) -> &'static str {
        "level3"
    }

    fn predict(&mut self, view: &ScepticView<'_>) -> Result<Prediction> {
        let base = self.base.predict(view)?;
        self.advice.clear();
        for e in &self.experts {
            self.advice.push(match (e.switched_at, e.follows) {
                (None, _) => base.clone(),
                (Some(_), 1) => view.gamma1.clone(),
                (Some(_), _) => view.gamma2.clone(),
            });
        }
        let gamma = aa_step(&self.pool, &self.advice, &self.game, self.params.eta)?;
        self.base_prediction = Some(base);
        self.own = Some(gamma.clone());
        Ok(gamma)
    }

    fn observe(&mut self, omega: f64, gamma1: &Prediction, gamma2: &Prediction) -> Result<()> {
        let (base, own) = match (self.base_prediction.take(), self.own.take()) {
            (Some(b), Some(o)) => (b, o),
            _ => return Err(Error::InvalidParameter("observe called before predict")),
        };
        let losses = self
            .advice
            .iter()
            .map(|p| self.game.loss(omega, p))
            .collect::<Result<Vec<_>>>()?;
        self.pool.observe(&losses, self.params.eta)?;
        self.log.push(losses, self.game.loss(omega, &own)?);

        self.base.observe(omega, gamma1, gamma2)?;
        self.cum_base.add(self.game.loss(omega, &base)?);
        self.cum[0].add(self.game.loss(omega, gamma1)?);
        self.cum[1].add(self.game.loss(omega, gamma2)?);

        let step = self.log.horizon();
        let base_loss = self.cum_base.value();
        let lead = [
            excess(self.cum[0].value(), base_loss),
            excess(self.cum[1].value(), base_loss),
        ];
        for e in self.experts.iter_mut().filter(|e| e.switched_at.is_none()) {
            if lead[usize::from(e.follows - 1)] > e.threshold {
                e.switched_at = Some(step + 1);
            }
        }
        Ok(())
    }

    fn take_audit(&mut self) -> ScepticAudit {
        ScepticAudit {
            aa: Some(core::mem::take(&mut self.log)),
            ..ScepticAudit::default()
        }
    }
}
