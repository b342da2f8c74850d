use alloc::vec::Vec;

use libm::fabs;

use crate::error::{Error, Result};
use crate::game::{Game, Prediction};
use crate::numeric::{u_minus_log1p, CompensatedSum};
use crate::protocol::{ScepticAudit, ScepticStrategy, ScepticView};

pub const DEFAULT_SHAPE_SCALE: f64 = 0.4;

/// `f(x) = c·x/(1+|x|)` with `0 < c < 1/2`: odd, increasing, concave on
/// `x ≥ 0` and bounded by `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturatingShape {
    c: f64,
}

impl Default for SaturatingShape {
    fn default() -> Self {
        SaturatingShape {
            c: DEFAULT_SHAPE_SCALE,
        }
    }
}

impl SaturatingShape {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c < 0.5 {
            Ok(SaturatingShape { c })
        } else {
            Err(Error::InvalidParameter("shape scale must lie in (0, 1/2)"))
        }
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn f(&self, x: f64) -> f64 {
        self.c * x / (1.0 + fabs(x))
    }

    /// `F(x) = ∫_0^x f = c(|x| - ln(1+|x|))`.
    pub fn integral(&self, x: f64) -> f64 {
        self.c * u_minus_log1p(fabs(x))
    }

    /// `∫_a^{a+δ} f - f(a)·δ`, the area between `f` and its value at `a`.
    /// Non-negative for every `a` and `δ`, evaluated without cancellation.
    pub fn area(&self, a: f64, delta: f64) -> f64 {
        let (a, delta) = if a < 0.0 || (a == 0.0 && delta < 0.0) {
            (-a, -delta)
        } else {
            (a, delta)
        };
        let b = a + delta;
        if b >= 0.0 {
            self.c * u_minus_log1p(delta / (1.0 + a))
        } else {
            // a > 0 > b: split at 0 into three non-negative pieces.
            self.c * u_minus_log1p(-a / (1.0 + a)) + (-b) * self.f(a) + self.integral(b)
        }
    }
}

/// The level-1 move `(1/2 + f(D)) γ1 + (1/2 - f(D)) γ2`.
pub fn level1_step(
    shape: &SaturatingShape,
    d: f64,
    gamma1: &Prediction,
    gamma2: &Prediction,
) -> Result<Prediction> {
    gamma1
        .mix(0.5 + shape.f(d), gamma2)
        .ok_or(Error::PredictionOutOfDomain {
            reason: "predictions have different shapes",
        })
}

/// One row of the level-1 ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerStep {
    pub n: usize,
    /// `D_{n-1}` and `D_n`.
    pub d_before: f64,
    pub d_after: f64,
    /// `A_n ≥ 0`.
    pub area: f64,
    /// `F(D_n)`.
    pub integral: f64,
    /// `Σ_{k≤n} A_k`.
    pub areas: f64,
    /// `B_n = F(D_n) - Σ A`.
    pub bound: f64,
    /// `E_n = L̃_n - (L1_n + L2_n)/2`.
    pub excess: f64,
}

impl LedgerStep {
    pub fn slack(&self) -> f64 {
        self.bound - self.excess
    }
}

/// The level-1 Sceptic. With `D = L1 - L2` it plays `(1/2 + f(D)) γ1 +
/// (1/2 - f(D)) γ2`, so that `L̃ - (L1 + L2)/2 ≤ F(D) - Σ A`.
#[derive(Clone, Debug)]
pub struct Level1Sceptic {
    game: Game,
    shape: SaturatingShape,
    d: CompensatedSum,
    areas: CompensatedSum,
    excess: CompensatedSum,
    last: Option<Prediction>,
    ledger: Vec<LedgerStep>,
}

impl Level1Sceptic {
    pub fn new(game: &Game, shape: SaturatingShape) -> Self {
        Level1Sceptic {
            game: game.clone(),
            shape,
            d: CompensatedSum::new(),
            areas: CompensatedSum::new(),
            excess: CompensatedSum::new(),
            last: None,
            ledger: Vec::new(),
        }
    }

    /// Current `D = L1 - L2`.
    pub fn d(&self) -> f64 {
        self.d.value()
    }

    pub fn ledger(&self) -> &[LedgerStep] {
        &self.ledger
    }
}

impl ScepticStrategy for Level1Sceptic {
    fn name(&self) -> &'static str {
        "level1"
    }

    fn predict(&mut self, view: &ScepticView<'_>) -> Result<Prediction> {
        let gamma = level1_step(&self.shape, self.d.value(), view.gamma1, view.gamma2)?;
        self.last = Some(gamma.clone());
        Ok(gamma)
    }

    fn observe(&mut self, omega: f64, gamma1: &Prediction, gamma2: &Prediction) -> Result<()> {
        let own = self
            .last
            .take()
            .ok_or(Error::InvalidParameter("observe called before predict"))?;
        let l1 = self.game.loss(omega, gamma1)?;
        let l2 = self.game.loss(omega, gamma2)?;
        let ls = self.game.loss(omega, &own)?;
        if !(l1.is_finite() && l2.is_finite() && ls.is_finite()) {
            return Err(Error::Unsupported("the level-1 ledger needs finite losses"));
        }
        let a = self.d.value();
        let delta = l1 - l2;
        let area = self.shape.area(a, delta);
        self.areas.add(area);
        self.excess.add(ls - 0.5 * (l1 + l2));
        self.d.add(delta);
        let d = self.d.value();
        let integral = self.shape.integral(d);
        self.ledger.push(LedgerStep {
            n: self.ledger.len() + 1,
            d_before: a,
            d_after: d,
            area,
            integral,
            areas: self.areas.value(),
            bound: integral - self.areas.value(),
            excess: self.excess.value(),
        });
        Ok(())
    }

    fn take_audit(&mut self) -> ScepticAudit {
        ScepticAudit {
            ledger: Some(core::mem::take(&mut self.ledger)),
            ..ScepticAudit::default()
        }
    }
}
