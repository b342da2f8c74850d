//! Games of prediction and their canonical representation.
//!
//! A game is a triple of outcome space, prediction space and loss function.
//! The geometric predicates (super/subprediction membership, non-redundancy,
//! perfect mixability) work on finite grids: a game carries an ordered
//! outcome grid, on which loss profiles are evaluated, and an ordered
//! prediction grid, which seeds every search over predictions.
//!
//! Scalar games and the binary log-loss game are searched through a scalar
//! parameter (the prediction itself, or the probability of outcome `1`): a
//! scan of the prediction grid followed by a three-point pattern search around
//! the best candidate. Log-loss games with three or more outcomes use the
//! exact description of the superprediction set,
//! `λ ∈ Λ̄ ⇔ Σ_ω e^{-λ(ω)} ≤ 1`.

use alloc::vec::Vec;
use core::fmt;

use libm::{exp, fabs, log};

use crate::error::{Error, Result};
use crate::numeric::{excess, grid_minimize, log_sum_exp, uniform_grid, CompensatedSum};

/// Points per axis of the default prediction grid.
pub const DEFAULT_GRID_SIZE: usize = 257;
/// Outcome-grid size used for the quartic game on `[-1, 1]`.
pub const QUARTIC_OUTCOME_GRID_SIZE: usize = 1025;
/// Default membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance on `Σ γ(ω) = 1` for log-loss predictions.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;
/// Pattern-search step at which local refinement stops.
pub(crate) const REFINE_RESOLUTION: f64 = 1e-13;
/// Upper bound on the number of simplex lattice points for log-loss grids.
const SIMPLEX_GRID_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    /// `(ℝ, ℝ, |ω - γ|)`
    AbsoluteLoss,
    /// `(ℝ, ℝ, (ω - γ)²)`
    SquareLoss,
    /// `([0,1], [0,1], (ω - γ)²)`
    BoundedSquareLoss,
    /// `([0,1], [0,1], |ω - γ|)`
    BoundedAbsoluteLoss,
    /// `([-1,1], [-1,1], (ω - γ)⁴)`
    QuarticLoss,
    /// `({0, …, m-1}, probability vectors, -ln γ(ω))` with counting measure.
    LogLoss { outcomes: usize },
}

impl GameKind {
    /// Declared bounds of outcomes and predictions for scalar games.
    pub fn bounds(self) -> Option<(f64, f64)> {
        match self {
            GameKind::AbsoluteLoss | GameKind::SquareLoss => {
                Some((f64::NEG_INFINITY, f64::INFINITY))
            }
            GameKind::BoundedSquareLoss | GameKind::BoundedAbsoluteLoss => Some((0.0, 1.0)),
            GameKind::QuarticLoss => Some((-1.0, 1.0)),
            GameKind::LogLoss { .. } => None,
        }
    }

    pub fn is_log_loss(self) -> bool {
        matches!(self, GameKind::LogLoss { .. })
    }

    /// Short name used by descriptors and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            GameKind::AbsoluteLoss => "absolute",
            GameKind::SquareLoss => "square",
            GameKind::BoundedSquareLoss => "bounded_square",
            GameKind::BoundedAbsoluteLoss => "bounded_absolute",
            GameKind::QuarticLoss => "quartic",
            GameKind::LogLoss { .. } => "log_loss",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameKind::LogLoss { outcomes } => write!(f, "log_loss(m={outcomes})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A move of a Predictor or Sceptic.
#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    Scalar(f64),
    /// Probability vector over `{0, …, m-1}` (log-loss games).
    Distribution(Vec<f64>),
}

impl Prediction {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Prediction::Scalar(x) => Some(*x),
            Prediction::Distribution(_) => None,
        }
    }

    pub fn as_distribution(&self) -> Option<&[f64]> {
        match self {
            Prediction::Scalar(_) => None,
            Prediction::Distribution(p) => Some(p),
        }
    }

    /// `w·self + (1-w)·other`; both must be of the same shape.
    pub fn mix(&self, w: f64, other: &Prediction) -> Option<Prediction> {
        match (self, other) {
            (Prediction::Scalar(a), Prediction::Scalar(b)) => {
                Some(Prediction::Scalar(w * a + (1.0 - w) * b))
            }
            (Prediction::Distribution(a), Prediction::Distribution(b)) if a.len() == b.len() => {
                Some(Prediction::Distribution(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| w * x + (1.0 - w) * y)
                        .collect(),
                ))
            }
            _ => None,
        }
    }
}

impl From<f64> for Prediction {
    fn from(x: f64) -> Self {
        Prediction::Scalar(x)
    }
}

/// Loss profile `ω ↦ ℓ(ω, γ)` restricted to the outcome grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPoint(Vec<f64>);

impl CanonicalPoint {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for CanonicalPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// How the outcome grid of a game is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomeGrid {
    /// Binary `{lo, hi}` for bounded scalar games, the window grid for
    /// unbounded ones, 1025 points for the quartic game, `{0..m-1}` for log-loss.
    Default,
    /// The two endpoints of the bounds (or window).
    Binary,
    /// `n` uniform points over the bounds (or window).
    Uniform(usize),
    /// Explicit strictly increasing points.
    Points(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct GameBuilder {
    kind: GameKind,
    window: Option<(f64, f64)>,
    outcome_grid: OutcomeGrid,
    grid_size: usize,
}

impl GameBuilder {
    /// Grid window for the unbounded games; ignored (must match) otherwise.
    pub fn window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn outcome_grid(mut self, grid: OutcomeGrid) -> Self {
        self.outcome_grid = grid;
        self
    }

    /// Points per axis of the prediction grid.
    pub fn grid_size(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    pub fn build(self) -> Result<Game> {
        let GameBuilder {
            kind,
            window,
            outcome_grid,
            grid_size,
        } = self;
        if grid_size < 2 {
            return Err(Error::InvalidGrid(
                "prediction grid needs at least 2 points",
            ));
        }
        if let GameKind::LogLoss { outcomes } = kind {
            if outcomes < 2 {
                return Err(Error::InvalidParameter(
                    "log-loss game needs at least 2 outcomes",
                ));
            }
            if window.is_some() {
                return Err(Error::InvalidParameter("log-loss games have no window"));
            }
            let outcome_grid_values: Vec<f64> = (0..outcomes).map(|i| i as f64).collect();
            match outcome_grid {
                OutcomeGrid::Default => {}
                OutcomeGrid::Binary if outcomes == 2 => {}
                OutcomeGrid::Points(ref p) if *p == outcome_grid_values => {}
                _ => {
                    return Err(Error::InvalidGrid(
                        "log-loss outcome grid is always {0, ..., m-1}",
                    ))
                }
            }
            let (params, predictions) = if outcomes == 2 {
                let params = uniform_grid(0.0, 1.0, grid_size);
                let preds = params
                    .iter()
                    .map(|&p| Prediction::Distribution(alloc::vec![1.0 - p, p]))
                    .collect();
                (params, preds)
            } else {
                (Vec::new(), simplex_lattice(outcomes, grid_size))
            };
            return Ok(Game {
                kind,
                window: (0.0, 1.0),
                outcome_grid: outcome_grid_values,
                params,
                prediction_grid: predictions,
            });
        }

        let (blo, bhi) = kind.bounds().expect("scalar game");
        let (lo, hi) = match (window, blo.is_finite()) {
            (Some(w), false) => w,
            (None, false) => (-2.0, 2.0),
            (Some(w), true) if w == (blo, bhi) => w,
            (Some(_), true) => {
                return Err(Error::InvalidParameter(
                    "bounded games use their declared bounds as the grid window",
                ))
            }
            (None, true) => (blo, bhi),
        };
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(
                "window must be a finite interval lo < hi",
            ));
        }
        let outcomes = match outcome_grid {
            OutcomeGrid::Default => match kind {
                GameKind::BoundedSquareLoss | GameKind::BoundedAbsoluteLoss => alloc::vec![lo, hi],
                GameKind::QuarticLoss => uniform_grid(lo, hi, QUARTIC_OUTCOME_GRID_SIZE),
                _ => uniform_grid(lo, hi, grid_size),
            },
            OutcomeGrid::Binary => alloc::vec![lo, hi],
            OutcomeGrid::Uniform(n) if n >= 2 => uniform_grid(lo, hi, n),
            OutcomeGrid::Uniform(_) => {
                return Err(Error::InvalidGrid("outcome grid needs at least 2 points"))
            }
            OutcomeGrid::Points(p) => p,
        };
        if outcomes.is_empty() {
            return Err(Error::InvalidGrid("outcome grid is empty"));
        }
        if outcomes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid(
                "outcome grid must be strictly increasing",
            ));
        }
        if outcomes
            .iter()
            .any(|&x| !(x >= blo && x <= bhi) || !x.is_finite())
        {
            return Err(Error::InvalidGrid("outcome grid leaves the outcome space"));
        }
        let params = uniform_grid(lo, hi, grid_size);
        let prediction_grid = params.iter().map(|&x| Prediction::Scalar(x)).collect();
        Ok(Game {
            kind,
            window: (lo, hi),
            outcome_grid: outcomes,
            params,
            prediction_grid,
        })
    }
}

/// A game of prediction together with the grids its predicates use.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    kind: GameKind,
    window: (f64, f64),
    outcome_grid: Vec<f64>,
    /// Scalar parameters of `prediction_grid` (empty for log-loss with m ≥ 3).
    params: Vec<f64>,
    prediction_grid: Vec<Prediction>,
}

impl Game {
    pub fn builder(kind: GameKind) -> GameBuilder {
        GameBuilder {
            kind,
            window: None,
            outcome_grid: OutcomeGrid::Default,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }

    /// The game with default grids.
    pub fn new(kind: GameKind) -> Result<Game> {
        Game::builder(kind).build()
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    /// The interval the scalar prediction grid covers.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn outcome_grid(&self) -> &[f64] {
        &self.outcome_grid
    }

    pub fn prediction_grid(&self) -> &[Prediction] {
        &self.prediction_grid
    }

    pub fn is_binary(&self) -> bool {
        self.outcome_grid.len() == 2
    }

    /// Number of outcomes of a log-loss game.
    pub fn log_loss_outcomes(&self) -> Option<usize> {
        match self.kind {
            GameKind::LogLoss { outcomes } => Some(outcomes),
            _ => None,
        }
    }

    /// Searches over predictions go through a scalar parameter.
    fn scalar_parameterized(&self) -> bool {
        !self.params.is_empty()
    }

    pub fn validate_outcome(&self, omega: f64) -> Result<()> {
        let ok = match self.kind {
            GameKind::LogLoss { outcomes } => {
                omega >= 0.0 && omega < outcomes as f64 && omega == libm::floor(omega)
            }
            kind => {
                let (lo, hi) = kind.bounds().expect("scalar game");
                omega.is_finite() && omega >= lo && omega <= hi
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutcomeOutOfDomain { outcome: omega })
        }
    }

    pub fn validate_prediction(&self, gamma: &Prediction) -> Result<()> {
        match (self.kind, gamma) {
            (GameKind::LogLoss { outcomes }, Prediction::Distribution(p)) => {
                if p.len() != outcomes {
                    return Err(Error::PredictionOutOfDomain {
                        reason: "probability vector has the wrong length",
                    });
                }
                if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::PredictionOutOfDomain {
                        reason: "probabilities must be finite and non-negative",
                    });
                }
                let s: CompensatedSum = p.iter().copied().collect();
                if fabs(s.value() - 1.0) > PROBABILITY_SUM_TOL {
                    return Err(Error::PredictionOutOfDomain {
                        reason: "probabilities must sum to 1",
                    });
                }
                Ok(())
            }
            (GameKind::LogLoss { .. }, Prediction::Scalar(_)) => {
                Err(Error::PredictionOutOfDomain {
                    reason: "log-loss games predict probability vectors",
                })
            }
            (_, Prediction::Distribution(_)) => Err(Error::PredictionOutOfDomain {
                reason: "scalar games predict real numbers",
            }),
            (kind, Prediction::Scalar(x)) => {
                let (lo, hi) = kind.bounds().expect("scalar game");
                if x.is_finite() && *x >= lo && *x <= hi {
                    Ok(())
                } else {
                    Err(Error::PredictionOutOfDomain {
                        reason: "prediction outside the declared bounds",
                    })
                }
            }
        }
    }

    /// Projects a prediction onto the prediction space (clamping scalars,
    /// renormalising probability vectors).
    pub fn clamp_prediction(&self, gamma: Prediction) -> Prediction {
        match (self.kind, gamma) {
            (GameKind::LogLoss { .. }, Prediction::Distribution(mut p)) => {
                for x in p.iter_mut() {
                    if !(*x >= 0.0) || !x.is_finite() {
                        *x = 0.0;
                    }
                }
                let s: f64 = p.iter().sum();
                if s > 0.0 {
                    p.iter_mut().for_each(|x| *x /= s);
                } else {
                    let m = p.len() as f64;
                    p.iter_mut().for_each(|x| *x = 1.0 / m);
                }
                Prediction::Distribution(p)
            }
            (kind, Prediction::Scalar(x)) => {
                let (lo, hi) = kind.bounds().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                if x.is_nan() {
                    Prediction::Scalar(if lo.is_finite() { lo } else { 0.0 })
                } else {
                    Prediction::Scalar(x.clamp(lo, hi))
                }
            }
            (_, other) => other,
        }
    }

    /// `ℓ(ω, γ)`, validating both arguments.
    pub fn loss(&self, omega: f64, gamma: &Prediction) -> Result<f64> {
        self.validate_outcome(omega)?;
        self.validate_prediction(gamma)?;
        Ok(self.loss_unchecked(omega, gamma))
    }

    pub(crate) fn loss_unchecked(&self, omega: f64, gamma: &Prediction) -> f64 {
        match gamma {
            Prediction::Scalar(g) => self.scalar_loss(omega, *g),
            Prediction::Distribution(p) => {
                let i = omega as usize;
                -log(p[i])
            }
        }
    }

    /// Loss as a function of the scalar search parameter: the prediction itself
    /// for scalar games, the probability of outcome `1` for binary log-loss.
    #[inline]
    pub(crate) fn scalar_loss(&self, omega: f64, x: f64) -> f64 {
        match self.kind {
            GameKind::AbsoluteLoss | GameKind::BoundedAbsoluteLoss => fabs(omega - x),
            GameKind::SquareLoss | GameKind::BoundedSquareLoss => {
                let d = omega - x;
                d * d
            }
            GameKind::QuarticLoss => {
                let d = omega - x;
                let d2 = d * d;
                d2 * d2
            }
            GameKind::LogLoss { .. } => {
                if omega == 0.0 {
                    -log(1.0 - x)
                } else {
                    -log(x)
                }
            }
        }
    }

    fn param_prediction(&self, x: f64) -> Prediction {
        match self.kind {
            GameKind::LogLoss { .. } => Prediction::Distribution(alloc::vec![1.0 - x, x]),
            _ => Prediction::Scalar(x),
        }
    }

    fn param_bounds(&self) -> (f64, f64) {
        match self.kind {
            GameKind::LogLoss { .. } => (0.0, 1.0),
            _ => self.window,
        }
    }

    pub fn canonical_point(&self, gamma: &Prediction) -> Result<CanonicalPoint> {
        self.validate_prediction(gamma)?;
        Ok(self.canonical_point_unchecked(gamma))
    }

    pub(crate) fn canonical_point_unchecked(&self, gamma: &Prediction) -> CanonicalPoint {
        CanonicalPoint(
            self.outcome_grid
                .iter()
                .map(|&w| self.loss_unchecked(w, gamma))
                .collect(),
        )
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.outcome_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.outcome_grid.len(),
                got: point.len(),
            });
        }
        if point.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter("point has NaN coordinates"));
        }
        Ok(())
    }

    /// `min_γ max_ω (ℓ(ω, γ) - target(ω))` and a minimising prediction.
    ///
    /// `target` is a superprediction (up to `tol`) iff the value is `≤ tol`.
    /// This is also the substitution step of the Aggregating Algorithm and the
    /// search used by the level-2 Sceptic.
    pub fn minimax_prediction(&self, target: &[f64]) -> Result<(Prediction, f64)> {
        self.check_point(target)?;
        Ok(self.minimax_unchecked(target))
    }

    pub(crate) fn minimax_unchecked(&self, target: &[f64]) -> (Prediction, f64) {
        if self.scalar_parameterized() {
            let (lo, hi) = self.param_bounds();
            let opt = grid_minimize(&self.params, lo, hi, REFINE_RESOLUTION, |x| {
                self.outcome_grid
                    .iter()
                    .zip(target)
                    .map(|(&w, &t)| excess(self.scalar_loss(w, x), t))
                    .fold(f64::NEG_INFINITY, f64::max)
            });
            (self.param_prediction(opt.argmin), opt.value)
        } else {
            // Log-loss, m ≥ 3: the optimum is γ ∝ e^{-target}, value ln Σ e^{-target}.
            let value = log_sum_exp(target.iter().map(|&t| -t));
            let gamma = if value.is_finite() {
                target.iter().map(|&t| exp(-t - value)).collect()
            } else {
                let m = target.len() as f64;
                alloc::vec![1.0 / m; target.len()]
            };
            (Prediction::Distribution(gamma), value)
        }
    }

    /// `max_γ min_ω (ℓ(ω, γ) - point(ω))`; `point` is a subprediction (up to
    /// `tol`) iff the value is `≥ -tol`.
    pub fn subprediction_margin(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        Ok(self.sub_margin_unchecked(point))
    }

    fn sub_margin_unchecked(&self, point: &[f64]) -> f64 {
        if self.scalar_parameterized() {
            let (lo, hi) = self.param_bounds();
            let opt = grid_minimize(&self.params, lo, hi, REFINE_RESOLUTION, |x| {
                -self
                    .outcome_grid
                    .iter()
                    .zip(point)
                    .map(|(&w, &p)| excess(self.scalar_loss(w, x), p))
                    .fold(f64::INFINITY, f64::min)
            });
            -opt.value
        } else {
            log_sum_exp(point.iter().map(|&t| -t))
        }
    }

    pub fn is_superprediction(&self, point: &[f64], tol: f64) -> Result<bool> {
        check_tol(tol)?;
        Ok(self.minimax_prediction(point)?.1 <= tol)
    }

    pub fn is_subprediction(&self, point: &[f64], tol: f64) -> Result<bool> {
        check_tol(tol)?;
        Ok(self.subprediction_margin(point)? >= -tol)
    }

    /// Canonical points of the prediction grid.
    pub fn grid_canonical_points(&self) -> Vec<CanonicalPoint> {
        self.prediction_grid
            .iter()
            .map(|g| self.canonical_point_unchecked(g))
            .collect()
    }

    /// No two distinct grid canonical points are componentwise ordered.
    pub fn check_non_redundant(&self, tol: f64) -> bool {
        let points = self.grid_canonical_points();
        let values: Vec<&[f64]> = points.iter().map(|p| p.values()).collect();
        points_non_redundant(&values, tol)
    }

    /// Midpoint test for convexity of `e^{-η Λ̄}` over pairs of grid
    /// canonical points.
    ///
    /// Each pair is mapped through `x ↦ e^{-ηx}`, averaged, mapped back by
    /// `y ↦ -ln(y)/η` and tested with [`Game::is_superprediction`] at `tol`.
    /// Cost is quadratic in the prediction grid.
    pub fn check_perfectly_mixable(&self, eta: f64, tol: f64) -> Result<bool> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter("learning rate must be positive"));
        }
        check_tol(tol)?;
        let mapped: Vec<Vec<f64>> = self
            .grid_canonical_points()
            .into_iter()
            .map(|p| p.0.iter().map(|&x| exp(-eta * x)).collect())
            .collect();
        let mut back = alloc::vec![0.0; self.outcome_grid.len()];
        for i in 0..mapped.len() {
            for j in (i + 1)..mapped.len() {
                for ((b, &u), &v) in back.iter_mut().zip(&mapped[i]).zip(&mapped[j]) {
                    *b = -log(0.5 * (u + v)) / eta;
                }
                if self.minimax_unchecked(&back).1 > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Largest finite loss over the grid canonical points.
    pub fn max_grid_loss(&self) -> f64 {
        self.grid_canonical_points()
            .iter()
            .flat_map(|p| p.0.iter().copied())
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("tolerance must be positive"))
    }
}

/// Non-redundancy over an explicit set of loss profiles: no `λ1 ≤ λ2`
/// componentwise with `λ1 ≠ λ2` beyond `tol`.
pub fn points_non_redundant(points: &[&[f64]], tol: f64) -> bool {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let distinct = a
                .iter()
                .zip(b.iter())
                .any(|(x, y)| fabs(excess(*x, *y)) > tol);
            if !distinct {
                continue;
            }
            let a_le_b = a.iter().zip(b.iter()).all(|(x, y)| excess(*x, *y) <= tol);
            let b_le_a = a.iter().zip(b.iter()).all(|(x, y)| excess(*y, *x) <= tol);
            if a_le_b || b_le_a {
                return false;
            }
        }
    }
    true
}

/// Lattice `{k/r : Σk = r}` on the simplex, with `r` as large as the grid size
/// allows without exceeding the lattice cap.
fn simplex_lattice(m: usize, grid_size: usize) -> Vec<Prediction> {
    let mut r = grid_size - 1;
    while r > 1 && binomial(r + m - 1, m - 1) > SIMPLEX_GRID_CAP {
        r -= 1;
    }
    let mut out = Vec::new();
    let mut counts = alloc::vec![0usize; m];
    fill_lattice(&mut out, &mut counts, 0, r, r);
    out
}

fn fill_lattice(
    out: &mut Vec<Prediction>,
    counts: &mut [usize],
    idx: usize,
    left: usize,
    r: usize,
) {
    if idx == counts.len() - 1 {
        counts[idx] = left;
        out.push(Prediction::Distribution(
            counts.iter().map(|&c| c as f64 / r as f64).collect(),
        ));
        return;
    }
    for c in 0..=left {
        counts[idx] = c;
        fill_lattice(out, counts, idx + 1, left - c, r);
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bsq() -> Game {
        Game::new(GameKind::BoundedSquareLoss).unwrap()
    }

    fn log2() -> Game {
        Game::new(GameKind::LogLoss { outcomes: 2 }).unwrap()
    }

    #[test]
    fn loss_examples() {
        let sq = Game::new(GameKind::SquareLoss).unwrap();
        assert_eq!(sq.loss(0.0, &1.0.into()).unwrap(), 1.0);
        let abs = Game::new(GameKind::AbsoluteLoss).unwrap();
        assert_eq!(abs.loss(0.3, &0.8.into()).unwrap(), 0.5);
        let ll = log2();
        let v = ll
            .loss(1.0, &Prediction::Distribution(vec![0.75, 0.25]))
            .unwrap();
        assert!((v - 1.386_294_361_119_890_6).abs() < 1e-12);
        let v = ll
            .loss(1.0, &Prediction::Distribution(vec![1.0, 0.0]))
            .unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn loss_rejects_out_of_domain() {
        let g = bsq();
        assert!(matches!(
            g.loss(1.5, &0.5.into()),
            Err(Error::OutcomeOutOfDomain { .. })
        ));
        assert!(matches!(
            g.loss(0.5, &(-0.1).into()),
            Err(Error::PredictionOutOfDomain { .. })
        ));
        let ll = log2();
        assert!(ll
            .loss(2.0, &Prediction::Distribution(vec![0.5, 0.5]))
            .is_err());
        assert!(ll
            .loss(0.5, &Prediction::Distribution(vec![0.5, 0.5]))
            .is_err());
        assert!(ll
            .loss(0.0, &Prediction::Distribution(vec![0.5, 0.6]))
            .is_err());
        assert!(ll.loss(0.0, &0.5.into()).is_err());
        // Unbounded games accept any finite real.
        let sq = Game::new(GameKind::SquareLoss).unwrap();
        assert_eq!(sq.loss(100.0, &98.0.into()).unwrap(), 4.0);
        assert!(sq.loss(f64::NAN, &0.0.into()).is_err());
    }

    #[test]
    fn canonical_point_examples() {
        let g = bsq();
        assert_eq!(
            g.canonical_point(&0.5.into()).unwrap().values(),
            &[0.25, 0.25]
        );
        assert_eq!(
            g.canonical_point(&0.0.into()).unwrap().values(),
            &[0.0, 1.0]
        );
        let q = Game::builder(GameKind::QuarticLoss)
            .outcome_grid(OutcomeGrid::Points(vec![-1.0, 0.0, 1.0]))
            .build()
            .unwrap();
        assert_eq!(
            q.canonical_point(&1.0.into()).unwrap().values(),
            &[16.0, 1.0, 0.0]
        );
    }

    #[test]
    fn superprediction_examples() {
        let g = bsq();
        assert!(g.is_superprediction(&[1.0, 1.0], DEFAULT_TOL).unwrap());
        assert!(!g.is_superprediction(&[0.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(g.is_superprediction(&[0.25, 0.25], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn subprediction_examples() {
        let g = bsq();
        assert!(g.is_subprediction(&[0.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(g.is_subprediction(&[0.25, 0.25], DEFAULT_TOL).unwrap());
        // Oracle: canonical points are (γ², (1-γ)²); max over γ of the smaller
        // coordinate is 1/4 < 1, so nothing dominates (1, 1).
        let best = (0..=10_000)
            .map(|i| {
                let x = i as f64 / 10_000.0;
                (x * x).min((1.0 - x) * (1.0 - x))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best < 1.0);
        assert!(!g.is_subprediction(&[1.0, 1.0], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn predicates_validate_inputs() {
        let g = bsq();
        assert!(matches!(
            g.is_superprediction(&[1.0], DEFAULT_TOL),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(g.is_superprediction(&[1.0, 1.0], 0.0).is_err());
        assert!(g.is_subprediction(&[f64::NAN, 1.0], DEFAULT_TOL).is_err());
    }

    #[test]
    fn non_redundancy_examples() {
        // Oracle: sweep pairs on a 101-point grid of (γ², (1-γ)²).
        let pts: Vec<[f64; 2]> = (0..=100)
            .map(|i| {
                let x = i as f64 / 100.0;
                [x * x, (1.0 - x) * (1.0 - x)]
            })
            .collect();
        let ordered = pts.iter().enumerate().any(|(i, a)| {
            pts.iter()
                .skip(i + 1)
                .any(|b| (a[0] <= b[0] && a[1] <= b[1]) || (b[0] <= a[0] && b[1] <= a[1]))
        });
        assert!(!ordered);
        assert!(bsq().check_non_redundant(DEFAULT_TOL));

        let synthetic: [&[f64]; 2] = [&[1.0, 1.0], &[2.0, 2.0]];
        assert!(!points_non_redundant(&synthetic, DEFAULT_TOL));

        assert!(log2().check_non_redundant(DEFAULT_TOL));
    }

    #[test]
    fn mixability_examples() {
        assert!(log2().check_perfectly_mixable(1.0, 1e-6).unwrap());
        assert!(!log2().check_perfectly_mixable(1.5, 1e-6).unwrap());
        assert!(bsq().check_perfectly_mixable(2.0, DEFAULT_TOL).unwrap());
        let babs = Game::new(GameKind::BoundedAbsoluteLoss).unwrap();
        assert!(!babs.check_perfectly_mixable(1.0, DEFAULT_TOL).unwrap());
        assert!(bsq().check_perfectly_mixable(0.0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn bounded_square_is_not_mixable_above_two() {
        assert!(!bsq().check_perfectly_mixable(2.5, 1e-6).unwrap());
    }

    #[test]
    fn log_loss_canonical_points_recover_probabilities() {
        for g in [
            log2(),
            Game::new(GameKind::LogLoss { outcomes: 3 }).unwrap(),
        ] {
            for p in g.grid_canonical_points() {
                let s: f64 = p.values().iter().map(|&l| exp(-l)).sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn three_outcome_log_loss_uses_exact_membership() {
        let g = Game::new(GameKind::LogLoss { outcomes: 3 }).unwrap();
        let l3 = libm::log(3.0);
        assert!(g.is_superprediction(&[l3, l3, l3], DEFAULT_TOL).unwrap());
        assert!(g.is_subprediction(&[l3, l3, l3], DEFAULT_TOL).unwrap());
        assert!(!g.is_superprediction(&[1.0, 1.0, 1.0], DEFAULT_TOL).unwrap());
        assert!(!g.is_subprediction(&[1.2, 1.2, 1.2], DEFAULT_TOL).unwrap());
        assert!(g.check_non_redundant(DEFAULT_TOL));
        assert!(g.prediction_grid().len() <= SIMPLEX_GRID_CAP);
    }

    #[test]
    fn builder_rejects_bad_grids() {
        assert!(Game::builder(GameKind::BoundedSquareLoss)
            .outcome_grid(OutcomeGrid::Points(vec![0.5, 0.2]))
            .build()
            .is_err());
        assert!(Game::builder(GameKind::BoundedSquareLoss)
            .outcome_grid(OutcomeGrid::Points(vec![0.0, 1.5]))
            .build()
            .is_err());
        assert!(Game::builder(GameKind::SquareLoss)
            .window(1.0, 1.0)
            .build()
            .is_err());
        assert!(Game::builder(GameKind::BoundedSquareLoss)
            .window(0.0, 2.0)
            .build()
            .is_err());
        assert!(Game::builder(GameKind::SquareLoss)
            .grid_size(1)
            .build()
            .is_err());
        assert!(Game::new(GameKind::LogLoss { outcomes: 1 }).is_err());
    }

    #[test]
    fn grids_are_increasing_and_inside_bounds() {
        for kind in [
            GameKind::AbsoluteLoss,
            GameKind::SquareLoss,
            GameKind::BoundedSquareLoss,
            GameKind::BoundedAbsoluteLoss,
            GameKind::QuarticLoss,
        ] {
            let g = Game::new(kind).unwrap();
            assert!(g.outcome_grid().windows(2).all(|w| w[0] < w[1]));
            let (lo, hi) = kind.bounds().unwrap();
            for p in g.prediction_grid() {
                let x = p.as_scalar().unwrap();
                assert!(x >= lo && x <= hi);
                g.validate_prediction(p).unwrap();
            }
        }
    }
}
