//! Lower and upper α-divergences between predictions.
//!
//! For canonical predictions `λ1, λ2` and `α ∈ (-1, 1)` write
//! `m = (1-α)/2·λ1 + (1+α)/2·λ2` for their α-mean. The lower divergence is
//! `4/(1-α²)` times the largest downward shift `t` that keeps `m - t` a
//! superprediction; the upper divergence uses the smallest shift that makes
//! `m - t` a subprediction. Both are found here by bisection on `t` against
//! the membership predicates of [`Game`].
//!
//! Closed forms are provided for the square-loss game, `(γ1 - γ2)²` for every
//! α, and for log-loss games,
//! `-4/(1-α²) · ln Σ_ω γ1(ω)^{(1-α)/2} γ2(ω)^{(1+α)/2}`.

use alloc::vec::Vec;
use core::fmt;

use libm::{log, pow};

use crate::error::{Error, Result};
use crate::game::{Game, GameKind, Prediction, DEFAULT_TOL, PROBABILITY_SUM_TOL};
use crate::numeric::CompensatedSum;

/// Number of times the bisection range is doubled before giving up.
const BRACKET_DOUBLINGS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
    /// The textbook log-loss α-divergence `4/(1-α²)·(1 - Σ γ1^a γ2^b)`.
    Standard,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
            Side::Standard => "standard",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    NumericBisection,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::NumericBisection => "numeric_bisection",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceResult {
    pub alpha: f64,
    pub side: Side,
    /// `4/(1-α²) · shift`; may be `±∞`.
    pub value: f64,
    /// The vertical shift `t` applied to the α-mean (before scaling).
    pub shift: f64,
    pub method: Method,
    /// Final bisection bracket width on `t` (0 for closed forms).
    pub tol: f64,
    /// Membership never flipped inside the search range; `value` is `±∞`.
    pub unbracketed: bool,
}

impl DivergenceResult {
    pub fn closed_form(alpha: f64, side: Side, value: f64) -> Self {
        let shift = if alpha.abs() < 1.0 {
            value * (1.0 - alpha * alpha) / 4.0
        } else {
            0.0
        };
        DivergenceResult {
            alpha,
            side,
            value,
            shift,
            method: Method::ClosedForm,
            tol: 0.0,
            unbracketed: false,
        }
    }
}

/// Weights `((1-α)/2, (1+α)/2)` of the α-mean.
pub fn alpha_weights(alpha: f64) -> (f64, f64) {
    ((1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0)
}

/// `4 / (1 - α²)`.
pub fn alpha_scale(alpha: f64) -> f64 {
    4.0 / (1.0 - alpha * alpha)
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("alpha must lie in (-1, 1)"))
    }
}

fn check_closed_alpha(alpha: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("alpha must lie in [-1, 1]"))
    }
}

fn alpha_mean(game: &Game, g1: &Prediction, g2: &Prediction, alpha: f64) -> Result<Vec<f64>> {
    let l1 = game.canonical_point(g1)?;
    let l2 = game.canonical_point(g2)?;
    let (a, b) = alpha_weights(alpha);
    Ok(l1
        .values()
        .iter()
        .zip(l2.values())
        .map(|(x, y)| a * x + b * y)
        .collect())
}

fn search_radius(game: &Game, mean: &[f64]) -> f64 {
    let m = mean
        .iter()
        .filter(|x| x.is_finite())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    4.0 * m.max(game.max_grid_loss()).max(1.0)
}

struct Bisection {
    shift: f64,
    width: f64,
    unbracketed: bool,
}

/// Finds the flip of a monotone predicate on `t`. `member_at_low` tells which
/// side of the flip is "inside" for low `t`.
fn bisect(
    radius: f64,
    tol: f64,
    member_at_low: bool,
    mut member: impl FnMut(f64) -> bool,
) -> Bisection {
    let (mut lo, mut hi) = (-radius, radius);
    let mut doublings = 0;
    // Want member(lo) == member_at_low and member(hi) != member_at_low.
    loop {
        let lo_ok = member(lo) == member_at_low;
        let hi_ok = member(hi) != member_at_low;
        if lo_ok && hi_ok {
            break;
        }
        if doublings == BRACKET_DOUBLINGS {
            // The predicate is constant on the whole range. For the lower
            // divergence a member at `hi` means sup = +∞; for the upper one a
            // non-member at `hi` means inf ∅ = +∞. Otherwise the flip lies
            // below `lo`.
            let shift = if hi_ok {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            return Bisection {
                shift,
                width: f64::INFINITY,
                unbracketed: true,
            };
        }
        if !lo_ok {
            lo *= 2.0;
        }
        if !hi_ok {
            hi *= 2.0;
        }
        doublings += 1;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if member(mid) == member_at_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Bisection {
        shift: 0.5 * (lo + hi),
        width: hi - lo,
        unbracketed: false,
    }
}

fn membership_tol(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-13, DEFAULT_TOL)
}

fn shifted(mean: &[f64], t: f64, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(mean.iter().map(|m| m - t));
}

fn finish(alpha: f64, side: Side, b: Bisection) -> DivergenceResult {
    DivergenceResult {
        alpha,
        side,
        value: alpha_scale(alpha) * b.shift,
        shift: b.shift,
        method: Method::NumericBisection,
        tol: b.width,
        unbracketed: b.unbracketed,
    }
}

/// Lower α-divergence by bisection on the superprediction predicate.
pub fn lower_alpha_divergence_numeric(
    game: &Game,
    g1: &Prediction,
    g2: &Prediction,
    alpha: f64,
    tol: f64,
) -> Result<DivergenceResult> {
    check_open_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let mean = alpha_mean(game, g1, g2, alpha)?;
    let radius = search_radius(game, &mean);
    let mtol = membership_tol(tol);
    let mut buf = Vec::with_capacity(mean.len());
    let b = bisect(radius, tol, true, |t| {
        shifted(&mean, t, &mut buf);
        game.minimax_unchecked(&buf).1 <= mtol
    });
    Ok(finish(alpha, Side::Lower, b))
}

/// Upper α-divergence by bisection on the subprediction predicate.
pub fn upper_alpha_divergence_numeric(
    game: &Game,
    g1: &Prediction,
    g2: &Prediction,
    alpha: f64,
    tol: f64,
) -> Result<DivergenceResult> {
    check_open_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let mean = alpha_mean(game, g1, g2, alpha)?;
    let radius = search_radius(game, &mean);
    let mtol = membership_tol(tol);
    let mut buf = Vec::with_capacity(mean.len());
    let b = bisect(radius, tol, false, |t| {
        shifted(&mean, t, &mut buf);
        game.subprediction_margin(&buf)
            .map(|v| v >= -mtol)
            .unwrap_or(false)
    });
    Ok(finish(alpha, Side::Upper, b))
}

/// Square-loss divergence `(γ1 - γ2)²`, the same for every `α ∈ [-1, 1]`.
pub fn alpha_divergence_square_loss(g1: f64, g2: f64, alpha: f64) -> Result<f64> {
    check_closed_alpha(alpha)?;
    let d = g1 - g2;
    Ok(d * d)
}

fn check_distributions(g1: &[f64], g2: &[f64]) -> Result<()> {
    if g1.len() != g2.len() {
        return Err(Error::DimensionMismatch {
            expected: g1.len(),
            got: g2.len(),
        });
    }
    for p in [g1, g2] {
        if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::PredictionOutOfDomain {
                reason: "probabilities must be finite and non-negative",
            });
        }
        let s: CompensatedSum = p.iter().copied().collect();
        if (s.value() - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::PredictionOutOfDomain {
                reason: "probabilities must sum to 1",
            });
        }
    }
    Ok(())
}

/// `Σ_ω γ1(ω)^{(1-α)/2} γ2(ω)^{(1+α)/2}` (the Hellinger affinity at α = 0).
pub fn alpha_affinity(g1: &[f64], g2: &[f64], alpha: f64) -> f64 {
    let (a, b) = alpha_weights(alpha);
    let s: CompensatedSum = g1
        .iter()
        .zip(g2)
        .map(|(&p, &q)| {
            if p == 0.0 || q == 0.0 {
                0.0
            } else {
                pow(p, a) * pow(q, b)
            }
        })
        .collect();
    s.value()
}

/// Log-loss divergence `-4/(1-α²) ln Σ γ1^a γ2^b`; `+∞` when the affinity
/// vanishes. At `α = ∓1` this is the Kullback–Leibler divergence
/// `KL(γ1‖γ2)` (resp. `KL(γ2‖γ1)`).
pub fn alpha_divergence_log_loss(g1: &[f64], g2: &[f64], alpha: f64) -> Result<f64> {
    check_closed_alpha(alpha)?;
    check_distributions(g1, g2)?;
    if alpha == -1.0 {
        return kl_divergence_log_loss(g1, g2);
    }
    if alpha == 1.0 {
        return kl_divergence_log_loss(g2, g1);
    }
    Ok(log_loss_divergence_unchecked(g1, g2, alpha))
}

pub(crate) fn log_loss_divergence_unchecked(g1: &[f64], g2: &[f64], alpha: f64) -> f64 {
    let s = alpha_affinity(g1, g2, alpha);
    if s == 0.0 {
        f64::INFINITY
    } else {
        -alpha_scale(alpha) * log(s)
    }
}

/// `4/(1-α²) · (1 - Σ γ1^a γ2^b)`.
pub fn standard_alpha_divergence_log_loss(g1: &[f64], g2: &[f64], alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    check_distributions(g1, g2)?;
    Ok(alpha_scale(alpha) * (1.0 - alpha_affinity(g1, g2, alpha)))
}

/// `Σ γ1 ln(γ1/γ2)` with `0·ln(0/q) = 0` and `p·ln(p/0) = +∞`.
pub fn kl_divergence_log_loss(g1: &[f64], g2: &[f64]) -> Result<f64> {
    check_distributions(g1, g2)?;
    let mut s = CompensatedSum::new();
    for (&p, &q) in g1.iter().zip(g2) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        s.add(p * log(p / q));
    }
    Ok(s.value())
}

/// The lower divergence by the cheapest exact route available: closed forms
/// for the square-loss and log-loss games, bisection otherwise.
pub fn lower_alpha_divergence(
    game: &Game,
    g1: &Prediction,
    g2: &Prediction,
    alpha: f64,
    tol: f64,
) -> Result<DivergenceResult> {
    check_open_alpha(alpha)?;
    match game.kind() {
        GameKind::SquareLoss | GameKind::BoundedSquareLoss => {
            game.validate_prediction(g1)?;
            game.validate_prediction(g2)?;
            let (x, y) = (g1.as_scalar().unwrap(), g2.as_scalar().unwrap());
            Ok(DivergenceResult::closed_form(
                alpha,
                Side::Lower,
                alpha_divergence_square_loss(x, y, alpha)?,
            ))
        }
        GameKind::LogLoss { .. } => {
            game.validate_prediction(g1)?;
            game.validate_prediction(g2)?;
            let (p, q) = (g1.as_distribution().unwrap(), g2.as_distribution().unwrap());
            Ok(DivergenceResult::closed_form(
                alpha,
                Side::Lower,
                log_loss_divergence_unchecked(p, q, alpha),
            ))
        }
        _ => lower_alpha_divergence_numeric(game, g1, g2, alpha, tol),
    }
}
