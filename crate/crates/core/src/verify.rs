//! Finite-horizon verdicts and guarantee checks on finished traces.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::aggregating::aa_regret_slack;
use crate::error::{Error, Result};
use crate::game::{GameKind, Prediction};
use crate::numeric::{excess, CompensatedSum};
use crate::protocol::{NatureInfo, Trace};
use crate::sceptic::level2_inequality_slack;

/// Slack below which a one-sided check fails.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// Regret of the Aggregating Algorithm against each expert.
    Regret,
    /// The level-2 Sceptic's mixture-minus-divergence bound.
    DivergenceBound,
    /// The level-1 ledger inequality.
    Ledger,
    /// Zero conditional mean of the loss-gap increments under a fair coin.
    MartingaleNull,
}

impl Check {
    pub const ALL: [Check; 4] = [
        Check::Regret,
        Check::DivergenceBound,
        Check::Ledger,
        Check::MartingaleNull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Regret => "regret",
            Check::DivergenceBound => "divergence_bound",
            Check::Ledger => "ledger",
            Check::MartingaleNull => "martingale_null",
        }
    }

    /// Identity checks pass iff `|slack| ≤ tol`; the rest iff `slack ≥ -tol`.
    pub fn is_identity(self) -> bool {
        matches!(self, Check::MartingaleNull)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or(Error::InvalidParameter("unknown check"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckResult {
    pub check: Check,
    pub min_slack: f64,
    pub max_slack: f64,
    pub pass: bool,
}

impl CheckResult {
    fn from_range(check: Check, min_slack: f64, max_slack: f64) -> Self {
        let pass = if check.is_identity() {
            min_slack >= -CHECK_TOL && max_slack <= CHECK_TOL
        } else {
            min_slack >= -CHECK_TOL
        };
        CheckResult {
            check,
            min_slack,
            max_slack,
            pass,
        }
    }

    /// The slack furthest from passing.
    pub fn worst_slack(&self) -> f64 {
        if self.check.is_identity() && self.max_slack.abs() > self.min_slack.abs() {
            self.max_slack
        } else {
            self.min_slack
        }
    }
}

fn range(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    xs.into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
}

fn missing(check: Check, detail: &'static str) -> Error {
    Error::MissingMetadata {
        check: check.name(),
        detail,
    }
}

pub fn verify_check(trace: &Trace, check: Check) -> Result<CheckResult> {
    let (lo, hi) = match check {
        Check::Regret => {
            let log =
                trace.audit.aa.as_ref().ok_or_else(|| {
                    missing(check, "the Sceptic kept no Aggregating Algorithm log")
                })?;
            range(aa_regret_slack(log).into_iter().flatten())
        }
        Check::DivergenceBound => {
            let cfg = trace
                .audit
                .level2
                .as_ref()
                .ok_or_else(|| missing(check, "the Sceptic is not a level-2 Sceptic"))?;
            let series = level2_inequality_slack(&trace.steps, cfg)?;
            range(core::iter::once(cfg.epsilon).chain(series))
        }
        Check::Ledger => {
            let ledger = trace
                .audit
                .ledger
                .as_ref()
                .ok_or_else(|| missing(check, "the Sceptic kept no level-1 ledger"))?;
            if ledger.iter().any(|s| s.area < 0.0) {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            } else {
                range(ledger.iter().map(|s| s.slack()))
            }
        }
        Check::MartingaleNull => martingale_range(trace)?,
    };
    if lo > hi {
        // No steps recorded.
        return Ok(CheckResult::from_range(check, 0.0, 0.0));
    }
    Ok(CheckResult::from_range(check, lo, hi))
}

/// Per step and per Predictor, `E[ℓ(ω, γk) - ℓ(ω, γ̃)]` for a fair coin `ω`.
fn martingale_range(trace: &Trace) -> Result<(f64, f64)> {
    let check = Check::MartingaleNull;
    if trace.game.kind() != GameKind::BoundedAbsoluteLoss {
        return Err(missing(check, "needs the bounded absolute-loss game"));
    }
    if trace.nature != (NatureInfo::Bernoulli { p: 0.5 }) {
        return Err(missing(check, "needs a fair-coin Nature"));
    }
    let mut out = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &trace.steps {
        for g in [&s.gamma1, &s.gamma2] {
            match g {
                Prediction::Scalar(x) if *x == 0.0 || *x == 1.0 => {}
                _ => return Err(missing(check, "needs Predictors that play 0 or 1")),
            }
        }
        let sceptic = &s.gamma_sceptic;
        for g in [&s.gamma1, &s.gamma2] {
            let mean: f64 = [0.0, 1.0]
                .iter()
                .map(|&w| {
                    0.5 * (trace.game.loss_unchecked(w, g) - trace.game.loss_unchecked(w, sceptic))
                })
                .sum();
            out = (out.0.min(mean), out.1.max(mean));
        }
    }
    Ok(out)
}

pub fn verify_run(trace: &Trace, checks: &[Check]) -> Result<Vec<CheckResult>> {
    checks.iter().map(|&c| verify_check(trace, c)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub gap_sum_max: f64,
    pub loss_gap_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            gap_sum_max: 1.0,
            loss_gap_min: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    GapVanishes,
    BeatsP1,
    BeatsP2,
    BeatsWorse,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::GapVanishes => "gap-vanishes",
            Verdict::BeatsP1 => "beats-P1",
            Verdict::BeatsP2 => "beats-P2",
            Verdict::BeatsWorse => "beats-worse",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Threshold verdicts for the three disjunctions: gap or beats-worse
/// (`level2`), gap or beats one named Predictor (`level3`), and the same with
/// the squared-gap sum (`strong`). At a finite horizon all three use the
/// squared-gap sum, so `level3` and `strong` coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct DisjunctVerdicts {
    pub level2: Vec<Verdict>,
    pub level3: Vec<Verdict>,
    pub strong: Vec<Verdict>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub horizon: usize,
    pub steps: usize,
    pub truncated: bool,
    pub sceptic: &'static str,
    /// `(L1, L2, L̃)`.
    pub final_losses: (f64, f64, f64),
    /// `(L1 - L̃, L2 - L̃)`.
    pub loss_gaps: (f64, f64),
    pub gap_sum_sq: f64,
    pub thresholds: Thresholds,
    pub verdicts: DisjunctVerdicts,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn classify_disjuncts(trace: &Trace, thresholds: Thresholds) -> RunReport {
    let (l1, l2, ls) = trace.final_losses();
    let gaps = (excess(l1, ls), excess(l2, ls));
    let gap_sum: CompensatedSum = trace.steps.iter().map(|s| s.gap * s.gap).collect();
    let gap_sum_sq = gap_sum.value();

    let vanishes = gap_sum_sq <= thresholds.gap_sum_max;
    let beats1 = gaps.0 >= thresholds.loss_gap_min;
    let beats2 = gaps.1 >= thresholds.loss_gap_min;
    let finish = |mut v: Vec<Verdict>| {
        if v.is_empty() {
            v.push(Verdict::Inconclusive);
        }
        v
    };
    let mut level2 = Vec::new();
    let mut level3 = Vec::new();
    if vanishes {
        level2.push(Verdict::GapVanishes);
        level3.push(Verdict::GapVanishes);
    }
    if gaps.0.max(gaps.1) >= thresholds.loss_gap_min {
        level2.push(Verdict::BeatsWorse);
    }
    if beats1 {
        level3.push(Verdict::BeatsP1);
    }
    if beats2 {
        level3.push(Verdict::BeatsP2);
    }
    let level3 = finish(level3);
    RunReport {
        seed: trace.seed,
        horizon: trace.horizon,
        steps: trace.steps.len(),
        truncated: trace.truncated,
        sceptic: trace.sceptic_name,
        final_losses: (l1, l2, ls),
        loss_gaps: gaps,
        gap_sum_sq,
        thresholds,
        verdicts: DisjunctVerdicts {
            level2: finish(level2),
            strong: level3.clone(),
            level3,
        },
        checks: Vec::new(),
    }
}

/// [`classify_disjuncts`] plus [`verify_run`].
pub fn report(trace: &Trace, thresholds: Thresholds, checks: &[Check]) -> Result<RunReport> {
    let mut r = classify_disjuncts(trace, thresholds);
    r.checks = verify_run(trace, checks)?;
    Ok(r)
}
