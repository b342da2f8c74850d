use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use jeffreys_core::divergence::standard_alpha_divergence_log_loss;
use jeffreys_core::{
    lower_alpha_divergence, lower_alpha_divergence_numeric, report, run_protocol,
    upper_alpha_divergence_numeric, DivergenceResult, Game, GameKind, Method, Prediction,
    RunReport, Side, Trace,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{GameConfig, Scenario};
use crate::output::{check_json, num, report_json, write_csv, write_json};

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or config; nothing was run.
    Usage(anyhow::Error),
    /// A run aborted or a check failed.
    Run(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Run(e) => e,
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

fn usage<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::Usage)
}

fn failed<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::Run)
}

/// Plays one seed of `scenario` and scores it.
pub fn play(scenario: &Scenario, seed: u64) -> anyhow::Result<(Trace, RunReport)> {
    let mut p = scenario.players()?;
    let trace = run_protocol(
        &scenario.game,
        &mut p.predictor1,
        &mut p.predictor2,
        p.sceptic.as_mut(),
        &mut p.nature,
        scenario.config.horizon,
        seed,
    )
    .with_context(|| format!("run with seed {seed} aborted"))?;
    let r = report(&trace, scenario.config.thresholds.into(), &scenario.checks)
        .with_context(|| format!("checks for seed {seed}"))?;
    Ok((trace, r))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn config_echo(scenario: &Scenario) -> Value {
    serde_json::to_value(&scenario.config).unwrap_or(Value::Null)
}

#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub trace_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

/// Returns the report; checks that fail turn into [`Failure::Run`] after
/// every output has been written.
pub fn run(args: &RunArgs) -> Outcome<RunReport> {
    let scenario = usage(Scenario::load(&args.config))?;
    let seed = args.seed.unwrap_or(scenario.config.seed);
    let (trace, r) = failed(play(&scenario, seed))?;
    let outputs = &scenario.config.outputs;
    let trace_csv = args
        .trace_csv
        .clone()
        .or(scenario.resolve(&outputs.trace_csv));
    if let Some(path) = trace_csv {
        failed(create(&path).and_then(|w| Ok(write_csv(&trace, w)?)))?;
    }
    let value = report_json(&r, &config_echo(&scenario));
    match args
        .report_json
        .clone()
        .or(scenario.resolve(&outputs.report_json))
    {
        Some(path) => failed(create(&path).and_then(|w| Ok(write_json(&value, w)?)))?,
        None => failed(write_json(&value, std::io::stdout().lock()).map_err(Into::into))?,
    }
    if !r.passed() {
        let names: Vec<_> = r
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.check.name())
            .collect();
        return Err(Failure::Run(anyhow!("checks failed: {}", names.join(", "))));
    }
    Ok(r)
}

#[derive(Clone, Debug, Default)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub seeds: Option<Vec<u64>>,
    pub aggregate_json: Option<PathBuf>,
}

/// Runs every seed in parallel and writes one aggregate document.
pub fn sweep(args: &SweepArgs) -> Outcome<Value> {
    let scenario = usage(Scenario::load(&args.config))?;
    let seeds = args.seeds.clone().unwrap_or_else(|| scenario.seeds());
    if seeds.is_empty() {
        return Err(Failure::Usage(anyhow!("the seed list is empty")));
    }
    let results: Vec<(u64, anyhow::Result<RunReport>)> = seeds
        .par_iter()
        .map(|&seed| (seed, play(&scenario, seed).map(|(_, r)| r)))
        .collect();
    let aggregate = aggregate(&scenario, results);
    let path = args
        .aggregate_json
        .clone()
        .or(scenario.resolve(&scenario.config.outputs.aggregate_json));
    match path {
        Some(path) => failed(create(&path).and_then(|w| Ok(write_json(&aggregate, w)?)))?,
        None => failed(write_json(&aggregate, std::io::stdout().lock()).map_err(Into::into))?,
    }
    let n_failed = aggregate["failures"].as_array().map_or(0, Vec::len);
    if n_failed > 0 {
        return Err(Failure::Run(anyhow!("{n_failed} seed(s) failed")));
    }
    Ok(aggregate)
}

fn aggregate(scenario: &Scenario, mut results: Vec<(u64, anyhow::Result<RunReport>)>) -> Value {
    results.sort_by_key(|(seed, _)| *seed);
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut histogram: BTreeMap<&'static str, BTreeMap<&'static str, usize>> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut runs = Vec::new();
    for (seed, result) in &results {
        let r = match result {
            Ok(r) => r,
            Err(e) => {
                failures.push(json!({ "seed": seed, "error": format!("{e:#}") }));
                runs.push(json!({ "seed": seed, "error": format!("{e:#}") }));
                continue;
            }
        };
        for c in &r.checks {
            let w = worst.entry(c.check.name()).or_insert(f64::INFINITY);
            *w = w.min(c.worst_slack());
        }
        for (set, verdicts) in [
            ("level2", &r.verdicts.level2),
            ("level3", &r.verdicts.level3),
            ("strong", &r.verdicts.strong),
        ] {
            let h = histogram.entry(set).or_default();
            for v in verdicts {
                *h.entry(v.name()).or_default() += 1;
            }
        }
        if !r.passed() {
            let names: Vec<_> = r
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.check.name())
                .collect();
            failures.push(json!({ "seed": seed, "failed_checks": names }));
        }
        runs.push(json!({
            "seed": seed,
            "steps": r.steps,
            "truncated": r.truncated,
            "final_losses": [num(r.final_losses.0), num(r.final_losses.1), num(r.final_losses.2)],
            "loss_gaps": [num(r.loss_gaps.0), num(r.loss_gaps.1)],
            "gap_sum_sq": num(r.gap_sum_sq),
            "verdicts": {
                "level2": r.verdicts.level2.iter().map(|v| v.name()).collect::<Vec<_>>(),
                "level3": r.verdicts.level3.iter().map(|v| v.name()).collect::<Vec<_>>(),
                "strong": r.verdicts.strong.iter().map(|v| v.name()).collect::<Vec<_>>(),
            },
            "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
        }));
    }
    let worst: BTreeMap<_, _> = worst.into_iter().map(|(k, v)| (k, num(v))).collect();
    json!({
        "seeds": results.len(),
        "horizon": scenario.config.horizon,
        "worst_slack": worst,
        "verdicts": histogram,
        "failures": failures,
        "runs": runs,
        "config": config_echo(scenario),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Closed,
    Numeric,
}

#[derive(Clone, Debug)]
pub struct DivergenceArgs {
    pub game: String,
    /// A scalar, a probability of outcome 1 (binary log-loss), or a
    /// `;`-separated distribution.
    pub g1: String,
    pub g2: String,
    pub alpha: f64,
    pub side: Side,
    pub method: MethodChoice,
    pub tol: f64,
    pub grid_size: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub outcomes: Option<usize>,
}

fn parse_prediction(game: &GameConfig, text: &str) -> anyhow::Result<Prediction> {
    let parts = text
        .split(';')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("cannot parse prediction `{text}`"))?;
    let log = game.kind()?.is_log_loss();
    Ok(match (log, parts.as_slice()) {
        (true, [p]) => Prediction::Distribution(vec![1.0 - p, *p]),
        (true, _) => Prediction::Distribution(parts),
        (false, [x]) => Prediction::Scalar(*x),
        (false, _) => bail!("a scalar game takes a single number, got `{text}`"),
    })
}

pub fn divergence(args: &DivergenceArgs) -> Outcome<DivergenceResult> {
    let mut game_config = GameConfig::named(&args.game);
    game_config.grid_size = args.grid_size;
    game_config.outcomes = args.outcomes;
    let g1 = usage(parse_prediction(&game_config, &args.g1))?;
    let g2 = usage(parse_prediction(&game_config, &args.g2))?;
    let kind = usage(game_config.kind())?;
    let unbounded = matches!(kind, GameKind::AbsoluteLoss | GameKind::SquareLoss);
    game_config.window = match (args.window, &g1, &g2) {
        (Some(w), _, _) => Some(w),
        (None, Prediction::Scalar(x), Prediction::Scalar(y)) if unbounded => {
            Some((x.min(*y).min(-2.0), x.max(*y).max(2.0)))
        }
        _ => None,
    };
    let game = usage(game_config.build())?;
    usage(compute_divergence(&game, &g1, &g2, args))
}

fn compute_divergence(
    game: &Game,
    g1: &Prediction,
    g2: &Prediction,
    args: &DivergenceArgs,
) -> anyhow::Result<DivergenceResult> {
    let kind = game.kind();
    let closed_lower = matches!(
        kind,
        GameKind::SquareLoss | GameKind::BoundedSquareLoss | GameKind::LogLoss { .. }
    );
    let (alpha, tol) = (args.alpha, args.tol);
    Ok(match (args.side, args.method) {
        (Side::Lower, MethodChoice::Auto) => lower_alpha_divergence(game, g1, g2, alpha, tol)?,
        (Side::Lower, MethodChoice::Closed) if closed_lower => {
            lower_alpha_divergence(game, g1, g2, alpha, tol)?
        }
        (Side::Lower, MethodChoice::Numeric) => {
            lower_alpha_divergence_numeric(game, g1, g2, alpha, tol)?
        }
        (Side::Upper, MethodChoice::Auto | MethodChoice::Numeric) => {
            upper_alpha_divergence_numeric(game, g1, g2, alpha, tol)?
        }
        (Side::Standard, MethodChoice::Auto | MethodChoice::Closed) if kind.is_log_loss() => {
            game.validate_prediction(g1)?;
            game.validate_prediction(g2)?;
            let (p, q) = (g1.as_distribution().unwrap(), g2.as_distribution().unwrap());
            DivergenceResult::closed_form(
                alpha,
                Side::Standard,
                standard_alpha_divergence_log_loss(p, q, alpha)?,
            )
        }
        (side, method) => bail!(
            "no {} method for the {} divergence in the {kind} game",
            match method {
                MethodChoice::Auto => "available",
                MethodChoice::Closed => "closed-form",
                MethodChoice::Numeric => "numeric",
            },
            side.name()
        ),
    })
}

pub fn divergence_json(game: &str, d: &DivergenceResult) -> Value {
    json!({
        "game": game,
        "alpha": num(d.alpha),
        "side": d.side.name(),
        "method": match d.method {
            Method::ClosedForm => "closed",
            Method::NumericBisection => "numeric",
        },
        "value": num(d.value),
        "shift": num(d.shift),
        "tol": num(d.tol),
        "unbracketed": d.unbracketed,
    })
}
