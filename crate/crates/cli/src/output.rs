//! CSV traces and JSON reports.

use std::io::{self, Write};

use jeffreys_core::{CheckResult, Prediction, RunReport, StepRecord, Trace};
use serde_json::{json, Value};

pub const CSV_HEADER: &str =
    "n,gamma1,gamma2,gamma_sceptic,omega,loss1,loss2,loss_sceptic,cum1,cum2,cum_sceptic,gap,divergence_term";

fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn prediction(p: &Prediction) -> String {
    match p {
        Prediction::Scalar(x) => float(*x),
        Prediction::Distribution(d) => d.iter().map(|x| float(*x)).collect::<Vec<_>>().join(";"),
    }
}

pub fn csv_row(s: &StepRecord) -> String {
    let fields = [
        s.n.to_string(),
        prediction(&s.gamma1),
        prediction(&s.gamma2),
        prediction(&s.gamma_sceptic),
        float(s.omega),
        float(s.loss1),
        float(s.loss2),
        float(s.loss_sceptic),
        float(s.cum1),
        float(s.cum2),
        float(s.cum_sceptic),
        float(s.gap),
        s.divergence_term.map(float).unwrap_or_default(),
    ];
    fields.join(",")
}

pub fn write_csv<W: Write>(trace: &Trace, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in &trace.steps {
        writeln!(out, "{}", csv_row(s))?;
    }
    out.flush()
}

/// A JSON number, or `"inf"`, `"-inf"`, `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(float(x))
    }
}

pub fn check_json(c: &CheckResult) -> Value {
    json!({
        "check": c.check.name(),
        "min_slack": num(c.min_slack),
        "max_slack": num(c.max_slack),
        "worst_slack": num(c.worst_slack()),
        "pass": c.pass,
    })
}

pub fn report_json(r: &RunReport, config: &Value) -> Value {
    let names = |v: &[jeffreys_core::Verdict]| v.iter().map(|x| x.name()).collect::<Vec<_>>();
    json!({
        "seed": r.seed,
        "horizon": r.horizon,
        "steps": r.steps,
        "truncated": r.truncated,
        "sceptic": r.sceptic,
        "final_losses": {
            "predictor1": num(r.final_losses.0),
            "predictor2": num(r.final_losses.1),
            "sceptic": num(r.final_losses.2),
        },
        "loss_gaps": {
            "predictor1": num(r.loss_gaps.0),
            "predictor2": num(r.loss_gaps.1),
        },
        "gap_sum_sq": num(r.gap_sum_sq),
        "thresholds": {
            "gap_sum_max": num(r.thresholds.gap_sum_max),
            "loss_gap_min": num(r.thresholds.loss_gap_min),
        },
        "verdicts": {
            "level2": names(&r.verdicts.level2),
            "level3": names(&r.verdicts.level3),
            "strong": names(&r.verdicts.strong),
        },
        "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
        "passed": r.passed(),
        "config": config,
    })
}

pub fn write_json<W: Write>(value: &Value, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}
