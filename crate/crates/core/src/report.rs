//! Summaries and report files, derived only from persisted trial records.
//!
//! Every file written here is a pure function of the run configuration and
//! the records, so a rerun or a resumed run yields identical bytes. CSVs use
//! `.` decimals, no thousands separators and LF line endings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gateway::classify_yes_no;
use crate::harness::{RunConfig, TrialDetail, TrialLine};
use crate::mentalism::{compute_isr, MentalismOutcome, VerificationReport};
use crate::number::{compute_esm, esm_standard_error, AnswerCounts, YesRateTable};
use crate::stats::{bernoulli_se, convergence_check, RunningEstimate, DEFAULT_CONVERGENCE_WINDOW};
use crate::transcript::{AnswerLabel, DecodeConfig, Role, Transcript};
use crate::yesno::{compute_msc_pr, histogram_csv, histogram_steps, load_catalog, TrialOutcome, TrialStatus};

pub const SUMMARY_FILE: &str = "summary.json";
pub const SCHEMA_VERSION: u32 = 1;
pub const HISTOGRAM_BIN_WIDTH: u32 = 10;

/// Files to write into the run directory, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub summary: Value,
    pub files: Vec<(String, String)>,
}

pub fn emit_reports(out_dir: &Path, bundle: &ReportBundle) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, body) in &bundle.files {
        write_file(&out_dir.join(name), body)?;
    }
    write_file(&out_dir.join(SUMMARY_FILE), &to_json_text(&bundle.summary)?)
}

pub fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Config as recorded in the summary: everything except where it was written.
fn config_value(cfg: &RunConfig) -> Result<Value> {
    let mut v = serde_json::to_value(cfg)?;
    if let Value::Object(map) = &mut v {
        map.remove("out_dir");
    }
    Ok(v)
}

fn summary(cfg: &RunConfig, trials_recorded: usize, metrics: Value) -> Result<Value> {
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "game": cfg.game,
        "agent": cfg.agent,
        "seed": cfg.seed,
        "trials_recorded": trials_recorded,
        "config": config_value(cfg)?,
        "metrics": metrics,
    }))
}

fn final_reply(t: &Transcript) -> Option<&str> {
    t.messages
        .last()
        .filter(|m| m.role == Role::Assistant)
        .map(|m| m.content.as_str())
}

#[derive(Debug, Clone, Serialize)]
struct Convergence {
    window: usize,
    converged: bool,
    spread: f64,
    tolerance: f64,
}

fn convergence(outcomes: impl IntoIterator<Item = bool>) -> Option<Convergence> {
    let est = RunningEstimate::from_outcomes(outcomes);
    convergence_check(&est, DEFAULT_CONVERGENCE_WINDOW, None)
        .ok()
        .map(|r| Convergence {
            window: r.window,
            converged: r.converged,
            spread: r.spread,
            tolerance: r.tolerance,
        })
}

#[derive(Debug, Clone, Serialize)]
struct NumberCell {
    n: u32,
    temperature: f64,
    top_p: f64,
    esm: f64,
    esm_se: f64,
    unparseable: u32,
    argmax: Option<u32>,
    rates: Vec<f64>,
}

/// Yes-rate tables and ESM per `(decode, n)` cell. Labels are re-derived from
/// the recorded replies.
pub fn number_report(cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
    let mut cells: Vec<((String, u32), DecodeConfig, BTreeMap<u32, AnswerCounts>)> = Vec::new();
    for line in lines {
        let TrialDetail::Number { n, index, decode, .. } = &line.detail else {
            return Err(Error::State(format!("{}: not a number-game record", line.trial_id)));
        };
        let label = final_reply(&line.transcript)
            .map(classify_yes_no)
            .unwrap_or(AnswerLabel::Unparseable);
        let key = (decode.label(), *n);
        let pos = match cells.iter().position(|(k, _, _)| *k == key) {
            Some(p) => p,
            None => {
                cells.push((key, *decode, BTreeMap::new()));
                cells.len() - 1
            }
        };
        cells[pos].2.entry(*index).or_default().record(label);
    }

    let single = cells.len() == 1;
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut esm_csv = String::from("n,temperature,top_p,esm,esm_se,unparseable\n");
    for ((label, n), decode, counts) in cells {
        let table = YesRateTable::from_counts(n, cfg.trials, counts)?;
        let esm = compute_esm(&table)?;
        let esm_se = esm_standard_error(&table);
        let name = if single {
            "yes_rates.csv".to_string()
        } else {
            format!("yes_rates_n{n}_{label}.csv")
        };
        files.push((name, table.to_csv()));
        esm_csv.push_str(&format!(
            "{n},{},{},{esm},{esm_se},{}\n",
            decode.temperature,
            decode.top_p,
            table.unparseable_total()
        ));
        rows.push(NumberCell {
            n,
            temperature: decode.temperature,
            top_p: decode.top_p,
            esm,
            esm_se,
            unparseable: table.unparseable_total(),
            argmax: table.argmax(),
            rates: table.rates.values().copied().collect(),
        });
    }
    files.push(("esm.csv".into(), esm_csv));
    let metrics = json!({ "trials_per_query": cfg.trials, "cells": rows });
    Ok(ReportBundle {
        summary: summary(cfg, lines.len(), metrics)?,
        files,
    })
}

/// Pass rate, mean steps to contradiction and histograms. Each outcome is
/// replayed from its recorded constraints rather than trusted as stored.
pub fn yesno_report(cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
    let catalog = load_catalog();
    let max_steps = cfg.yesno.max_steps;
    let mut outcomes = Vec::with_capacity(lines.len());
    let mut outcomes_csv = String::from(
        "trial_id,status,steps_completed,contradiction_step,first_emptied_attribute,target\n",
    );
    for line in lines {
        let TrialDetail::Yesno {
            status,
            constraints,
            target,
            ..
        } = &line.detail
        else {
            return Err(Error::State(format!("{}: not a yes/no record", line.trial_id)));
        };
        let outcome = TrialOutcome::from_constraints(
            &catalog,
            constraints.clone(),
            max_steps,
            *status == TrialStatus::ProtocolFailure,
        )?;
        outcomes_csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            line.trial_id,
            status_name(outcome.status),
            outcome.steps_completed,
            outcome.contradiction_step.map(|s| s.to_string()).unwrap_or_default(),
            outcome.first_emptied_attribute.map(|a| a.name()).unwrap_or_default(),
            target.as_deref().unwrap_or_default(),
        ));
        outcomes.push(outcome);
    }
    let metrics = compute_msc_pr(&outcomes, max_steps)?;
    let bins = histogram_steps(&outcomes, HISTOGRAM_BIN_WIDTH)?;
    let counted: Vec<bool> = outcomes
        .iter()
        .filter(|o| o.status != TrialStatus::ProtocolFailure)
        .map(|o| o.status == TrialStatus::Pass)
        .collect();
    let pr_se = bernoulli_se(metrics.pass_rate / 100.0, counted.len() as u64)? * 100.0;
    let value = json!({
        "max_steps": max_steps,
        "ablation": cfg.yesno.ablation,
        "pass_rate": metrics.pass_rate,
        "pass_rate_se": pr_se,
        "passes": metrics.passes,
        "contradictions": metrics.contradictions,
        "protocol_failures": metrics.protocol_failures,
        "counted_trials": metrics.counted_trials,
        "msc_failures": metrics.msc_failures,
        "msc_censored": metrics.msc_censored,
        "failures_by_attribute": metrics.failures_by_attribute,
        "pass_convergence": convergence(counted),
    });
    Ok(ReportBundle {
        summary: summary(cfg, lines.len(), value)?,
        files: vec![
            ("steps_histogram.csv".into(), histogram_csv(&bins)),
            ("outcomes.csv".into(), outcomes_csv),
            ("catalog.csv".into(), catalog.to_csv()),
        ],
    })
}

fn status_name(s: TrialStatus) -> &'static str {
    match s {
        TrialStatus::Contradiction => "contradiction",
        TrialStatus::Pass => "pass",
        TrialStatus::ProtocolFailure => "protocol_failure",
    }
}

/// Invariant success rate, re-scored from each recorded final answer.
pub fn mentalism_report(cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
    let range = cfg.mentalism.number_range;
    let mut outcomes = Vec::with_capacity(lines.len());
    let mut isr_csv = String::from("trial_id,a,b,c,reported_final,reported_aside,success\n");
    for line in lines {
        let TrialDetail::Mentalism { params, .. } = &line.detail else {
            return Err(Error::State(format!("{}: not a mentalism record", line.trial_id)));
        };
        let outcome = MentalismOutcome::from_response(final_reply(&line.transcript).unwrap_or(""), range);
        let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        isr_csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            line.trial_id,
            params.a,
            params.b,
            params.c,
            opt(outcome.reported_final),
            opt(outcome.reported_aside),
            outcome.success as u8
        ));
        outcomes.push(outcome);
    }
    let isr = compute_isr(&outcomes)?;
    let mut values_csv = String::from("value,count\n");
    for (v, c) in &isr.reported_final_counts {
        values_csv.push_str(&format!("{v},{c}\n"));
    }
    let value = json!({
        "cot": cfg.mentalism.cot,
        "number_range": range,
        "trials": isr.trials,
        "successes": isr.successes,
        "unparseable": isr.unparseable,
        "isr": isr.isr,
        "isr_se": bernoulli_se(isr.isr, isr.trials as u64)?,
        "blue_seven_share": isr.blue_seven_share,
        "reported_value_entropy": isr.reported_value_entropy,
        "isr_convergence": convergence(outcomes.iter().map(|o| o.success)),
    });
    Ok(ReportBundle {
        summary: summary(cfg, lines.len(), value)?,
        files: vec![
            ("isr.csv".into(), isr_csv),
            ("reported_values.csv".into(), values_csv),
        ],
    })
}

/// `verification.json` keeps the wall time; the summary leaves it out.
pub fn verify_report(cfg: &RunConfig, report: &VerificationReport) -> Result<ReportBundle> {
    let value = json!({
        "number_range": report.number_range,
        "domain": report.domain,
        "modes": report.modes,
        "tuples_checked": report.tuples_checked,
        "violation_count": report.violation_count,
        "passed": report.passed(),
    });
    Ok(ReportBundle {
        summary: summary(cfg, 0, value)?,
        files: vec![("verification.json".into(), to_json_text(report)?)],
    })
}
