//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use lsp_probe::agent::{
    make_always_no_agent, make_perfect_lsp_number_agent, make_perfect_lsp_object_agent,
    make_random_answer_agent, PerfectLspObjectAgent,
};
use lsp_probe::harness::{execute, ExecOptions, Game, PartialConfig, RunConfig};
use lsp_probe::mentalism::{
    apply_rotate, compute_isr, hidden_position_after_rotate7, josephus_path,
    verify_invariant_exhaustive, InsertionMode, MentalismOutcome,
};
use lsp_probe::number::{compute_esm, estimate_yes_rates, NumberGameConfig, YesRateTable};
use lsp_probe::stats::{bernoulli_se, convergence_check, RunningEstimate};
use lsp_probe::yesno::{
    compute_msc_pr, load_catalog, run_yesno_trial, run_yesno_trial_with, update_feasible_set,
    Ablation, Attribute, Direction, FeasibleSet, Query, ScriptedQueries, TrialOutcome, TrialStatus,
};
use lsp_probe::{seed, DecodeConfig};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_s), || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn c1_exhaustive_invariance() -> Check {
    let started = Instant::now();
    let report = verify_invariant_exhaustive(3, &InsertionMode::ALL).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let expected: u64 = 81 * 7 * 3 * 3 * 16 + 81 * 7 * 3 * 3 * 1024;
    ensure(report.tuples_checked == expected, || {
        format!("checked {} tuples, expected {expected}", report.tuples_checked)
    })?;
    ensure(report.violation_count == 0, || {
        format!("{} violations, first {:?}", report.violation_count, report.violations.first())
    })?;
    within(elapsed, 60)?;
    Ok(format!(
        "{} tuples, 0 violations, {:.1}s",
        report.tuples_checked,
        elapsed.as_secs_f64()
    ))
}

fn c2_survival_paths() -> Check {
    let paths: [(usize, Vec<Vec<u32>>); 3] = [
        (
            1,
            vec![
                vec![1, 2, 3, 4, 5, 6],
                vec![3, 4, 5, 6, 1],
                vec![5, 6, 1, 3],
                vec![1, 3, 5],
                vec![5, 1],
                vec![5],
            ],
        ),
        (
            2,
            vec![
                vec![1, 2, 3, 4, 5],
                vec![3, 4, 5, 1],
                vec![5, 1, 3],
                vec![3, 5],
                vec![3],
            ],
        ),
        (3, vec![vec![1, 2, 3, 4], vec![3, 4, 1], vec![1, 3], vec![1]]),
    ];
    for (c, expected) in &paths {
        let got = josephus_path(&expected[0], 6 - c).map_err(|e| e.to_string())?;
        ensure(&got == expected, || format!("c={c}: got {got:?}"))?;
    }
    // Target positions 5, 3, 1 for n = 6, 5, 4, against direct simulation.
    for (n, target) in [(6usize, 5usize), (5, 3), (4, 1)] {
        let predicted = hidden_position_after_rotate7(n).map_err(|e| e.to_string())?;
        let seq: Vec<u32> = (1..=n as u32).collect();
        let mut rotated = seq.clone();
        for _ in 0..7 {
            rotated = apply_rotate(&rotated, 1).map_err(|e| e.to_string())?;
        }
        let simulated = rotated.iter().position(|&v| v == n as u32).unwrap() + 1;
        ensure(predicted == target && simulated == target, || {
            format!("n={n}: predicted {predicted}, simulated {simulated}, expected {target}")
        })?;
        let survivor = josephus_path(&seq, n - 1).map_err(|e| e.to_string())?;
        ensure(survivor.last() == Some(&vec![target as u32]), || {
            format!("n={n}: survivor {:?}", survivor.last())
        })?;
    }
    Ok("3 paths and 3 rotate-7 positions exact".into())
}

fn c3_esm_identity() -> Check {
    let started = Instant::now();
    let cfg = NumberGameConfig::new(10, 200, DecodeConfig::default()).map_err(|e| e.to_string())?;
    let perfect = make_perfect_lsp_number_agent(10, 2024).map_err(|e| e.to_string())?;
    let table = estimate_yes_rates(&perfect, &cfg, 42).map_err(|e| e.to_string())?;
    let esm = compute_esm(&table).map_err(|e| e.to_string())?;
    let bound = 3.0 * (0.9f64 / 200.0).sqrt();
    ensure((esm - 1.0).abs() <= bound, || format!("perfect ESM {esm}, bound {bound}"))?;
    let zero = estimate_yes_rates(&make_always_no_agent(), &cfg, 42).map_err(|e| e.to_string())?;
    let zero_esm = compute_esm(&zero).map_err(|e| e.to_string())?;
    ensure(zero_esm == 0.0, || format!("always-no ESM {zero_esm}"))?;
    within(started.elapsed(), 10)?;
    Ok(format!("perfect ESM {esm:.3} (|ESM-1| <= {bound:.3}), always-no ESM 0"))
}

fn c4_esm_arithmetic() -> Check {
    let rows: [(&str, [f64; 10], f64); 7] = [
        ("T1.0P1.0", [0.0, 0.0, 0.04, 0.055, 0.05, 0.2, 0.605, 0.125, 0.005, 0.005], 1.085),
        ("T0.7P1.0", [0.0, 0.005, 0.01, 0.09, 0.055, 0.225, 0.765, 0.09, 0.005, 0.0], 1.245),
        ("T0.4P1.0", [0.0, 0.0, 0.0, 0.025, 0.005, 0.165, 0.86, 0.04, 0.0, 0.0], 1.095),
        ("T0.1P1.0", [0.0, 0.0, 0.0, 0.0, 0.0, 0.085, 0.895, 0.005, 0.0, 0.0], 0.985),
        ("T1.0P0.7", [0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.83, 0.02, 0.0, 0.0], 0.95),
        ("T1.0P0.4", [0.0, 0.0, 0.0, 0.0, 0.0, 0.03, 0.825, 0.0, 0.0, 0.0], 0.855),
        ("T1.0P0.1", [0.0, 0.0, 0.0, 0.0, 0.0, 0.02, 0.82, 0.0, 0.0, 0.0], 0.84),
    ];
    for (label, rates, printed) in rows {
        let esm = compute_esm(&YesRateTable::from_rates(&rates, 200)).map_err(|e| e.to_string())?;
        ensure((esm - printed).abs() <= 1e-9, || format!("{label}: {esm} vs {printed}"))?;
    }
    Ok("7 decoding rows reproduce their ESM to 1e-9".into())
}

fn c5_soundness() -> Check {
    let started = Instant::now();
    let catalog = Arc::new(load_catalog());
    let agent = make_perfect_lsp_object_agent(catalog.clone(), 11).map_err(|e| e.to_string())?;
    let oracle = PerfectLspObjectAgent::new(catalog.clone(), 11).map_err(|e| e.to_string())?;
    let mut outcomes = Vec::new();
    for t in 0..200u64 {
        let trial_seed = seed::trial_seed(5, "yesno", t);
        let trial = run_yesno_trial(&agent, &catalog, &format!("t{t}"), trial_seed, 250, Ablation::None)
            .map_err(|e| e.to_string())?;
        let committed = oracle.committed(trial_seed);
        let mut s = FeasibleSet::full(&catalog);
        for c in &trial.outcome.constraints {
            s = update_feasible_set(s, c, &catalog).map_err(|e| e.to_string())?;
            ensure(s.contains(committed), || {
                format!("trial {t}: committed object left the feasible set at step {}", c.step)
            })?;
        }
        outcomes.push(trial.outcome);
    }
    let m = compute_msc_pr(&outcomes, 250).map_err(|e| e.to_string())?;
    ensure(m.pass_rate == 100.0 && m.contradictions == 0, || {
        format!("PR {} with {} contradictions", m.pass_rate, m.contradictions)
    })?;
    within(started.elapsed(), 30)?;
    Ok(format!("PR 100% over 200x250 steps, membership held at every step ({:.1}s)", started.elapsed().as_secs_f64()))
}

fn check_oracle(catalog: &lsp_probe::yesno::ObjectCatalog, outcome: &TrialOutcome) -> Result<(), String> {
    let mut s = FeasibleSet::full(catalog);
    for (t, c) in outcome.constraints.iter().enumerate() {
        s = update_feasible_set(s, c, catalog).map_err(|e| e.to_string())?;
        let incremental: BTreeSet<_> = s.members().collect();
        let scratch = common::oracle_feasible(catalog, &outcome.constraints[..=t]);
        ensure(incremental == scratch, || format!("step {}: sets differ", t + 1))?;
    }
    Ok(())
}

fn c6_completeness() -> Check {
    let catalog = load_catalog();
    let q = |attr, name: &str, dir| Query::new(&catalog, attr, name, dir).map_err(|e| e.to_string());
    let script = vec![
        q(Attribute::Volume, "Great Pyramid of Giza", Direction::Greater)?,
        q(Attribute::Length, "Mount Everest", Direction::Greater)?,
        q(Attribute::Density, "Gold", Direction::Greater)?,
        q(Attribute::Hardness, "Diamond ring", Direction::Greater)?,
        q(Attribute::Weight, "Elephant", Direction::Greater)?,
        q(Attribute::Weight, "Cat", Direction::Less)?,
    ];
    let yes = make_random_answer_agent(1.0, 0).map_err(|e| e.to_string())?;
    let trial = run_yesno_trial_with(
        &yes,
        &catalog,
        "scripted",
        0,
        250,
        Ablation::None,
        &mut ScriptedQueries::new(script),
    )
    .map_err(|e| e.to_string())?;
    let o = &trial.outcome;
    ensure(
        o.status == TrialStatus::Contradiction
            && o.contradiction_step == Some(6)
            && o.first_emptied_attribute == Some(Attribute::Weight),
        || format!("scripted trial ended {:?} at {:?}", o.status, o.contradiction_step),
    )?;
    let before_cat = common::oracle_feasible(&catalog, &o.constraints[..5]);
    let train: BTreeSet<_> = [catalog.id_of("Train").map_err(|e| e.to_string())?].into();
    ensure(before_cat == train, || format!("after step 5: {before_cat:?}"))?;
    check_oracle(&catalog, o)?;

    let random = make_random_answer_agent(0.5, 99).map_err(|e| e.to_string())?;
    let perfect =
        make_perfect_lsp_object_agent(Arc::new(load_catalog()), 3).map_err(|e| e.to_string())?;
    let mut random_outcomes = Vec::new();
    for t in 0..200u64 {
        let trial_seed = seed::trial_seed(6, "yesno", t);
        for (agent, sink) in [(&random, true), (&perfect, false)] {
            let trial = run_yesno_trial(agent, &catalog, &format!("t{t}"), trial_seed, 250, Ablation::None)
                .map_err(|e| e.to_string())?;
            check_oracle(&catalog, &trial.outcome).map_err(|e| format!("trial {t}: {e}"))?;
            if sink {
                random_outcomes.push(trial.outcome);
            }
        }
    }
    let m = compute_msc_pr(&random_outcomes, 250).map_err(|e| e.to_string())?;
    ensure(m.pass_rate <= 5.0, || format!("random agent PR {}", m.pass_rate))?;
    Ok(format!(
        "contradiction at step 6; oracle agreed on 400 trials; random PR {}%",
        m.pass_rate
    ))
}

fn outcome(status: TrialStatus, step: Option<u32>) -> TrialOutcome {
    TrialOutcome {
        status,
        steps_completed: step.unwrap_or(250),
        contradiction_step: step,
        first_emptied_attribute: step.map(|_| Attribute::Weight),
        constraints: Vec::new(),
    }
}

fn c7_metric_arithmetic() -> Check {
    let mut outcomes: Vec<_> = (0..27).map(|_| outcome(TrialStatus::Pass, None)).collect();
    outcomes.extend((0..173).map(|i| outcome(TrialStatus::Contradiction, Some(1 + i % 200))));
    let m = compute_msc_pr(&outcomes, 250).map_err(|e| e.to_string())?;
    ensure(m.pass_rate == 13.5, || format!("PR {}", m.pass_rate))?;

    let mo = |f: i64, a: i64| MentalismOutcome::from_response(&format!("{f} and {a}"), 10);
    let none = compute_isr(&vec![mo(3, 4); 150]).map_err(|e| e.to_string())?;
    let all = compute_isr(&vec![mo(5, 5); 150]).map_err(|e| e.to_string())?;
    ensure(none.isr == 0.0 && all.isr == 1.0, || format!("ISR {} / {}", none.isr, all.isr))?;

    let blue = compute_isr(&[mo(7, 7), mo(7, 7), mo(3, 3)]).map_err(|e| e.to_string())?;
    let share = blue.blue_seven_share.unwrap_or(f64::NAN);
    ensure((share - 0.667).abs() <= 0.001, || format!("blue-seven share {share}"))?;
    Ok(format!("PR 13.5, ISR 0.0 and 1.0, blue-seven {share:.3}"))
}

fn c8_standard_error() -> Check {
    let se = bernoulli_se(0.5, 200).map_err(|e| e.to_string())?;
    ensure((se - 0.035355).abs() <= 1e-6, || format!("se {se}"))?;
    let mut rng = seed::rng(0x5eed);
    let est = RunningEstimate::from_outcomes((0..200).map(|_| rng.gen_bool(0.3)));
    let r = convergence_check(&est, 50, None).map_err(|e| e.to_string())?;
    ensure(r.converged, || format!("spread {} > tolerance {}", r.spread, r.tolerance))?;
    Ok(format!(
        "se {se:.6}; Bernoulli(0.3) mean {:.3}, spread {:.4} <= {:.4}",
        r.final_mean, r.spread, r.tolerance
    ))
}

fn run_cfg(game: Game, dir: &Path) -> Result<RunConfig, String> {
    PartialConfig {
        game: Some(game),
        agent: Some(if game == Game::Yesno { "random-answer" } else { "perfect-lsp" }.into()),
        seed: Some(42),
        trials: Some(if game == Game::Number { 20 } else { 60 }),
        out_dir: Some(dir.to_path_buf()),
        p_yes: Some(0.3),
        ..Default::default()
    }
    .resolve()
    .map_err(|e| e.to_string())
}

fn c9_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for game in [Game::Number, Game::Yesno, Game::Mentalism] {
        let whole = tmp.path().join(format!("{game}-whole"));
        let split = tmp.path().join(format!("{game}-split"));
        execute(&run_cfg(game, &whole)?, ExecOptions::default()).map_err(|e| e.to_string())?;
        let cfg = run_cfg(game, &split)?;
        let first = execute(&cfg, ExecOptions { resume: false, max_new_trials: Some(37) })
            .map_err(|e| e.to_string())?;
        ensure(!first.complete() && first.executed == 37, || format!("{game}: interruption did not stop the run"))?;
        let second = execute(&cfg, ExecOptions { resume: true, max_new_trials: None })
            .map_err(|e| e.to_string())?;
        ensure(second.executed == first.planned - 37, || {
            format!("{game}: resume executed {} trials", second.executed)
        })?;
        for file in ["summary.json", "transcripts.jsonl"] {
            let a = std::fs::read(whole.join(file)).map_err(|e| e.to_string())?;
            let b = std::fs::read(split.join(file)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{game}: {file} differs after resume"))?;
        }
    }
    let cases = common::golden_cases();
    for (name, actual) in &cases {
        common::check_golden(name, actual)?;
    }
    Ok(format!("3 games resume byte-identically; {} golden files match", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("exhaustive mentalism invariance", c1_exhaustive_invariance),
        ("survival paths and rotate-7 positions", c2_survival_paths),
        ("ESM identity on simulated agents", c3_esm_identity),
        ("ESM arithmetic on reference decoding rows", c4_esm_arithmetic),
        ("yes/no soundness for the perfect agent", c5_soundness),
        ("yes/no completeness and oracle equivalence", c6_completeness),
        ("PR, ISR and blue-seven arithmetic", c7_metric_arithmetic),
        ("Bernoulli standard error and convergence", c8_standard_error),
        ("harness determinism and golden templates", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
