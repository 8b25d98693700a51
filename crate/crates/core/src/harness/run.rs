use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use log::{info, warn};
use rayon::prelude::*;

use super::config::{Game, RunConfig};
use super::ledger::{RunLedger, TrialDetail, TrialLine};
use crate::agent::{AgentHandle, AgentRegistry};
use crate::error::{Error, Result};
use crate::mentalism::{run_mentalism_trial, verify_invariant_exhaustive, InsertionMode};
use crate::number::{build_number_trial, cell_id, number_trial_id};
use crate::report::{self, emit_reports, to_json_text, ReportBundle};
use crate::seed::trial_seed;
use crate::transcript::DecodeConfig;
use crate::yesno::{load_catalog, run_yesno_trial, ObjectCatalog};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// A trial the run still owes, identified before any agent is called.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedTrial {
    pub id: String,
    pub seed: u64,
    pub spec: TrialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialSpec {
    Number { n: u32, index: u32, trial: u32, decode: DecodeConfig },
    Yesno { trial: u32 },
    Mentalism { trial: u32 },
}

/// Shared, read-only state for trial workers.
pub struct TrialContext {
    pub cfg: RunConfig,
    pub agent: AgentHandle,
    pub catalog: Arc<ObjectCatalog>,
}

/// A trial-based game as the executor sees it.
pub trait GameRunner: Send + Sync {
    fn game(&self) -> Game;
    fn plan(&self, cfg: &RunConfig) -> Result<Vec<PlannedTrial>>;
    fn run(&self, ctx: &TrialContext, trial: &PlannedTrial) -> Result<TrialLine>;
    fn summarize(&self, cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle>;
}

struct NumberRunner;
struct YesNoRunner;
struct MentalismRunner;

impl GameRunner for NumberRunner {
    fn game(&self) -> Game {
        Game::Number
    }

    fn plan(&self, cfg: &RunConfig) -> Result<Vec<PlannedTrial>> {
        let decodes = if cfg.number.decode_sweep {
            DecodeConfig::default_grid()
        } else {
            vec![cfg.decode]
        };
        let mut out = Vec::new();
        for decode in decodes {
            for &n in &cfg.number.n_values {
                for index in 1..=n {
                    for trial in 0..cfg.trials {
                        out.push(PlannedTrial {
                            id: number_trial_id(n, index, trial, &decode),
                            seed: trial_seed(cfg.seed, &cell_id(n, index), trial as u64),
                            spec: TrialSpec::Number { n, index, trial, decode },
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    fn run(&self, ctx: &TrialContext, p: &PlannedTrial) -> Result<TrialLine> {
        let TrialSpec::Number { n, index, trial, decode } = p.spec else {
            return Err(Error::State(format!("{}: not a number trial", p.id)));
        };
        let mut transcript = build_number_trial(n, index)?;
        transcript.trial_id = p.id.clone();
        transcript.seed = p.seed;
        let reply = ctx.agent.with_decode(decode).respond(&transcript)?;
        let label = crate::gateway::classify_yes_no(&reply);
        transcript.push_assistant(reply);
        Ok(TrialLine {
            trial_id: p.id.clone(),
            detail: TrialDetail::Number { n, index, trial, decode, label },
            transcript,
        })
    }

    fn summarize(&self, cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
        report::number_report(cfg, lines)
    }
}

impl GameRunner for YesNoRunner {
    fn game(&self) -> Game {
        Game::Yesno
    }

    fn plan(&self, cfg: &RunConfig) -> Result<Vec<PlannedTrial>> {
        let ablation = serde_json::to_value(cfg.yesno.ablation)?;
        let ablation = ablation.as_str().unwrap_or("none").to_string();
        Ok((0..cfg.trials)
            .map(|trial| PlannedTrial {
                id: format!("yesno/{ablation}/t{trial}"),
                seed: trial_seed(cfg.seed, "yesno", trial as u64),
                spec: TrialSpec::Yesno { trial },
            })
            .collect())
    }

    fn run(&self, ctx: &TrialContext, p: &PlannedTrial) -> Result<TrialLine> {
        let TrialSpec::Yesno { trial } = p.spec else {
            return Err(Error::State(format!("{}: not a yes/no trial", p.id)));
        };
        let opts = ctx.cfg.yesno;
        let t = run_yesno_trial(&ctx.agent, &ctx.catalog, &p.id, p.seed, opts.max_steps, opts.ablation)?;
        Ok(TrialLine {
            trial_id: p.id.clone(),
            detail: TrialDetail::Yesno {
                trial,
                max_steps: opts.max_steps,
                ablation: opts.ablation,
                target: t.target,
                status: t.outcome.status,
                constraints: t.outcome.constraints,
            },
            transcript: t.transcript,
        })
    }

    fn summarize(&self, cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
        report::yesno_report(cfg, lines)
    }
}

impl GameRunner for MentalismRunner {
    fn game(&self) -> Game {
        Game::Mentalism
    }

    fn plan(&self, cfg: &RunConfig) -> Result<Vec<PlannedTrial>> {
        let style = if cfg.mentalism.cot { "cot" } else { "direct" };
        Ok((0..cfg.trials)
            .map(|trial| PlannedTrial {
                id: format!("mentalism/{style}/t{trial}"),
                seed: trial_seed(cfg.seed, "mentalism", trial as u64),
                spec: TrialSpec::Mentalism { trial },
            })
            .collect())
    }

    fn run(&self, ctx: &TrialContext, p: &PlannedTrial) -> Result<TrialLine> {
        let TrialSpec::Mentalism { trial } = p.spec else {
            return Err(Error::State(format!("{}: not a mentalism trial", p.id)));
        };
        let opts = ctx.cfg.mentalism;
        let t = run_mentalism_trial(&ctx.agent, &p.id, p.seed, opts.cot, opts.number_range)?;
        Ok(TrialLine {
            trial_id: p.id.clone(),
            detail: TrialDetail::Mentalism {
                trial,
                params: t.params,
                cot: t.cot,
                outcome: t.outcome,
            },
            transcript: t.transcript,
        })
    }

    fn summarize(&self, cfg: &RunConfig, lines: &[TrialLine]) -> Result<ReportBundle> {
        report::mentalism_report(cfg, lines)
    }
}

/// Trial-based games, selected by [`Game`].
pub struct GameRegistry {
    runners: BTreeMap<Game, Box<dyn GameRunner>>,
}

impl Default for GameRegistry {
    fn default() -> Self {
        let mut r = GameRegistry {
            runners: BTreeMap::new(),
        };
        r.register(Box::new(NumberRunner));
        r.register(Box::new(YesNoRunner));
        r.register(Box::new(MentalismRunner));
        r
    }
}

impl GameRegistry {
    pub fn register(&mut self, runner: Box<dyn GameRunner>) {
        self.runners.insert(runner.game(), runner);
    }

    pub fn get(&self, game: Game) -> Result<&dyn GameRunner> {
        self.runners
            .get(&game)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Config(format!("game: `{game}` is not a trial-based game")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecOptions {
    /// Continue a run whose directory already holds records.
    pub resume: bool,
    /// Stop after this many new trials, leaving the run incomplete.
    pub max_new_trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutcome {
    pub planned: usize,
    pub skipped: usize,
    pub executed: usize,
    /// Present once every planned trial is recorded.
    pub summary: Option<serde_json::Value>,
    /// For `verify`: whether the invariant held everywhere.
    pub passed: bool,
}

impl ExecOutcome {
    pub fn complete(&self) -> bool {
        self.summary.is_some()
    }
}

fn write_run_config(cfg: &RunConfig, resume: bool) -> Result<()> {
    let path = cfg.out_dir.join(RUN_CONFIG_FILE);
    if resume && path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut prev: RunConfig = serde_json::from_str(&text)?;
        prev.out_dir = cfg.out_dir.clone();
        if &prev != cfg {
            return Err(Error::Config(format!(
                "{} differs from the requested run; resume with the original settings",
                path.display()
            )));
        }
    }
    std::fs::write(&path, to_json_text(cfg)?).map_err(|e| Error::io(&path, e))
}

pub fn load_run_config(out_dir: &Path) -> Result<RunConfig> {
    let path = out_dir.join(RUN_CONFIG_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)?;
    cfg.out_dir = out_dir.to_path_buf();
    Ok(cfg)
}

/// Runs `cfg`, streaming each finished trial to the ledger. Records already
/// in the ledger are skipped. Reports are written once the plan is complete;
/// on error the records persisted so far stay on disk for a later resume.
pub fn execute(cfg: &RunConfig, opts: ExecOptions) -> Result<ExecOutcome> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if cfg.game == Game::Verify {
        return run_verify(cfg);
    }

    let mut ledger = RunLedger::open(out)?;
    if !ledger.is_empty() && !opts.resume {
        return Err(Error::Config(format!(
            "{} already holds {} trial records; pass --resume to continue",
            out.display(),
            ledger.len()
        )));
    }
    write_run_config(cfg, opts.resume)?;
    ledger.touch()?;

    let games = GameRegistry::default();
    let runner = games.get(cfg.game)?;
    let plan = runner.plan(cfg)?;
    let planned = plan.len();
    let mut pending: Vec<&PlannedTrial> = plan.iter().filter(|p| !ledger.contains(&p.id)).collect();
    let skipped = planned - pending.len();
    if let Some(cap) = opts.max_new_trials {
        pending.truncate(cap);
    }
    info!(
        "{}: {planned} planned, {skipped} already recorded, {} to run",
        cfg.game,
        pending.len()
    );

    let agent = AgentRegistry::with_defaults().build(&cfg.agent, &cfg.agent_params, cfg.decode)?;
    let workers = agent
        .max_concurrency()
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let ctx = TrialContext {
        cfg: cfg.clone(),
        agent,
        catalog: Arc::new(load_catalog()),
    };
    let ledger = Mutex::new(ledger);
    let abort = AtomicBool::new(false);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::State(format!("worker pool: {e}")))?;

    let result: Result<()> = pool.install(|| {
        pending.par_iter().try_for_each(|p| {
            if abort.load(Ordering::Relaxed) {
                return Ok(());
            }
            let line = runner.run(&ctx, p).inspect_err(|e| {
                abort.store(true, Ordering::Relaxed);
                warn!("{}: {e}", p.id);
            })?;
            ledger
                .lock()
                .map_err(|_| Error::State("ledger lock poisoned".into()))?
                .append(line)
        })
    });
    let mut ledger = ledger
        .into_inner()
        .map_err(|_| Error::State("ledger lock poisoned".into()))?;
    let executed = ledger.len() - skipped.min(ledger.len());
    result?;

    let complete = plan.iter().all(|p| ledger.contains(&p.id));
    let summary = if complete {
        let order: Vec<String> = plan.iter().map(|p| p.id.clone()).collect();
        ledger.rewrite_sorted(&order)?;
        Some(finish(runner, cfg, &ledger)?)
    } else {
        None
    };
    Ok(ExecOutcome {
        planned,
        skipped,
        executed,
        summary,
        passed: true,
    })
}

fn finish(runner: &dyn GameRunner, cfg: &RunConfig, ledger: &RunLedger) -> Result<serde_json::Value> {
    let bundle = runner.summarize(cfg, ledger.lines())?;
    emit_reports(&cfg.out_dir, &bundle)?;
    Ok(bundle.summary)
}

fn run_verify(cfg: &RunConfig) -> Result<ExecOutcome> {
    let report = verify_invariant_exhaustive(cfg.mentalism.number_range, &InsertionMode::ALL)?;
    let bundle = report::verify_report(cfg, &report)?;
    emit_reports(&cfg.out_dir, &bundle)?;
    Ok(ExecOutcome {
        planned: 0,
        skipped: 0,
        executed: 0,
        summary: Some(bundle.summary),
        passed: report.passed(),
    })
}

/// Rebuilds every report in `out_dir` from its records, without calling any
/// agent.
pub fn report_from_dir(out_dir: &Path) -> Result<serde_json::Value> {
    let cfg = load_run_config(out_dir)?;
    let games = GameRegistry::default();
    let runner = games.get(cfg.game)?;
    let plan = runner.plan(&cfg)?;
    let mut ledger = RunLedger::open(out_dir)?;
    let missing = plan.iter().filter(|p| !ledger.contains(&p.id)).count();
    if missing > 0 {
        return Err(Error::IncompleteData(format!(
            "{missing} of {} planned trials have no record; resume the run first",
            plan.len()
        )));
    }
    let order: Vec<String> = plan.iter().map(|p| p.id.clone()).collect();
    ledger.rewrite_sorted(&order)?;
    finish(runner, &cfg, &ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PartialConfig;

    fn cfg(game: Game, dir: &Path, trials: u32) -> RunConfig {
        PartialConfig {
            game: Some(game),
            agent: Some("perfect-lsp".into()),
            trials: Some(trials),
            out_dir: Some(dir.to_path_buf()),
            seed: Some(7),
            max_steps: Some(30),
            n: Some(4),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn plans_are_unique_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        for game in [Game::Number, Game::Yesno, Game::Mentalism] {
            let c = cfg(game, dir.path(), 5);
            let r = GameRegistry::default();
            let a = r.get(game).unwrap().plan(&c).unwrap();
            let b = r.get(game).unwrap().plan(&c).unwrap();
            assert_eq!(a, b);
            let ids: std::collections::BTreeSet<_> = a.iter().map(|p| &p.id).collect();
            assert_eq!(ids.len(), a.len());
        }
    }

    #[test]
    fn refuses_to_overwrite_without_resume() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(Game::Yesno, dir.path(), 4);
        execute(&c, ExecOptions::default()).unwrap();
        assert!(execute(&c, ExecOptions::default()).is_err());
        let again = execute(&c, ExecOptions { resume: true, max_new_trials: None }).unwrap();
        assert_eq!(again.executed, 0);
        assert!(again.complete());
    }

    #[test]
    fn resume_with_changed_settings_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(Game::Mentalism, dir.path(), 4);
        execute(&c, ExecOptions { resume: false, max_new_trials: Some(2) }).unwrap();
        let mut other = c.clone();
        other.seed = 8;
        assert!(execute(&other, ExecOptions { resume: true, max_new_trials: None }).is_err());
    }

    #[test]
    fn report_rebuilds_identical_summary() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(Game::Number, dir.path(), 3);
        let done = execute(&c, ExecOptions::default()).unwrap();
        let before = std::fs::read(dir.path().join("summary.json")).unwrap();
        let rebuilt = report_from_dir(dir.path()).unwrap();
        assert_eq!(Some(rebuilt), done.summary);
        assert_eq!(std::fs::read(dir.path().join("summary.json")).unwrap(), before);
    }
}
