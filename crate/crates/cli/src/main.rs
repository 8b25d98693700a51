use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use lsp_probe::agent::GapPolicy;
use lsp_probe::harness::{
    default_n_values, execute, report_from_dir, ExecOptions, Game, PartialConfig, PartialEndpoint,
};
use lsp_probe::yesno::Ablation;
use lsp_probe::Error;

/// Latent state persistence probes for conversational agents.
#[derive(Parser, Debug)]
#[command(name = "lsp-probe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number guessing game: per-index yes-rates and ESM.
    Number {
        #[command(flatten)]
        common: CommonArgs,
        /// Upper end of the integer range.
        #[arg(long)]
        n: Option<u32>,
        /// Comma-separated list of ranges to sweep.
        #[arg(long, value_delimiter = ',', conflicts_with = "range_sweep")]
        n_values: Option<Vec<u32>>,
        /// Sweep the default list of ranges.
        #[arg(long)]
        range_sweep: bool,
        /// Sweep the seven-point temperature/top-p grid.
        #[arg(long)]
        decode_sweep: bool,
    },
    /// Comparative yes/no game: pass rate and steps to contradiction.
    Yesno {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        max_steps: Option<u32>,
        #[arg(long, value_enum)]
        ablation: Option<AblationArg>,
    },
    /// Mentalism routine: invariant success rate.
    Mentalism {
        #[command(flatten)]
        common: CommonArgs,
        /// Append a step-by-step cue to the final question.
        #[arg(long)]
        cot: bool,
        #[arg(long)]
        number_range: Option<u32>,
        /// Gap choice of the simulated routine agent.
        #[arg(long, value_enum)]
        gap_policy: Option<GapPolicyArg>,
    },
    /// Exhaustively check that the routine's survivor equals the set-aside number.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        number_range: Option<u32>,
    },
    /// Rebuild reports for a finished run from its transcripts.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML file with run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Registered agent name, or `perfect-lsp` for the game's reference agent.
    #[arg(long)]
    agent: Option<String>,
    /// Base URL of an OpenAI-compatible API.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long)]
    retry_limit: Option<u32>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    top_p: Option<f64>,
    /// Trials per query (number) or per run (yesno, mentalism).
    #[arg(long)]
    trials: Option<u32>,
    /// Seed of simulated agents; defaults to --seed.
    #[arg(long)]
    agent_seed: Option<u64>,
    #[arg(long)]
    p_seven: Option<f64>,
    #[arg(long)]
    p_yes: Option<f64>,
    /// Continue a run directory that already has records.
    #[arg(long)]
    resume: bool,
    /// Stop after this many new trials.
    #[arg(long)]
    max_new_trials: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AblationArg {
    None,
    Hint,
    All,
    HintAll,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::None => Ablation::None,
            AblationArg::Hint => Ablation::Hint,
            AblationArg::All => Ablation::All,
            AblationArg::HintAll => Ablation::HintAll,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GapPolicyArg {
    Uniform,
    FirstValid,
}

impl From<GapPolicyArg> for GapPolicy {
    fn from(g: GapPolicyArg) -> Self {
        match g {
            GapPolicyArg::Uniform => GapPolicy::Uniform,
            GapPolicyArg::FirstValid => GapPolicy::FirstValid,
        }
    }
}

impl CommonArgs {
    fn layer(&self, game: Game) -> PartialConfig {
        let endpoint = (self.endpoint.is_some()
            || self.model.is_some()
            || self.api_key_env.is_some()
            || self.max_in_flight.is_some()
            || self.retry_limit.is_some())
        .then(|| PartialEndpoint {
            base_url: self.endpoint.clone(),
            model_name: self.model.clone(),
            api_key_env: self.api_key_env.clone(),
            max_in_flight: self.max_in_flight,
            retry_limit: self.retry_limit,
            backoff_base_ms: None,
        });
        PartialConfig {
            game: Some(game),
            seed: self.seed,
            trials: self.trials,
            out_dir: self.out.clone(),
            agent: self.agent.clone(),
            temperature: self.temperature,
            top_p: self.top_p,
            agent_seed: self.agent_seed,
            p_seven: self.p_seven,
            p_yes: self.p_yes,
            endpoint,
            ..Default::default()
        }
    }

    fn options(&self) -> ExecOptions {
        ExecOptions {
            resume: self.resume,
            max_new_trials: self.max_new_trials,
        }
    }
}

fn load_file(path: Option<&Path>) -> Result<PartialConfig, Error> {
    path.map(PartialConfig::load)
        .transpose()
        .map(Option::unwrap_or_default)
}

enum Failure {
    Usage(Error),
    Run(Error),
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (file, flags, opts) = match cli.command {
        Command::Report { out } => {
            let summary = report_from_dir(&out).map_err(Failure::Run)?;
            println!("{summary}");
            return Ok(true);
        }
        Command::Verify {
            config,
            out,
            number_range,
        } => {
            let flags = PartialConfig {
                game: Some(Game::Verify),
                out_dir: out,
                number_range,
                ..Default::default()
            };
            (config, flags, ExecOptions::default())
        }
        Command::Number {
            common,
            n,
            n_values,
            range_sweep,
            decode_sweep,
        } => {
            let mut flags = common.layer(Game::Number);
            flags.n = n;
            flags.n_values = if range_sweep { Some(default_n_values()) } else { n_values };
            flags.decode_sweep = decode_sweep.then_some(true);
            (common.config.clone(), flags, common.options())
        }
        Command::Yesno {
            common,
            max_steps,
            ablation,
        } => {
            let mut flags = common.layer(Game::Yesno);
            flags.max_steps = max_steps;
            flags.ablation = ablation.map(Into::into);
            (common.config.clone(), flags, common.options())
        }
        Command::Mentalism {
            common,
            cot,
            number_range,
            gap_policy,
        } => {
            let mut flags = common.layer(Game::Mentalism);
            flags.cot = cot.then_some(true);
            flags.number_range = number_range;
            flags.gap_policy = gap_policy.map(Into::into);
            (common.config.clone(), flags, common.options())
        }
    };

    let cfg = load_file(file.as_deref())
        .and_then(|f| f.merge(flags).resolve())
        .map_err(Failure::Usage)?;
    let outcome = execute(&cfg, opts).map_err(|e| match e {
        Error::Config(_) => Failure::Usage(e),
        e => Failure::Run(e),
    })?;
    match &outcome.summary {
        Some(summary) => {
            println!("{}", summary["metrics"]);
            eprintln!("reports written to {}", cfg.out_dir.display());
        }
        None => eprintln!(
            "{}: {} of {} trials recorded; rerun with --resume to finish",
            cfg.out_dir.display(),
            outcome.skipped + outcome.executed,
            outcome.planned
        ),
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LSP_PROBE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("invariant violated; see verification.json");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
