//! Run orchestration: configuration layering, the append-only trial ledger,
//! resumable execution and report regeneration.

mod config;
mod ledger;
mod run;

pub use config::{
    default_n_values, Game, MentalismOptions, NumberOptions, PartialConfig, PartialEndpoint,
    RunConfig, YesNoOptions, DEFAULT_MAX_STEPS, DEFAULT_SEED, DEFAULT_VERIFY_RANGE,
};
pub use ledger::{RunLedger, TrialDetail, TrialLine, TRANSCRIPTS_FILE};
pub use run::{
    execute, load_run_config, report_from_dir, ExecOptions, ExecOutcome, GameRegistry, GameRunner,
    PlannedTrial, TrialContext, TrialSpec, RUN_CONFIG_FILE,
};
