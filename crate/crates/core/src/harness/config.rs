use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentKind, AgentParams, AgentRegistry, GapPolicy};
use crate::error::{Error, Result};
use crate::gateway::EndpointConfig;
use crate::mentalism::DEFAULT_NUMBER_RANGE;
use crate::number::DEFAULT_RANGE_SWEEP;
use crate::transcript::DecodeConfig;
use crate::yesno::Ablation;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MAX_STEPS: u32 = 250;
pub const DEFAULT_VERIFY_RANGE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Game {
    Number,
    Yesno,
    Mentalism,
    Verify,
}

impl Game {
    pub const ALL: [Game; 4] = [Game::Number, Game::Yesno, Game::Mentalism, Game::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Game::Number => "number",
            Game::Yesno => "yesno",
            Game::Mentalism => "mentalism",
            Game::Verify => "verify",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Game::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("game: unknown game `{s}`")))
    }

    pub fn default_trials(self) -> u32 {
        match self {
            Game::Mentalism => 150,
            _ => 200,
        }
    }

    /// Concrete agent behind the `perfect-lsp` shorthand.
    pub fn perfect_agent(self) -> Option<&'static str> {
        match self {
            Game::Number => Some("perfect-lsp-number"),
            Game::Yesno => Some("perfect-lsp-object"),
            Game::Mentalism => Some("perfect-lsp-mentalism"),
            Game::Verify => None,
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumberOptions {
    pub n: u32,
    /// Ranges to sweep; a single-element list for a plain run.
    pub n_values: Vec<u32>,
    pub decode_sweep: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YesNoOptions {
    pub max_steps: u32,
    pub ablation: Ablation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MentalismOptions {
    pub cot: bool,
    pub number_range: u32,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: Game,
    pub seed: u64,
    pub trials: u32,
    pub out_dir: PathBuf,
    /// Registered agent name; empty for `verify`.
    pub agent: String,
    pub agent_params: AgentParams,
    pub decode: DecodeConfig,
    pub number: NumberOptions,
    pub yesno: YesNoOptions,
    pub mentalism: MentalismOptions,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let key_err = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if self.trials == 0 {
            return key_err("trials", "must be at least 1".into());
        }
        if self.out_dir.as_os_str().is_empty() {
            return key_err("out_dir", "must not be empty".into());
        }
        if !(0.0..=1.0).contains(&self.decode.temperature) {
            return key_err("temperature", format!("{} outside [0, 1]", self.decode.temperature));
        }
        if !(self.decode.top_p > 0.0 && self.decode.top_p <= 1.0) {
            return key_err("top_p", format!("{} outside (0, 1]", self.decode.top_p));
        }
        if self.number.n < 2 {
            return key_err("n", format!("{} is below 2", self.number.n));
        }
        if self.number.n_values.is_empty() {
            return key_err("n_values", "must not be empty".into());
        }
        if let Some(bad) = self.number.n_values.iter().find(|&&n| n < 2) {
            return key_err("n_values", format!("{bad} is below 2"));
        }
        if self.yesno.max_steps == 0 {
            return key_err("max_steps", "must be at least 1".into());
        }
        if self.mentalism.number_range == 0 {
            return key_err("number_range", "must be at least 1".into());
        }
        let p = &self.agent_params;
        for (key, v) in [("p_seven", p.p_seven), ("p_yes", p.p_yes)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return key_err(key, format!("{v} outside [0, 1]"));
                }
            }
        }
        if let Some(ep) = &p.endpoint {
            ep.validate()
                .map_err(|e| Error::Config(format!("endpoint: {e}")))?;
        }
        if self.game == Game::Verify {
            return Ok(());
        }
        let registry = AgentRegistry::with_defaults();
        if self.agent.is_empty() {
            return key_err("agent", "missing; pass --agent".into());
        }
        let Some(kind) = registry.kind_of(&self.agent) else {
            let known: Vec<_> = registry.names().collect();
            return key_err(
                "agent",
                format!("unknown agent `{}` (known: perfect-lsp, {})", self.agent, known.join(", ")),
            );
        };
        if let Some(only) = dedicated_game(kind) {
            if only != self.game {
                return key_err(
                    "agent",
                    format!("`{}` only plays the {only} game", self.agent),
                );
            }
        }
        if self.agent == "remote" && p.endpoint.is_none() {
            return key_err("endpoint", "the remote agent needs --endpoint and --model".into());
        }
        if self.agent == "biased-seven" && p.n.unwrap_or(self.number.n) < 7 {
            return key_err("n", "biased-seven needs n >= 7".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Simulated agents that only understand one game's script.
fn dedicated_game(kind: AgentKind) -> Option<Game> {
    match kind {
        AgentKind::PerfectLspNumber | AgentKind::BiasedSeven => Some(Game::Number),
        AgentKind::PerfectLspObject => Some(Game::Yesno),
        AgentKind::PerfectLspMentalism => Some(Game::Mentalism),
        AgentKind::Remote | AgentKind::AlwaysNo | AgentKind::RandomAnswer => None,
    }
}

/// Endpoint fields as they may appear in a config file, all optional so
/// flags can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialEndpoint {
    pub base_url: Option<String>,
    pub model_name: Option<String>,
    pub api_key_env: Option<String>,
    pub max_in_flight: Option<usize>,
    pub retry_limit: Option<u32>,
    pub backoff_base_ms: Option<u64>,
}

impl PartialEndpoint {
    fn merge(&mut self, over: PartialEndpoint) {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(base_url, model_name, api_key_env, max_in_flight, retry_limit, backoff_base_ms);
    }

    fn resolve(self) -> Result<EndpointConfig> {
        let base_url = self
            .base_url
            .ok_or_else(|| Error::Config("endpoint: missing base_url (--endpoint)".into()))?;
        let model_name = self
            .model_name
            .ok_or_else(|| Error::Config("model: missing model name (--model)".into()))?;
        let mut ep = EndpointConfig::new(base_url, model_name);
        if let Some(v) = self.api_key_env {
            ep.api_key_env = v;
        }
        if let Some(v) = self.max_in_flight {
            ep.max_in_flight = v;
        }
        if let Some(v) = self.retry_limit {
            ep.retry_limit = v;
        }
        if let Some(v) = self.backoff_base_ms {
            ep.backoff_base_ms = v;
        }
        Ok(ep)
    }
}

/// One configuration layer: a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub game: Option<Game>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub agent: Option<String>,
    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    pub n: Option<u32>,
    pub n_values: Option<Vec<u32>>,
    pub decode_sweep: Option<bool>,
    pub max_steps: Option<u32>,
    pub ablation: Option<Ablation>,
    pub cot: Option<bool>,
    pub number_range: Option<u32>,
    pub agent_seed: Option<u64>,
    pub p_seven: Option<f64>,
    pub p_yes: Option<f64>,
    pub gap_policy: Option<GapPolicy>,
    pub endpoint: Option<PartialEndpoint>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Values set in `over` replace values in `self`.
    pub fn merge(mut self, over: PartialConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(
            game, seed, trials, out_dir, agent, temperature, top_p, n, n_values, decode_sweep,
            max_steps, ablation, cot, number_range, agent_seed, p_seven, p_yes, gap_policy
        );
        match (&mut self.endpoint, over.endpoint) {
            (Some(base), Some(over)) => base.merge(over),
            (slot @ None, over) => *slot = over,
            (Some(_), None) => {}
        }
        self
    }

    /// Fills defaults, resolves the agent alias and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let game = self
            .game
            .ok_or_else(|| Error::Config("game: missing".into()))?;
        let n = self.n.unwrap_or(10);
        let n_values = match (self.n_values, self.n) {
            (Some(v), _) => v,
            (None, _) => vec![n],
        };
        let number_range = self.number_range.unwrap_or(match game {
            Game::Verify => DEFAULT_VERIFY_RANGE,
            _ => DEFAULT_NUMBER_RANGE,
        });
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let mut agent = self.agent.unwrap_or_default();
        if agent == "perfect-lsp" {
            agent = game
                .perfect_agent()
                .ok_or_else(|| Error::Config("agent: `perfect-lsp` has no meaning here".into()))?
                .to_string();
        }
        let endpoint = self.endpoint.map(PartialEndpoint::resolve).transpose()?;
        let agent_params = AgentParams {
            seed: Some(self.agent_seed.unwrap_or(seed)),
            n: Some(n),
            p_seven: self.p_seven,
            p_yes: self.p_yes,
            number_range: Some(number_range),
            gap_policy: self.gap_policy,
            endpoint,
        };
        let cfg = RunConfig {
            game,
            seed,
            trials: self.trials.unwrap_or(game.default_trials()),
            out_dir: self
                .out_dir
                .unwrap_or_else(|| PathBuf::from(format!("runs/{game}"))),
            agent,
            agent_params,
            decode: DecodeConfig {
                temperature: self.temperature.unwrap_or(1.0),
                top_p: self.top_p.unwrap_or(1.0),
            },
            number: NumberOptions {
                n,
                n_values,
                decode_sweep: self.decode_sweep.unwrap_or(false),
            },
            yesno: YesNoOptions {
                max_steps: self.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
                ablation: self.ablation.unwrap_or_default(),
            },
            mentalism: MentalismOptions {
                cot: self.cot.unwrap_or(false),
                number_range,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Default sweep over ranges when `--n-values` is given without values.
pub fn default_n_values() -> Vec<u32> {
    DEFAULT_RANGE_SWEEP.to_vec()
}
