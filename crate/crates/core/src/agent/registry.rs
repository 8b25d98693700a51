use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::simulated::GapPolicy;
use super::{
    AgentHandle, AgentKind, AlwaysNoAgent, BiasedSevenAgent, PerfectLspMentalismAgent,
    PerfectLspNumberAgent, PerfectLspObjectAgent, RandomAnswerAgent, RemoteAgent,
};
use crate::error::{Error, Result};
use crate::gateway::EndpointConfig;
use crate::transcript::DecodeConfig;
use crate::yesno::load_catalog;

/// Union of the parameters any registered agent accepts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_seven: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_yes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number_range: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_policy: Option<GapPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointConfig>,
}

pub type AgentBuilder = fn(&AgentParams, DecodeConfig) -> Result<AgentHandle>;

struct Entry {
    kind: AgentKind,
    description: &'static str,
    build: AgentBuilder,
}

/// Agents selectable by name at runtime.
pub struct AgentRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl Default for AgentRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl AgentRegistry {
    pub fn empty() -> Self {
        AgentRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(
            "remote",
            AgentKind::Remote,
            "model behind an OpenAI-compatible chat-completions endpoint",
            build_remote,
        );
        r.register(
            "perfect-lsp-number",
            AgentKind::PerfectLspNumber,
            "commits to one integer and answers truthfully",
            |p, d| {
                Ok(AgentHandle::new(
                    PerfectLspNumberAgent::new(p.n.unwrap_or(10), p.seed.unwrap_or(0))?,
                    d,
                ))
            },
        );
        r.register(
            "perfect-lsp-object",
            AgentKind::PerfectLspObject,
            "commits to one catalog object and answers truthfully",
            |p, d| {
                Ok(AgentHandle::new(
                    PerfectLspObjectAgent::new(Arc::new(load_catalog()), p.seed.unwrap_or(0))?,
                    d,
                ))
            },
        );
        r.register(
            "perfect-lsp-mentalism",
            AgentKind::PerfectLspMentalism,
            "tracks the routine state exactly",
            |p, d| {
                Ok(AgentHandle::new(
                    PerfectLspMentalismAgent::new(
                        p.number_range.unwrap_or(10),
                        p.seed.unwrap_or(0),
                        p.gap_policy.unwrap_or_default(),
                    )?,
                    d,
                ))
            },
        );
        r.register(
            "always-no",
            AgentKind::AlwaysNo,
            "answers No to everything",
            |_, d| Ok(AgentHandle::new(AlwaysNoAgent, d)),
        );
        r.register(
            "biased-seven",
            AgentKind::BiasedSeven,
            "stateless, favors 7",
            |p, d| {
                Ok(AgentHandle::new(
                    BiasedSevenAgent::new(p.n.unwrap_or(10), p.p_seven.unwrap_or(0.6))?,
                    d,
                ))
            },
        );
        r.register(
            "random-answer",
            AgentKind::RandomAnswer,
            "independent coin flip per turn",
            |p, d| {
                Ok(AgentHandle::new(
                    RandomAnswerAgent::new(p.p_yes.unwrap_or(0.5), p.seed.unwrap_or(0))?,
                    d,
                ))
            },
        );
        r
    }

    pub fn register(
        &mut self,
        name: &'static str,
        kind: AgentKind,
        description: &'static str,
        build: AgentBuilder,
    ) {
        self.entries.insert(
            name,
            Entry {
                kind,
                description,
                build,
            },
        );
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn describe(&self) -> Vec<(&'static str, AgentKind, &'static str)> {
        self.entries
            .iter()
            .map(|(name, e)| (*name, e.kind, e.description))
            .collect()
    }

    pub fn kind_of(&self, name: &str) -> Option<AgentKind> {
        self.entries.get(name).map(|e| e.kind)
    }

    pub fn build(&self, name: &str, params: &AgentParams, decode: DecodeConfig) -> Result<AgentHandle> {
        decode.validate()?;
        let entry = self.entries.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::Config(format!(
                "unknown agent `{name}` (known: {})",
                known.join(", ")
            ))
        })?;
        (entry.build)(params, decode)
    }
}

fn build_remote(params: &AgentParams, decode: DecodeConfig) -> Result<AgentHandle> {
    let endpoint = params
        .endpoint
        .clone()
        .ok_or_else(|| Error::Config("remote agent requires `agent.endpoint`".into()))?;
    Ok(AgentHandle::new(RemoteAgent::new(endpoint)?, decode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_simulated_agent_builds_with_defaults() {
        let r = AgentRegistry::with_defaults();
        for (name, kind, _) in r.describe() {
            let built = r.build(name, &AgentParams::default(), DecodeConfig::default());
            if kind == AgentKind::Remote {
                assert!(matches!(built, Err(Error::Config(_))));
            } else {
                assert_eq!(built.unwrap().kind(), kind);
            }
        }
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let r = AgentRegistry::with_defaults();
        let err = r
            .build("oracle", &AgentParams::default(), DecodeConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("always-no"));
    }

    #[test]
    fn parameters_are_validated() {
        let r = AgentRegistry::with_defaults();
        let params = AgentParams {
            n: Some(1),
            ..Default::default()
        };
        assert!(r.build("perfect-lsp-number", &params, DecodeConfig::default()).is_err());
        let params = AgentParams {
            p_yes: Some(2.0),
            ..Default::default()
        };
        assert!(r.build("random-answer", &params, DecodeConfig::default()).is_err());
    }

    #[test]
    fn custom_registration() {
        let mut r = AgentRegistry::empty();
        r.register("mute", AgentKind::AlwaysNo, "test", |_, d| {
            Ok(AgentHandle::new(AlwaysNoAgent, d))
        });
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["mute"]);
        assert_eq!(r.kind_of("mute"), Some(AgentKind::AlwaysNo));
    }
}
