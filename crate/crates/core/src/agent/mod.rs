//! Agents answer a transcript's pending user turn.
//!
//! Every agent sits behind the [`Agent`] trait and is built by name through
//! [`AgentRegistry`]. Simulated agents are pure functions of their
//! parameters, the transcript's trial seed and the transcript itself, so any
//! trial can be replayed byte-for-byte.

mod registry;
mod remote;
mod simulated;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use registry::{AgentBuilder, AgentParams, AgentRegistry};
pub use remote::RemoteAgent;
pub use simulated::{
    AlwaysNoAgent, BiasedSevenAgent, GapPolicy, PerfectLspMentalismAgent, PerfectLspNumberAgent,
    PerfectLspObjectAgent, RandomAnswerAgent,
};

use crate::error::Result;
use crate::gateway::EndpointConfig;
use crate::transcript::{DecodeConfig, Transcript};
use crate::yesno::ObjectCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Remote,
    PerfectLspNumber,
    PerfectLspObject,
    PerfectLspMentalism,
    AlwaysNo,
    BiasedSeven,
    RandomAnswer,
}

impl AgentKind {
    pub fn is_simulated(self) -> bool {
        self != AgentKind::Remote
    }
}

pub trait Agent: Send + Sync + fmt::Debug {
    fn kind(&self) -> AgentKind;

    /// The next assistant message for a transcript ending in a user turn.
    fn respond(&self, transcript: &Transcript, decode: &DecodeConfig) -> Result<String>;

    /// Upper bound on concurrent trials, if the agent imposes one.
    fn max_concurrency(&self) -> Option<usize> {
        None
    }
}

/// Immutable, cheaply cloned agent descriptor plus its decode settings.
#[derive(Debug, Clone)]
pub struct AgentHandle {
    agent: Arc<dyn Agent>,
    decode: DecodeConfig,
}

impl AgentHandle {
    pub fn new(agent: impl Agent + 'static, decode: DecodeConfig) -> Self {
        AgentHandle {
            agent: Arc::new(agent),
            decode,
        }
    }

    pub fn from_arc(agent: Arc<dyn Agent>, decode: DecodeConfig) -> Self {
        AgentHandle { agent, decode }
    }

    pub fn kind(&self) -> AgentKind {
        self.agent.kind()
    }

    pub fn decode(&self) -> DecodeConfig {
        self.decode
    }

    pub fn with_decode(&self, decode: DecodeConfig) -> Self {
        AgentHandle {
            agent: Arc::clone(&self.agent),
            decode,
        }
    }

    pub fn max_concurrency(&self) -> Option<usize> {
        self.agent.max_concurrency()
    }

    pub fn respond(&self, transcript: &Transcript) -> Result<String> {
        transcript.pending_user()?;
        self.agent.respond(transcript, &self.decode)
    }
}

pub fn make_always_no_agent() -> AgentHandle {
    AgentHandle::new(AlwaysNoAgent, DecodeConfig::default())
}

pub fn make_perfect_lsp_number_agent(n: u32, seed: u64) -> Result<AgentHandle> {
    Ok(AgentHandle::new(
        PerfectLspNumberAgent::new(n, seed)?,
        DecodeConfig::default(),
    ))
}

pub fn make_perfect_lsp_object_agent(catalog: Arc<ObjectCatalog>, seed: u64) -> Result<AgentHandle> {
    Ok(AgentHandle::new(
        PerfectLspObjectAgent::new(catalog, seed)?,
        DecodeConfig::default(),
    ))
}

pub fn make_biased_seven_agent(n: u32, p_seven: f64) -> Result<AgentHandle> {
    Ok(AgentHandle::new(
        BiasedSevenAgent::new(n, p_seven)?,
        DecodeConfig::default(),
    ))
}

pub fn make_random_answer_agent(p_yes: f64, seed: u64) -> Result<AgentHandle> {
    Ok(AgentHandle::new(
        RandomAnswerAgent::new(p_yes, seed)?,
        DecodeConfig::default(),
    ))
}

pub fn make_perfect_lsp_mentalism_agent(number_range: u32, seed: u64) -> Result<AgentHandle> {
    Ok(AgentHandle::new(
        PerfectLspMentalismAgent::new(number_range, seed, GapPolicy::Uniform)?,
        DecodeConfig::default(),
    ))
}

pub fn make_remote_agent(endpoint: EndpointConfig, decode: DecodeConfig) -> Result<AgentHandle> {
    decode.validate()?;
    Ok(AgentHandle::new(RemoteAgent::new(endpoint)?, decode))
}
