use super::{Agent, AgentKind};
use crate::error::Result;
use crate::gateway::{EndpointConfig, Gateway};
use crate::transcript::{DecodeConfig, Transcript};

/// A model behind an OpenAI-compatible chat-completions endpoint.
#[derive(Debug)]
pub struct RemoteAgent {
    gateway: Gateway,
}

impl RemoteAgent {
    pub fn new(endpoint: EndpointConfig) -> Result<Self> {
        Ok(RemoteAgent {
            gateway: Gateway::new(endpoint)?,
        })
    }
}

impl Agent for RemoteAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Remote
    }

    fn respond(&self, transcript: &Transcript, decode: &DecodeConfig) -> Result<String> {
        Ok(self.gateway.chat_complete(transcript, decode)?.text)
    }

    fn max_concurrency(&self) -> Option<usize> {
        Some(self.gateway.config().max_in_flight)
    }
}
