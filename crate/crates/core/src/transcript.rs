use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Message {
            role,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }
}

/// One trial's conversation, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub trial_id: String,
    pub seed: u64,
    pub messages: Vec<Message>,
}

impl Transcript {
    pub fn new(trial_id: impl Into<String>, seed: u64) -> Self {
        Transcript {
            trial_id: trial_id.into(),
            seed,
            messages: Vec::new(),
        }
    }

    pub fn push(&mut self, message: Message) {
        self.messages.push(message);
    }

    pub fn push_user(&mut self, content: impl Into<String>) {
        self.push(Message::user(content));
    }

    pub fn push_assistant(&mut self, content: impl Into<String>) {
        self.push(Message::assistant(content));
    }

    pub fn last(&self) -> Option<&Message> {
        self.messages.last()
    }

    /// Content of the final message if it is a user turn.
    pub fn pending_user(&self) -> Result<&str> {
        match self.messages.last() {
            Some(m) if m.role == Role::User => Ok(&m.content),
            _ => Err(Error::Protocol(format!(
                "trial {}: transcript must end with a user message",
                self.trial_id
            ))),
        }
    }

    /// Messages after any leading system messages.
    pub fn body(&self) -> &[Message] {
        let start = self
            .messages
            .iter()
            .position(|m| m.role != Role::System)
            .unwrap_or(self.messages.len());
        &self.messages[start..]
    }

    pub fn user_turns(&self) -> impl Iterator<Item = &str> {
        self.messages
            .iter()
            .filter(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }

    /// Checks non-empty content and strict user/assistant alternation in the body.
    pub fn validate(&self) -> Result<()> {
        for (idx, m) in self.messages.iter().enumerate() {
            if m.content.is_empty() {
                return Err(Error::Protocol(format!("message {idx} has empty content")));
            }
        }
        for (idx, m) in self.body().iter().enumerate() {
            let expected = if idx % 2 == 0 { Role::User } else { Role::Assistant };
            if m.role != expected {
                return Err(Error::Protocol(format!(
                    "trial {}: body message {idx} has role {:?}, expected {:?}",
                    self.trial_id, m.role, expected
                )));
            }
        }
        Ok(())
    }
}

/// Sampling settings forwarded to remote models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            temperature: 1.0,
            top_p: 1.0,
        }
    }
}

impl DecodeConfig {
    pub fn new(temperature: f64, top_p: f64) -> Result<Self> {
        let cfg = DecodeConfig { temperature, top_p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(Error::domain(format!(
                "temperature {} outside [0, 1]",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::domain(format!("top_p {} outside (0, 1]", self.top_p)));
        }
        Ok(())
    }

    /// Label in the `T1.0P1.0` style.
    pub fn label(&self) -> String {
        format!("T{:.1}P{:.1}", self.temperature, self.top_p)
    }

    /// The seven temperature/top-p rows of the decoding sweep.
    pub fn default_grid() -> Vec<DecodeConfig> {
        let rows = [
            (1.0, 1.0),
            (0.7, 1.0),
            (0.4, 1.0),
            (0.1, 1.0),
            (1.0, 0.7),
            (1.0, 0.4),
            (1.0, 0.1),
        ];
        rows.iter()
            .map(|&(temperature, top_p)| DecodeConfig { temperature, top_p })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerLabel {
    Yes,
    No,
    Unparseable,
}

impl fmt::Display for AnswerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerLabel::Yes => "Yes",
            AnswerLabel::No => "No",
            AnswerLabel::Unparseable => "Unparseable",
        })
    }
}
