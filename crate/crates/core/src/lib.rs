//! Probes for latent state persistence in conversational agents.
//!
//! Three games exercise an agent's ability to hold a private variable across
//! dialogue turns:
//!
//! - [`number`]: the number guessing game and its Empirical State Mass (ESM).
//! - [`yesno`]: the comparative yes/no game with feasible-set contradiction detection.
//! - [`mentalism`]: a Josephus-style routine whose survivor always equals the
//!   element set aside mid-routine.
//!
//! Agents are pluggable through [`agent::Agent`]; simulated reference agents
//! with analytically known behavior live next to the remote chat-completions
//! agent in [`agent::AgentRegistry`].

pub mod agent;
pub mod error;
pub mod gateway;
pub mod harness;
pub mod mentalism;
pub mod number;
pub mod report;
pub mod seed;
pub mod stats;
pub mod transcript;
pub mod yesno;

pub use error::{Error, Result};
pub use transcript::{AnswerLabel, DecodeConfig, Message, Role, Transcript};
