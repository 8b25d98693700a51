//! Reference agents with analytically known behavior.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentKind};
use crate::error::{Error, Result};
use crate::mentalism::{
    apply_duplicate, apply_josephus_eliminate, apply_middle_insert, apply_remove_head,
    apply_rotate, apply_set_aside, interior_gap_count, parse_instruction, Instruction,
    RoutineState,
};
use crate::number::{number_ack, parse_number_instruction, parse_number_query};
use crate::seed;
use crate::transcript::{DecodeConfig, Transcript};
use crate::yesno::{parse_query, Direction, ObjectCatalog, ObjectId, OBJECT_ACK, OBJECT_INSTRUCTION};

const YES: &str = "Yes";
const NO: &str = "No";

fn yes_no(yes: bool) -> String {
    if yes { YES } else { NO }.to_string()
}

fn protocol(transcript: &Transcript, what: &str, text: &str) -> Error {
    Error::Protocol(format!(
        "trial {}: cannot interpret {what}: {text:?}",
        transcript.trial_id
    ))
}

/// 1-based index of the pending user turn, used to derive per-turn randomness.
fn turn_index(transcript: &Transcript) -> u64 {
    transcript.user_turns().count() as u64
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysNoAgent;

impl Agent for AlwaysNoAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::AlwaysNo
    }

    fn respond(&self, _transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        Ok(NO.to_string())
    }
}

/// Commits to `x` uniform on `1..=n` when told to think of a number and
/// answers `Yes` exactly when asked about `x`.
///
/// The range spoken in the instruction takes precedence over the configured
/// `n`, so one handle serves every size of a range sweep.
#[derive(Debug, Clone)]
pub struct PerfectLspNumberAgent {
    n: u32,
    seed: u64,
}

impl PerfectLspNumberAgent {
    pub fn new(n: u32, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("n = {n}, must be at least 2")));
        }
        Ok(PerfectLspNumberAgent { n, seed })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The value committed to in the trial with seed `trial_seed`.
    pub fn committed(&self, trial_seed: u64, n: u32) -> u32 {
        seed::rng(seed::mix(&[self.seed, trial_seed])).gen_range(1..=n)
    }
}

impl Agent for PerfectLspNumberAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::PerfectLspNumber
    }

    fn respond(&self, transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        let mut turns = transcript.user_turns();
        let first = turns.next().unwrap_or_default();
        let n = parse_number_instruction(first)
            .ok_or_else(|| protocol(transcript, "number instruction", first))?;
        let pending = transcript.pending_user()?;
        if transcript.user_turns().count() == 1 {
            return Ok(number_ack(n));
        }
        let i = parse_number_query(pending)
            .ok_or_else(|| protocol(transcript, "number query", pending))?;
        Ok(yes_no(i == self.committed(transcript.seed, n)))
    }
}

/// Stateless agent biased toward 7: `Yes` to 7 with `p_seven`, to any other
/// index with `(1 - p_seven) / (n - 1)`.
#[derive(Debug, Clone)]
pub struct BiasedSevenAgent {
    n: u32,
    p_seven: f64,
}

impl BiasedSevenAgent {
    pub fn new(n: u32, p_seven: f64) -> Result<Self> {
        if n < 7 {
            return Err(Error::domain(format!("n = {n}, must be at least 7")));
        }
        check_probability("p_seven", p_seven)?;
        Ok(BiasedSevenAgent { n, p_seven })
    }
}

impl Agent for BiasedSevenAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::BiasedSeven
    }

    fn respond(&self, transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        let pending = transcript.pending_user()?;
        if let Some(n) = parse_number_instruction(pending) {
            return Ok(number_ack(n));
        }
        let i = parse_number_query(pending)
            .ok_or_else(|| protocol(transcript, "number query", pending))?;
        let p = if i == 7 {
            self.p_seven
        } else {
            (1.0 - self.p_seven) / (self.n - 1) as f64
        };
        let mut rng = seed::rng(seed::mix(&[transcript.seed, turn_index(transcript)]));
        Ok(yes_no(rng.gen_bool(p.clamp(0.0, 1.0))))
    }
}

/// Answers `Yes` with probability `p_yes` at every turn, independently.
#[derive(Debug, Clone)]
pub struct RandomAnswerAgent {
    p_yes: f64,
    seed: u64,
}

impl RandomAnswerAgent {
    pub fn new(p_yes: f64, seed: u64) -> Result<Self> {
        check_probability("p_yes", p_yes)?;
        Ok(RandomAnswerAgent { p_yes, seed })
    }
}

impl Agent for RandomAnswerAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::RandomAnswer
    }

    fn respond(&self, transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        let mut rng = seed::rng(seed::mix(&[
            self.seed,
            transcript.seed,
            turn_index(transcript),
        ]));
        Ok(yes_no(rng.gen_bool(self.p_yes)))
    }
}

/// Commits to one catalog object and answers every comparison truthfully.
///
/// On attributes where the committed object has no rank it behaves as if the
/// object outranks the whole column: `Yes` to "greater", `No` to "less".
#[derive(Debug, Clone)]
pub struct PerfectLspObjectAgent {
    catalog: Arc<ObjectCatalog>,
    seed: u64,
}

impl PerfectLspObjectAgent {
    pub fn new(catalog: Arc<ObjectCatalog>, seed: u64) -> Result<Self> {
        if catalog.is_empty() {
            return Err(Error::domain("object catalog is empty"));
        }
        Ok(PerfectLspObjectAgent { catalog, seed })
    }

    pub fn committed(&self, trial_seed: u64) -> ObjectId {
        seed::rng(seed::mix(&[self.seed, trial_seed])).gen_range(0..self.catalog.len())
    }
}

impl Agent for PerfectLspObjectAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::PerfectLspObject
    }

    fn respond(&self, transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        let pending = transcript.pending_user()?;
        if pending == OBJECT_INSTRUCTION {
            return Ok(OBJECT_ACK.to_string());
        }
        let query = parse_query(pending, &self.catalog)
            .ok_or_else(|| protocol(transcript, "object query", pending))?;
        let x = self.committed(transcript.seed);
        let yes = query
            .holds_for(&self.catalog, x)
            .unwrap_or(query.direction == Direction::Greater);
        Ok(yes_no(yes))
    }
}

/// How the simulated mentalism agent places blocks "anywhere in the middle".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    /// Uniform over valid interior gaps, seeded.
    #[default]
    Uniform,
    /// Always right after the remainder's first element.
    FirstValid,
}

/// Tracks the routine on a private [`RoutineState`] and reports its true
/// survivor and set-aside number.
#[derive(Debug, Clone)]
pub struct PerfectLspMentalismAgent {
    number_range: u32,
    seed: u64,
    gaps: GapPolicy,
}

impl PerfectLspMentalismAgent {
    pub fn new(number_range: u32, seed: u64, gaps: GapPolicy) -> Result<Self> {
        if number_range == 0 {
            return Err(Error::domain("number_range must be at least 1"));
        }
        Ok(PerfectLspMentalismAgent {
            number_range,
            seed,
            gaps,
        })
    }

    /// The four numbers committed to in the trial with seed `trial_seed`.
    pub fn committed(&self, trial_seed: u64, number_range: u32) -> [u32; 4] {
        let mut rng = seed::rng(seed::mix(&[self.seed, trial_seed]));
        std::array::from_fn(|_| rng.gen_range(1..=number_range))
    }

    /// Replays every instruction so far; returns the final state and the
    /// pending instruction.
    pub fn replay(&self, transcript: &Transcript) -> Result<(RoutineState, Instruction)> {
        let mut gap_rng = seed::rng(seed::mix(&[self.seed, transcript.seed, 1]));
        let mut state: Option<RoutineState> = None;
        let mut last = None;
        for text in transcript.user_turns() {
            let instruction = parse_instruction(text)
                .ok_or_else(|| protocol(transcript, "routine instruction", text))?;
            let current = match (instruction, state.as_mut()) {
                (Instruction::Think { number_range }, None) => {
                    let range = if number_range == 0 { self.number_range } else { number_range };
                    state = Some(RoutineState::new(
                        self.committed(transcript.seed, range).to_vec(),
                    ));
                    last = Some(instruction);
                    continue;
                }
                (_, Some(s)) => s,
                _ => return Err(protocol(transcript, "instruction before commitment", text)),
            };
            let seq = &current.sequence;
            match instruction {
                Instruction::Think { .. } => {
                    return Err(protocol(transcript, "repeated commitment", text))
                }
                Instruction::Duplicate => current.sequence = apply_duplicate(seq)?,
                Instruction::Rotate { k } => current.sequence = apply_rotate(seq, k as usize)?,
                Instruction::RotateSeven => current.sequence = apply_rotate(seq, 7)?,
                Instruction::MiddleInsert { k } => {
                    let k = k as usize;
                    let max = interior_gap_count(seq.len(), k);
                    let gap = match self.gaps {
                        GapPolicy::FirstValid => 1,
                        GapPolicy::Uniform if max >= 1 => gap_rng.gen_range(1..=max),
                        GapPolicy::Uniform => 1,
                    };
                    current.sequence = apply_middle_insert(seq, k, gap)?;
                }
                Instruction::SetAside => *current = apply_set_aside(current)?,
                Instruction::RemoveHead { c } => {
                    current.sequence = apply_remove_head(seq, c as usize)?
                }
                Instruction::Eliminate { repetitions } => {
                    current.sequence = apply_josephus_eliminate(seq, repetitions as usize)?
                }
                Instruction::Report => {}
            }
            last = Some(instruction);
        }
        match (state, last) {
            (Some(s), Some(i)) => Ok((s, i)),
            _ => Err(Error::Protocol(format!(
                "trial {}: no routine instruction found",
                transcript.trial_id
            ))),
        }
    }
}

impl Agent for PerfectLspMentalismAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::PerfectLspMentalism
    }

    fn respond(&self, transcript: &Transcript, _decode: &DecodeConfig) -> Result<String> {
        let (state, pending) = self.replay(transcript)?;
        if pending != Instruction::Report {
            let len = state.sequence.len() as u32;
            return pending
                .acknowledgement(len)
                .ok_or_else(|| Error::Protocol("no acknowledgement for report".into()));
        }
        match (state.sequence.as_slice(), state.set_aside) {
            (&[last], Some(aside)) => Ok(format!(
                "The last remaining number is {last}. The number I set aside at the beginning was {aside}."
            )),
            _ => Err(Error::Protocol(format!(
                "trial {}: routine incomplete when asked to report ({} numbers left)",
                transcript.trial_id,
                state.sequence.len()
            ))),
        }
    }
}
