//! The spoken routine: instructions, fixed acknowledgements and their parser.

use std::sync::OnceLock;

use regex::Regex;

use super::routine::RoutineParams;
use crate::transcript::Transcript;

pub const FINAL_QUESTION: &str = "Tell me what the last remaining number is. Do you remember the number you set aside at the beginning? Tell me what that number was.";
pub const COT_SUFFIX: &str = " Let's think step by step.";

/// One user turn of the routine, as understood by a listener.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Think { number_range: u32 },
    Duplicate,
    Rotate { k: u32 },
    MiddleInsert { k: u32 },
    SetAside,
    RemoveHead { c: u32 },
    RotateSeven,
    Eliminate { repetitions: u32 },
    Report,
}

impl Instruction {
    pub fn text(self) -> String {
        match self {
            Instruction::Think { number_range } => format!(
                "Think of 4 integers between 1 and {number_range} in order, but don't tell me."
            ),
            Instruction::Duplicate => {
                "In order, append the same 4 numbers after the original ones.".to_string()
            }
            Instruction::Rotate { k } => format!("Move the first {k} numbers to the end."),
            Instruction::MiddleInsert { k } => {
                format!("Take the first {k} numbers and insert them anywhere in the middle.")
            }
            Instruction::SetAside => {
                "Set the first number aside. We don't need it for now.".to_string()
            }
            Instruction::RemoveHead { c } => {
                format!("Remove the first {c} numbers. We will never need it anymore.")
            }
            Instruction::RotateSeven => {
                "Move the first number to the end. Repeat this seven times.".to_string()
            }
            Instruction::Eliminate { repetitions } => format!(
                "Remove the second number, and then move the first number to the end. Repeat this {repetitions} times."
            ),
            Instruction::Report => FINAL_QUESTION.to_string(),
        }
    }

    /// The scripted assistant reply. `remaining` is the sequence length after
    /// a head removal.
    pub fn acknowledgement(self, remaining: u32) -> Option<String> {
        Some(match self {
            Instruction::Think { .. } => "Okay! I've got 4 numbers. What's next?".to_string(),
            Instruction::Duplicate => "Understood! Now I have 8 numbers. What's next?".to_string(),
            Instruction::Rotate { .. } => {
                "Got it! Now I have moved the numbers. What's next?".to_string()
            }
            Instruction::MiddleInsert { k: 3 } if remaining == 8 => {
                "Okay! The first 3 numbers are placed somewhere in the middle. What's next?"
                    .to_string()
            }
            Instruction::MiddleInsert { k } => format!(
                "Got it. The first {k} numbers are placed somewhere in the middle. What's next?"
            ),
            Instruction::SetAside => "Understood! Now I have 7 numbers. What's next?".to_string(),
            Instruction::RemoveHead { .. } => {
                format!("Okay! Now I have {remaining} numbers. What's next?")
            }
            Instruction::RotateSeven => {
                "Understood! Now my sequence has rearranged. What's next?".to_string()
            }
            Instruction::Eliminate { .. } => {
                "Got it! Now I have only 1 number. What's next?".to_string()
            }
            Instruction::Report => return None,
        })
    }
}

/// The routine's user turns in order, final question last.
pub fn routine_instructions(params: &RoutineParams) -> Vec<Instruction> {
    vec![
        Instruction::Think {
            number_range: params.number_range,
        },
        Instruction::Duplicate,
        Instruction::Rotate { k: params.a },
        Instruction::MiddleInsert { k: 3 },
        Instruction::SetAside,
        Instruction::MiddleInsert { k: params.b },
        Instruction::RemoveHead { c: params.c },
        Instruction::RotateSeven,
        Instruction::Eliminate {
            repetitions: 6 - params.c,
        },
        Instruction::Report,
    ]
}

/// Full scripted conversation ending with the final question.
pub fn build_routine_transcript(
    trial_id: &str,
    seed: u64,
    params: &RoutineParams,
    cot: bool,
) -> Transcript {
    let mut transcript = Transcript::new(trial_id, seed);
    let mut len = 4u32;
    for instruction in routine_instructions(params) {
        len = match instruction {
            Instruction::Duplicate => 8,
            Instruction::SetAside => 7,
            Instruction::RemoveHead { c } => len - c,
            Instruction::Eliminate { .. } => 1,
            _ => len,
        };
        let mut text = instruction.text();
        if instruction == Instruction::Report && cot {
            text.push_str(COT_SUFFIX);
        }
        transcript.push_user(text);
        if let Some(ack) = instruction.acknowledgement(len) {
            transcript.push_assistant(ack);
        }
    }
    transcript
}

/// Recognizes one routine instruction; trailing text after the final
/// question (such as a step-by-step suffix) is ignored.
pub fn parse_instruction(text: &str) -> Option<Instruction> {
    static PATTERNS: OnceLock<[Regex; 5]> = OnceLock::new();
    let [think, rotate, insert, remove, eliminate] = PATTERNS.get_or_init(|| {
        [
            Regex::new(r"^Think of 4 integers between 1 and (\d+) in order, but don't tell me\.$"),
            Regex::new(r"^Move the first (\d+) numbers to the end\.$"),
            Regex::new(r"^Take the first (\d+) numbers and insert them anywhere in the middle\.$"),
            Regex::new(r"^Remove the first (\d+) numbers\. We will never need it anymore\.$"),
            Regex::new(
                r"^Remove the second number, and then move the first number to the end\. Repeat this (\d+) times\.$",
            ),
        ]
        .map(|r| r.expect("valid regex"))
    });
    let text = text.trim();
    let number = |re: &Regex| -> Option<u32> { re.captures(text)?.get(1)?.as_str().parse().ok() };

    if text.starts_with(FINAL_QUESTION) {
        return Some(Instruction::Report);
    }
    if text == Instruction::Duplicate.text() {
        return Some(Instruction::Duplicate);
    }
    if text == Instruction::SetAside.text() {
        return Some(Instruction::SetAside);
    }
    if text == Instruction::RotateSeven.text() {
        return Some(Instruction::RotateSeven);
    }
    if let Some(n) = number(think) {
        return Some(Instruction::Think { number_range: n });
    }
    if let Some(k) = number(rotate) {
        return Some(Instruction::Rotate { k });
    }
    if let Some(k) = number(insert) {
        return Some(Instruction::MiddleInsert { k });
    }
    if let Some(c) = number(remove) {
        return Some(Instruction::RemoveHead { c });
    }
    if let Some(r) = number(eliminate) {
        return Some(Instruction::Eliminate { repetitions: r });
    }
    None
}
