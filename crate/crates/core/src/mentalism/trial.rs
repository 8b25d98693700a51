use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::routine::RoutineParams;
use super::script::build_routine_transcript;
use crate::agent::AgentHandle;
use crate::error::{Error, Result};
use crate::gateway::extract_final_integers;
use crate::seed;
use crate::transcript::Transcript;

const PARAMS_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentalismOutcome {
    pub reported_final: Option<i64>,
    pub reported_aside: Option<i64>,
    pub success: bool,
    pub involves_seven: bool,
    /// Fewer than two integers in the answer; refusals land here too.
    pub unparseable: bool,
}

impl MentalismOutcome {
    /// Scores a free-form final answer: the first two integers are taken as
    /// (survivor, set-aside).
    pub fn from_response(text: &str, number_range: u32) -> Self {
        let numbers = extract_final_integers(text);
        let (reported_final, reported_aside) = match numbers.as_slice() {
            [f, a, ..] => (Some(*f), Some(*a)),
            [f] => (Some(*f), None),
            [] => (None, None),
        };
        let in_range = |v: i64| (1..=number_range as i64).contains(&v);
        let success = matches!((reported_final, reported_aside),
            (Some(f), Some(a)) if f == a && in_range(f));
        MentalismOutcome {
            reported_final,
            reported_aside,
            success,
            involves_seven: reported_final == Some(7) || reported_aside == Some(7),
            unparseable: numbers.len() < 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentalismTrial {
    pub params: RoutineParams,
    pub cot: bool,
    pub transcript: Transcript,
    pub extracted: Vec<i64>,
    pub outcome: MentalismOutcome,
}

/// Samples `a, b, c`, plays the scripted routine and scores the final answer.
pub fn run_mentalism_trial(
    agent: &AgentHandle,
    trial_id: &str,
    seed: u64,
    cot: bool,
    number_range: u32,
) -> Result<MentalismTrial> {
    let mut rng = seed::rng(seed::mix(&[seed, PARAMS_STREAM]));
    let params = RoutineParams::sample(&mut rng, number_range);
    params.validate()?;
    let mut transcript = build_routine_transcript(trial_id, seed, &params, cot);
    let reply = agent.respond(&transcript)?;
    let outcome = MentalismOutcome::from_response(&reply, number_range);
    let extracted = extract_final_integers(&reply);
    transcript.push_assistant(reply);
    Ok(MentalismTrial {
        params,
        cot,
        transcript,
        extracted,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsrSummary {
    pub trials: usize,
    pub successes: usize,
    pub unparseable: usize,
    pub isr: f64,
    /// Share of successes whose reported survivor is 7; absent without successes.
    pub blue_seven_share: Option<f64>,
    /// Shannon entropy (bits) of the reported survivor over parsed answers.
    pub reported_value_entropy: f64,
    pub reported_final_counts: BTreeMap<i64, usize>,
}

pub fn compute_isr(outcomes: &[MentalismOutcome]) -> Result<IsrSummary> {
    if outcomes.is_empty() {
        return Err(Error::IncompleteData("no mentalism outcomes".into()));
    }
    let successes: Vec<&MentalismOutcome> = outcomes.iter().filter(|o| o.success).collect();
    let sevens = successes
        .iter()
        .filter(|o| o.reported_final == Some(7))
        .count();
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in outcomes.iter().filter_map(|o| o.reported_final) {
        *counts.entry(v).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let entropy = counts
        .values()
        .map(|&n| {
            let p = n as f64 / total as f64;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(IsrSummary {
        trials: outcomes.len(),
        successes: successes.len(),
        unparseable: outcomes.iter().filter(|o| o.unparseable).count(),
        isr: successes.len() as f64 / outcomes.len() as f64,
        blue_seven_share: (!successes.is_empty())
            .then(|| sevens as f64 / successes.len() as f64),
        reported_value_entropy: entropy.max(0.0),
        reported_final_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scoring() {
        let ok = MentalismOutcome::from_response("The last number is 7, and I set aside 7.", 10);
        assert!(ok.success && ok.involves_seven && !ok.unparseable);

        let bad = MentalismOutcome::from_response("I got 3 and 5", 10);
        assert!(!bad.success);
        assert_eq!((bad.reported_final, bad.reported_aside), (Some(3), Some(5)));

        let none = MentalismOutcome::from_response("I don't remember.", 10);
        assert!(!none.success && none.unparseable);
        assert_eq!(none.reported_final, None);

        let out_of_range = MentalismOutcome::from_response("12 and 12", 10);
        assert!(!out_of_range.success);
    }

    fn success(v: i64) -> MentalismOutcome {
        MentalismOutcome {
            reported_final: Some(v),
            reported_aside: Some(v),
            success: true,
            involves_seven: v == 7,
            unparseable: false,
        }
    }

    #[test]
    fn isr_tallies() {
        let all = vec![success(4); 150];
        assert_eq!(compute_isr(&all).unwrap().isr, 1.0);

        let none = vec![MentalismOutcome::from_response("no idea", 10); 150];
        let s = compute_isr(&none).unwrap();
        assert_eq!(s.isr, 0.0);
        assert_eq!(s.blue_seven_share, None);
        assert_eq!(s.unparseable, 150);

        let s = compute_isr(&[success(7), success(7), success(3)]).unwrap();
        assert!((s.blue_seven_share.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(compute_isr(&[]).is_err());
    }

    #[test]
    fn entropy_of_constant_echo_is_zero() {
        let s = compute_isr(&vec![success(7); 10]).unwrap();
        assert_eq!(s.reported_value_entropy, 0.0);
        let s = compute_isr(&[success(1), success(2)]).unwrap();
        assert!((s.reported_value_entropy - 1.0).abs() < 1e-12);
    }
}
