//! The number guessing game and Empirical State Mass.
//!
//! Each query index is asked in its own fresh conversation. An agent that
//! really commits to one number answers `Yes` to exactly one index, so the
//! per-index yes-rates of an honest, persistent agent sum to one.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::agent::AgentHandle;
use crate::error::{Error, Result};
use crate::gateway::classify_yes_no;
use crate::seed::trial_seed;
use crate::transcript::{AnswerLabel, DecodeConfig, Transcript};

pub const DEFAULT_TRIALS_PER_QUERY: u32 = 200;
pub const DEFAULT_RANGE_SWEEP: [u32; 9] = [2, 3, 5, 7, 9, 10, 20, 30, 40];

pub fn number_instruction(n: u32) -> String {
    format!("Think of an integer between 1 and {n}, but don't say it to me.")
}

pub fn number_ack(n: u32) -> String {
    format!("Got it! I've thought of an integer between 1 and {n}. What's next?")
}

pub fn number_query(i: u32) -> String {
    format!("Is the number you're thinking of {i}? Answer Yes or No.")
}

fn capture_u32(re: &Regex, text: &str) -> Option<u32> {
    re.captures(text.trim())?.get(1)?.as_str().parse().ok()
}

pub fn parse_number_instruction(text: &str) -> Option<u32> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^Think of an integer between 1 and (\d+), but don't say it to me\.$")
            .expect("valid regex")
    });
    capture_u32(re, text)
}

pub fn parse_number_query(text: &str) -> Option<u32> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^Is the number you're thinking of (\d+)\? Answer Yes or No\.$")
            .expect("valid regex")
    });
    capture_u32(re, text)
}

/// Instruction, scripted acknowledgement and the query for index `i`.
pub fn build_number_trial(n: u32, i: u32) -> Result<Transcript> {
    if n < 2 {
        return Err(Error::domain(format!("n = {n}, must be at least 2")));
    }
    if i < 1 || i > n {
        return Err(Error::domain(format!("query index {i} outside 1..={n}")));
    }
    let mut t = Transcript::new(format!("number/n{n}/i{i}"), 0);
    t.push_user(number_instruction(n));
    t.push_assistant(number_ack(n));
    t.push_user(number_query(i));
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberGameConfig {
    pub n: u32,
    pub trials_per_query: u32,
    pub decode: DecodeConfig,
}

impl NumberGameConfig {
    pub fn new(n: u32, trials_per_query: u32, decode: DecodeConfig) -> Result<Self> {
        let cfg = NumberGameConfig {
            n,
            trials_per_query,
            decode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("n = {}, must be at least 2", self.n)));
        }
        if self.trials_per_query == 0 {
            return Err(Error::domain("trials_per_query must be at least 1"));
        }
        self.decode.validate()
    }
}

/// One answered query, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberTrialRecord {
    pub trial_id: String,
    pub seed: u64,
    pub n: u32,
    pub index: u32,
    pub trial: u32,
    pub decode: DecodeConfig,
    /// Verbatim reply.
    pub response: String,
    pub label: AnswerLabel,
}

/// Seed namespace for one `(n, i)` cell. The decode setting is deliberately
/// absent so decode sweeps reuse identical seeds.
pub fn cell_id(n: u32, index: u32) -> String {
    format!("number/n{n}/i{index}")
}

pub fn number_trial_id(n: u32, index: u32, trial: u32, decode: &DecodeConfig) -> String {
    format!("number/{}/n{n}/i{index}/t{trial}", decode.label())
}

/// Runs trial `trial` of query `index` in a fresh conversation.
pub fn run_number_trial(
    agent: &AgentHandle,
    base_seed: u64,
    n: u32,
    index: u32,
    trial: u32,
) -> Result<NumberTrialRecord> {
    let mut transcript = build_number_trial(n, index)?;
    let decode = agent.decode();
    transcript.trial_id = number_trial_id(n, index, trial, &decode);
    transcript.seed = trial_seed(base_seed, &cell_id(n, index), trial as u64);
    let response = agent.respond(&transcript)?;
    Ok(NumberTrialRecord {
        label: classify_yes_no(&response),
        trial_id: transcript.trial_id,
        seed: transcript.seed,
        n,
        index,
        trial,
        decode,
        response,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerCounts {
    pub yes: u32,
    pub no: u32,
    pub unparseable: u32,
}

impl AnswerCounts {
    pub fn total(&self) -> u32 {
        self.yes + self.no + self.unparseable
    }

    pub fn record(&mut self, label: AnswerLabel) {
        match label {
            AnswerLabel::Yes => self.yes += 1,
            AnswerLabel::No => self.no += 1,
            AnswerLabel::Unparseable => self.unparseable += 1,
        }
    }
}

/// Per-index affirmative rates. Unparseable replies count as not-yes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesRateTable {
    pub n: u32,
    pub trials_per_query: u32,
    pub rates: BTreeMap<u32, f64>,
    pub counts: BTreeMap<u32, AnswerCounts>,
}

impl YesRateTable {
    pub fn from_counts(n: u32, trials_per_query: u32, counts: BTreeMap<u32, AnswerCounts>) -> Result<Self> {
        for (i, c) in &counts {
            if c.total() != trials_per_query {
                return Err(Error::IncompleteData(format!(
                    "index {i} has {} answers, expected {trials_per_query}",
                    c.total()
                )));
            }
        }
        let rates = counts
            .iter()
            .map(|(&i, c)| (i, c.yes as f64 / trials_per_query as f64))
            .collect();
        Ok(YesRateTable {
            n,
            trials_per_query,
            rates,
            counts,
        })
    }

    /// Table from bare rates (no raw counts), indices `1..=rates.len()`.
    pub fn from_rates(rates: &[f64], trials_per_query: u32) -> Self {
        YesRateTable {
            n: rates.len() as u32,
            trials_per_query,
            rates: rates
                .iter()
                .enumerate()
                .map(|(idx, &r)| (idx as u32 + 1, r))
                .collect(),
            counts: BTreeMap::new(),
        }
    }

    /// Tallies records for one `(n, decode)` cell.
    pub fn from_records<'a>(
        n: u32,
        trials_per_query: u32,
        records: impl IntoIterator<Item = &'a NumberTrialRecord>,
    ) -> Result<Self> {
        let mut counts: BTreeMap<u32, AnswerCounts> = BTreeMap::new();
        for r in records {
            if r.n != n {
                continue;
            }
            counts.entry(r.index).or_default().record(r.label);
        }
        Self::from_counts(n, trials_per_query, counts)
    }

    pub fn unparseable_total(&self) -> u32 {
        self.counts.values().map(|c| c.unparseable).sum()
    }

    /// Index with the highest rate; ties go to the smallest index.
    pub fn argmax(&self) -> Option<u32> {
        self.rates
            .iter()
            .fold(None, |best: Option<(u32, f64)>, (&i, &r)| match best {
                Some((_, br)) if br >= r => best,
                _ => Some((i, r)),
            })
            .map(|(i, _)| i)
    }

    /// `index,yes_count,no_count,unparseable_count,rate` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,yes_count,no_count,unparseable_count,rate\n");
        for (i, rate) in &self.rates {
            let c = self.counts.get(i).copied().unwrap_or_default();
            out.push_str(&format!("{i},{},{},{},{rate}\n", c.yes, c.no, c.unparseable));
        }
        out
    }
}

/// Sum of the per-index yes-rates over `1..=n`.
pub fn compute_esm(table: &YesRateTable) -> Result<f64> {
    (1..=table.n)
        .map(|i| {
            table
                .rates
                .get(&i)
                .copied()
                .ok_or_else(|| Error::IncompleteData(format!("no rate for index {i}")))
        })
        .sum()
}

/// Standard error of the ESM estimate: `sqrt(Σ p_i (1 - p_i) / T)`.
pub fn esm_standard_error(table: &YesRateTable) -> f64 {
    let t = table.trials_per_query as f64;
    table
        .rates
        .values()
        .map(|&p| p * (1.0 - p) / t)
        .sum::<f64>()
        .sqrt()
}

/// Every `(index, trial)` pair for `n`, in aggregation order.
pub fn plan(n: u32, trials_per_query: u32) -> impl Iterator<Item = (u32, u32)> {
    (1..=n).flat_map(move |i| (0..trials_per_query).map(move |t| (i, t)))
}

pub fn estimate_yes_rates(agent: &AgentHandle, cfg: &NumberGameConfig, base_seed: u64) -> Result<YesRateTable> {
    cfg.validate()?;
    let agent = agent.with_decode(cfg.decode);
    let work: Vec<(u32, u32)> = plan(cfg.n, cfg.trials_per_query).collect();
    let records = work
        .par_iter()
        .map(|&(i, t)| run_number_trial(&agent, base_seed, cfg.n, i, t))
        .collect::<Result<Vec<_>>>()?;
    YesRateTable::from_records(cfg.n, cfg.trials_per_query, &records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub decode: DecodeConfig,
    pub table: YesRateTable,
    pub esm: f64,
    pub esm_se: f64,
}

impl SweepRow {
    pub fn from_table(decode: DecodeConfig, table: YesRateTable) -> Result<Self> {
        Ok(SweepRow {
            n: table.n,
            decode,
            esm: compute_esm(&table)?,
            esm_se: esm_standard_error(&table),
            table,
        })
    }
}

pub fn run_range_sweep(
    agent: &AgentHandle,
    n_values: &[u32],
    trials_per_query: u32,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    n_values
        .iter()
        .map(|&n| {
            let cfg = NumberGameConfig::new(n, trials_per_query, agent.decode())?;
            SweepRow::from_table(cfg.decode, estimate_yes_rates(agent, &cfg, base_seed)?)
        })
        .collect()
}

pub fn run_decode_sweep(
    agent: &AgentHandle,
    n: u32,
    configs: &[DecodeConfig],
    trials_per_query: u32,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if configs.is_empty() {
        return Err(Error::domain("decode sweep needs at least one configuration"));
    }
    configs
        .iter()
        .map(|&decode| {
            let cfg = NumberGameConfig::new(n, trials_per_query, decode)?;
            SweepRow::from_table(decode, estimate_yes_rates(agent, &cfg, base_seed)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{make_always_no_agent, make_perfect_lsp_number_agent};
    use crate::transcript::Role;

    #[test]
    fn templates() {
        let t = build_number_trial(10, 7).unwrap();
        assert_eq!(t.messages.len(), 3);
        assert_eq!(
            t.messages[0].content,
            "Think of an integer between 1 and 10, but don't say it to me."
        );
        assert_eq!(t.messages[1].role, Role::Assistant);
        assert_eq!(
            t.messages[1].content,
            "Got it! I've thought of an integer between 1 and 10. What's next?"
        );
        assert_eq!(
            t.messages[2].content,
            "Is the number you're thinking of 7? Answer Yes or No."
        );
        assert!(build_number_trial(10, 11).is_err());
        assert!(build_number_trial(10, 0).is_err());
    }

    #[test]
    fn parse_templates() {
        assert_eq!(parse_number_instruction(&number_instruction(37)), Some(37));
        assert_eq!(parse_number_query(&number_query(7)), Some(7));
        assert_eq!(parse_number_query("Is it 7?"), None);
    }

    #[test]
    fn esm_examples() {
        let table = YesRateTable::from_rates(
            &[0.0, 0.0, 0.04, 0.055, 0.05, 0.2, 0.605, 0.125, 0.005, 0.005],
            200,
        );
        assert!((compute_esm(&table).unwrap() - 1.085).abs() < 1e-9);
        assert_eq!(compute_esm(&YesRateTable::from_rates(&[0.0; 10], 200)).unwrap(), 0.0);

        let mut missing = table.clone();
        missing.rates.remove(&4);
        assert!(matches!(compute_esm(&missing), Err(Error::IncompleteData(_))));
    }

    #[test]
    fn counts_must_sum_to_trials() {
        let mut counts = BTreeMap::new();
        counts.insert(1, AnswerCounts { yes: 1, no: 1, unparseable: 0 });
        assert!(YesRateTable::from_counts(2, 3, counts).is_err());
    }

    #[test]
    fn always_no_has_zero_esm() {
        let cfg = NumberGameConfig::new(10, 20, DecodeConfig::default()).unwrap();
        let table = estimate_yes_rates(&make_always_no_agent(), &cfg, 1).unwrap();
        assert!(table.rates.values().all(|&r| r == 0.0));
        assert_eq!(compute_esm(&table).unwrap(), 0.0);
        assert!(table.counts.values().all(|c| c.total() == 20));
    }

    #[test]
    fn decode_sweep_is_decode_invariant_for_simulated_agents() {
        let agent = make_perfect_lsp_number_agent(10, 3).unwrap();
        let rows = run_decode_sweep(&agent, 10, &DecodeConfig::default_grid(), 20, 9).unwrap();
        assert_eq!(rows.len(), 7);
        for row in &rows[1..] {
            assert_eq!(row.table.rates, rows[0].table.rates);
            assert_eq!(row.table.counts, rows[0].table.counts);
        }
        assert!(run_decode_sweep(&agent, 10, &[], 20, 9).is_err());
    }

    #[test]
    fn csv_rows() {
        let cfg = NumberGameConfig::new(3, 4, DecodeConfig::default()).unwrap();
        let table = estimate_yes_rates(&make_always_no_agent(), &cfg, 1).unwrap();
        assert_eq!(
            table.to_csv(),
            "index,yes_count,no_count,unparseable_count,rate\n1,0,4,0,0\n2,0,4,0,0\n3,0,4,0,0\n"
        );
    }

    #[test]
    fn argmax_ties_to_smallest() {
        let t = YesRateTable::from_rates(&[0.1, 0.3, 0.3], 10);
        assert_eq!(t.argmax(), Some(2));
    }
}
