use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Attribute, TrialOutcome, TrialStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesNoMetrics {
    pub counted_trials: usize,
    pub passes: usize,
    pub contradictions: usize,
    pub protocol_failures: usize,
    /// Percentage of counted trials reaching the step cap.
    pub pass_rate: f64,
    /// Mean contradiction step over failed trials; absent when none failed.
    pub msc_failures: Option<f64>,
    /// Mean over all counted trials, passes valued at the step cap.
    pub msc_censored: f64,
    pub failures_by_attribute: BTreeMap<Attribute, usize>,
}

/// Pass rate and mean steps to contradiction, excluding protocol failures.
pub fn compute_msc_pr(outcomes: &[TrialOutcome], max_steps: u32) -> Result<YesNoMetrics> {
    let mut passes = 0usize;
    let mut protocol_failures = 0usize;
    let mut failure_steps = Vec::new();
    let mut failures_by_attribute: BTreeMap<Attribute, usize> =
        Attribute::ALL.iter().map(|&a| (a, 0)).collect();

    for outcome in outcomes {
        match outcome.status {
            TrialStatus::Pass => passes += 1,
            TrialStatus::ProtocolFailure => protocol_failures += 1,
            TrialStatus::Contradiction => {
                let step = outcome.contradiction_step.ok_or_else(|| {
                    Error::IncompleteData("contradiction without a step".into())
                })?;
                failure_steps.push(step as u64);
                if let Some(attr) = outcome.first_emptied_attribute {
                    *failures_by_attribute.entry(attr).or_default() += 1;
                }
            }
        }
    }

    let contradictions = failure_steps.len();
    let counted = passes + contradictions;
    if counted == 0 {
        return Err(Error::IncompleteData(
            "no counted trials after excluding protocol failures".into(),
        ));
    }
    let failure_sum: u64 = failure_steps.iter().sum();
    let msc_failures = (contradictions > 0).then(|| failure_sum as f64 / contradictions as f64);
    let censored_sum = failure_sum + passes as u64 * max_steps as u64;

    Ok(YesNoMetrics {
        counted_trials: counted,
        passes,
        contradictions,
        protocol_failures,
        pass_rate: 100.0 * passes as f64 / counted as f64,
        msc_failures,
        msc_censored: censored_sum as f64 / counted as f64,
        failures_by_attribute,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: u32,
    pub upper: u32,
    pub count: usize,
}

/// Contradiction steps binned by `bin_width`, contiguous from the lowest to
/// the highest occupied bin.
pub fn histogram_steps(outcomes: &[TrialOutcome], bin_width: u32) -> Result<Vec<HistogramBin>> {
    if bin_width == 0 {
        return Err(Error::domain("bin_width must be at least 1"));
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for step in outcomes.iter().filter_map(|o| o.contradiction_step) {
        *counts.entry(step / bin_width).or_default() += 1;
    }
    let (Some((&first, _)), Some((&last, _))) = (counts.first_key_value(), counts.last_key_value())
    else {
        return Ok(Vec::new());
    };
    Ok((first..=last)
        .map(|bin| HistogramBin {
            lower: bin * bin_width,
            upper: bin * bin_width + bin_width - 1,
            count: counts.get(&bin).copied().unwrap_or(0),
        })
        .collect())
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    for b in bins {
        out.push_str(&format!("{},{},{}\n", b.lower, b.upper, b.count));
    }
    out
}
