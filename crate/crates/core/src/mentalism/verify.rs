//! Exhaustive check that the survivor always equals the set-aside number.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ops::{interior_gap_count, Placement};
use super::routine::{run_routine, InsertGaps, RoutineParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionMode {
    /// Moved elements inserted as one block at a single gap.
    Contiguous,
    /// Every moved element placed at its own gap.
    PerElement,
}

impl InsertionMode {
    pub const ALL: [InsertionMode; 2] = [InsertionMode::Contiguous, InsertionMode::PerElement];

    /// Every placement of `k` moved elements into a sequence of `len`.
    pub fn placements(self, len: usize, k: usize) -> Vec<Placement> {
        let max = interior_gap_count(len, k);
        match self {
            InsertionMode::Contiguous => (1..=max).map(Placement::Block).collect(),
            InsertionMode::PerElement => {
                let mut out = vec![Vec::with_capacity(k)];
                for _ in 0..k {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            (1..=max).map(move |g| {
                                let mut next = prefix.clone();
                                next.push(g);
                                next
                            })
                        })
                        .collect();
                }
                out.into_iter().map(Placement::Scattered).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub mode: InsertionMode,
    pub x0: [u32; 4],
    pub params: RoutineParams,
    pub gaps: InsertGaps,
    pub survivor: Option<u32>,
    pub set_aside: Option<u32>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSizes {
    pub x0: u64,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCount {
    pub mode: InsertionMode,
    pub tuples_checked: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub number_range: u32,
    pub domain: DomainSizes,
    pub modes: Vec<ModeCount>,
    pub tuples_checked: u64,
    pub violation_count: u64,
    /// First violations found, in enumeration order (capped).
    pub violations: Vec<Counterexample>,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 100;

/// Enumerates every start in `{1..number_range}^4`, every `a, b, c` and every
/// valid placement of both insertions, under each requested mode.
pub fn verify_invariant_exhaustive(
    number_range: u32,
    modes: &[InsertionMode],
) -> Result<VerificationReport> {
    verify_with(number_range, modes, run_routine)
}

/// As [`verify_invariant_exhaustive`] with a caller-supplied routine.
pub fn verify_with<F>(number_range: u32, modes: &[InsertionMode], routine: F) -> Result<VerificationReport>
where
    F: Fn(&[u32; 4], &RoutineParams, &InsertGaps) -> Result<(u32, u32)> + Sync,
{
    if number_range == 0 {
        return Err(Error::domain("number_range must be at least 1"));
    }
    if modes.is_empty() {
        return Err(Error::domain("at least one insertion mode is required"));
    }
    let started = Instant::now();
    let r = number_range as u64;
    let starts = r.pow(4);

    let mut mode_counts = Vec::new();
    let mut violations = Vec::new();
    let mut violation_count = 0u64;
    let mut tuples_checked = 0u64;

    for &mode in modes {
        let first_placements = mode.placements(8, 3);
        let second_placements: Vec<Vec<Placement>> =
            (1..=3).map(|b| mode.placements(7, b)).collect();

        // one chunk per start, merged in start order
        let chunks: Vec<(u64, u64, Vec<Counterexample>)> = (0..starts)
            .into_par_iter()
            .map(|idx| {
                let x0 = decode_start(idx, number_range);
                let mut checked = 0u64;
                let mut bad = 0u64;
                let mut found = Vec::new();
                for a in 1..=7 {
                    for b in 1..=3u32 {
                        for c in 1..=3 {
                            let params = RoutineParams { a, b, c, number_range };
                            for first in &first_placements {
                                for second in &second_placements[b as usize - 1] {
                                    checked += 1;
                                    let gaps = InsertGaps {
                                        first: first.clone(),
                                        second: second.clone(),
                                    };
                                    let result = routine(&x0, &params, &gaps);
                                    let ok = matches!(result, Ok((s, h)) if s == h);
                                    if !ok {
                                        bad += 1;
                                        if found.len() < MAX_REPORTED_VIOLATIONS {
                                            let (survivor, set_aside, error) = match result {
                                                Ok((s, h)) => (Some(s), Some(h), None),
                                                Err(e) => (None, None, Some(e.to_string())),
                                            };
                                            found.push(Counterexample {
                                                mode,
                                                x0,
                                                params,
                                                gaps,
                                                survivor,
                                                set_aside,
                                                error,
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                (checked, bad, found)
            })
            .collect();

        let mut mode_checked = 0;
        let mut mode_bad = 0;
        for (checked, bad, found) in chunks {
            mode_checked += checked;
            mode_bad += bad;
            let room = MAX_REPORTED_VIOLATIONS.saturating_sub(violations.len());
            violations.extend(found.into_iter().take(room));
        }
        tuples_checked += mode_checked;
        violation_count += mode_bad;
        mode_counts.push(ModeCount {
            mode,
            tuples_checked: mode_checked,
            violations: mode_bad,
        });
    }

    Ok(VerificationReport {
        number_range,
        domain: DomainSizes {
            x0: starts,
            a: 7,
            b: 3,
            c: 3,
        },
        modes: mode_counts,
        tuples_checked,
        violation_count,
        violations,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

fn decode_start(mut idx: u64, number_range: u32) -> [u32; 4] {
    let r = number_range as u64;
    let mut x0 = [0u32; 4];
    for slot in x0.iter_mut().rev() {
        *slot = (idx % r) as u32 + 1;
        idx /= r;
    }
    x0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placement_counts() {
        assert_eq!(InsertionMode::Contiguous.placements(8, 3).len(), 4);
        assert_eq!(InsertionMode::PerElement.placements(8, 3).len(), 64);
        assert_eq!(InsertionMode::Contiguous.placements(7, 3).len(), 3);
        assert_eq!(InsertionMode::PerElement.placements(7, 2).len(), 16);
    }

    #[test]
    fn decode_start_covers_domain() {
        let mut seen: Vec<[u32; 4]> = (0..81).map(|i| decode_start(i, 3)).collect();
        assert_eq!(seen[0], [1, 1, 1, 1]);
        assert_eq!(seen[80], [3, 3, 3, 3]);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 81);
    }

    #[test]
    fn constant_domain_has_no_violations() {
        let report = verify_invariant_exhaustive(1, &InsertionMode::ALL).unwrap();
        assert!(report.passed());
        assert_eq!(report.domain.x0, 1);
        // 7 * 3 * (4 * 12) contiguous + 7 * 3 * (64 * 48) per-element
        assert_eq!(report.modes[0].tuples_checked, 1008);
        assert_eq!(report.modes[1].tuples_checked, 64_512);
    }

    #[test]
    fn rejects_empty_inputs() {
        assert!(verify_invariant_exhaustive(0, &InsertionMode::ALL).is_err());
        assert!(verify_invariant_exhaustive(2, &[]).is_err());
    }
}
