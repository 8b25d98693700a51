//! Step operators of the routine. Positions in docs are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoutineState {
    pub sequence: Vec<u32>,
    pub set_aside: Option<u32>,
}

impl RoutineState {
    pub fn new(sequence: Vec<u32>) -> Self {
        RoutineState {
            sequence,
            set_aside: None,
        }
    }
}

/// Where a moved block lands during "insert them anywhere in the middle".
///
/// Gaps index the remainder left after removing the moved elements: gap `g`
/// means "right after the remainder's g-th element", so valid gaps are
/// `1..=remainder_len - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// The moved elements stay contiguous, in order, at one gap.
    Block(usize),
    /// Each moved element picks its own gap; elements sharing a gap keep
    /// their original relative order.
    Scattered(Vec<usize>),
}

impl Placement {
    pub fn first_valid() -> Self {
        Placement::Block(1)
    }
}

/// Number of valid interior gaps when moving `k` of `len` elements.
pub fn interior_gap_count(len: usize, k: usize) -> usize {
    len.saturating_sub(k).saturating_sub(1)
}

pub fn apply_duplicate(s: &[u32]) -> Result<Vec<u32>> {
    if s.len() != 4 {
        return Err(Error::State(format!(
            "duplicate expects 4 numbers, got {}",
            s.len()
        )));
    }
    let mut out = s.to_vec();
    out.extend_from_slice(s);
    Ok(out)
}

/// Left rotation by `k mod |s|`.
pub fn apply_rotate(s: &[u32], k: usize) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Err(Error::State("cannot rotate an empty sequence".into()));
    }
    let mut out = s.to_vec();
    out.rotate_left(k % s.len());
    Ok(out)
}

fn split_for_insert(s: &[u32], k: usize) -> Result<(&[u32], &[u32])> {
    if k == 0 || k >= s.len() {
        return Err(Error::State(format!(
            "cannot move the first {k} of {} numbers",
            s.len()
        )));
    }
    Ok(s.split_at(k))
}

fn check_gap(gap: usize, max: usize) -> Result<()> {
    if gap == 0 || gap > max {
        return Err(Error::InvalidGap { gap, max });
    }
    Ok(())
}

/// Moves the first `k` elements, as a block, to interior `gap` of the remainder.
pub fn apply_middle_insert(s: &[u32], k: usize, gap: usize) -> Result<Vec<u32>> {
    let (moved, rest) = split_for_insert(s, k)?;
    check_gap(gap, interior_gap_count(s.len(), k))?;
    let mut out = Vec::with_capacity(s.len());
    out.extend_from_slice(&rest[..gap]);
    out.extend_from_slice(moved);
    out.extend_from_slice(&rest[gap..]);
    Ok(out)
}

/// Moves each of the first `k` elements to its own interior gap.
pub fn apply_middle_insert_scattered(s: &[u32], k: usize, gaps: &[usize]) -> Result<Vec<u32>> {
    let (moved, rest) = split_for_insert(s, k)?;
    if gaps.len() != k {
        return Err(Error::State(format!(
            "scattered insert needs {k} gaps, got {}",
            gaps.len()
        )));
    }
    let max = interior_gap_count(s.len(), k);
    for &g in gaps {
        check_gap(g, max)?;
    }
    let mut out = Vec::with_capacity(s.len());
    for (idx, &x) in rest.iter().enumerate() {
        out.push(x);
        let gap = idx + 1;
        out.extend(
            moved
                .iter()
                .zip(gaps)
                .filter(|&(_, &g)| g == gap)
                .map(|(&m, _)| m),
        );
    }
    Ok(out)
}

pub fn apply_placement(s: &[u32], k: usize, placement: &Placement) -> Result<Vec<u32>> {
    match placement {
        Placement::Block(gap) => apply_middle_insert(s, k, *gap),
        Placement::Scattered(gaps) => apply_middle_insert_scattered(s, k, gaps),
    }
}

/// Moves the head of an 8-element sequence into `set_aside`.
pub fn apply_set_aside(state: &RoutineState) -> Result<RoutineState> {
    if state.set_aside.is_some() {
        return Err(Error::State("a number has already been set aside".into()));
    }
    if state.sequence.len() != 8 {
        return Err(Error::State(format!(
            "set aside expects 8 numbers, got {}",
            state.sequence.len()
        )));
    }
    Ok(RoutineState {
        set_aside: Some(state.sequence[0]),
        sequence: state.sequence[1..].to_vec(),
    })
}

pub fn apply_remove_head(s: &[u32], c: usize) -> Result<Vec<u32>> {
    if c == 0 || c >= s.len() {
        return Err(Error::State(format!(
            "cannot remove the first {c} of {} numbers",
            s.len()
        )));
    }
    Ok(s[c..].to_vec())
}

/// Predicted 1-based position of the former tail after rotating a length-`n`
/// sequence left by 7: `(n - (7 mod n)) mod n`, with 0 read as `n`.
pub fn hidden_position_after_rotate7(n: usize) -> Result<usize> {
    if !(4..=6).contains(&n) {
        return Err(Error::domain(format!("length {n} outside 4..=6")));
    }
    match (n - 7 % n) % n {
        0 => Ok(n),
        p => Ok(p),
    }
}

/// Repeats "delete the second element, then move the head to the tail".
pub fn apply_josephus_eliminate(s: &[u32], repetitions: usize) -> Result<Vec<u32>> {
    josephus_path(s, repetitions).map(|mut path| path.pop().unwrap_or_default())
}

/// Every intermediate sequence of the elimination, starting with `s`.
pub fn josephus_path(s: &[u32], repetitions: usize) -> Result<Vec<Vec<u32>>> {
    let mut current = s.to_vec();
    let mut path = vec![current.clone()];
    for rep in 0..repetitions {
        if current.len() < 2 {
            return Err(Error::State(format!(
                "elimination round {} needs at least 2 numbers, have {}",
                rep + 1,
                current.len()
            )));
        }
        current.remove(1);
        current.rotate_left(1);
        path.push(current.clone());
    }
    Ok(path)
}
