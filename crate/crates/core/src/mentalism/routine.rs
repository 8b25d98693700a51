use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ops::{
    apply_duplicate, apply_josephus_eliminate, apply_placement, apply_remove_head, apply_rotate,
    apply_set_aside, interior_gap_count, Placement, RoutineState,
};
use crate::error::{Error, Result};

pub const DEFAULT_NUMBER_RANGE: u32 = 10;

/// The spoken parameters of one routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutineParams {
    /// Numbers moved to the end in the first rotation, 1..=7.
    pub a: u32,
    /// Numbers moved into the middle in the second insertion, 1..=3.
    pub b: u32,
    /// Numbers removed from the head, 1..=3.
    pub c: u32,
    pub number_range: u32,
}

impl RoutineParams {
    pub fn new(a: u32, b: u32, c: u32, number_range: u32) -> Result<Self> {
        let p = RoutineParams {
            a,
            b,
            c,
            number_range,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=7).contains(&self.a) {
            return Err(Error::domain(format!("a = {} outside 1..=7", self.a)));
        }
        if !(1..=3).contains(&self.b) {
            return Err(Error::domain(format!("b = {} outside 1..=3", self.b)));
        }
        if !(1..=3).contains(&self.c) {
            return Err(Error::domain(format!("c = {} outside 1..=3", self.c)));
        }
        if self.number_range == 0 {
            return Err(Error::domain("number_range must be at least 1"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, number_range: u32) -> Self {
        RoutineParams {
            a: rng.gen_range(1..=7),
            b: rng.gen_range(1..=3),
            c: rng.gen_range(1..=3),
            number_range,
        }
    }
}

/// How the two "insert anywhere in the middle" steps are carried out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertGaps {
    /// Moving 3 of 8 numbers.
    pub first: Placement,
    /// Moving `b` of 7 numbers.
    pub second: Placement,
}

impl InsertGaps {
    pub fn first_valid() -> Self {
        InsertGaps {
            first: Placement::first_valid(),
            second: Placement::first_valid(),
        }
    }

    /// Uniform block gaps for both insertions.
    pub fn sample_block<R: Rng + ?Sized>(rng: &mut R, params: &RoutineParams) -> Self {
        let first = rng.gen_range(1..=interior_gap_count(8, 3));
        let second = rng.gen_range(1..=interior_gap_count(7, params.b as usize));
        InsertGaps {
            first: Placement::Block(first),
            second: Placement::Block(second),
        }
    }
}

/// Executes the full routine; returns `(survivor, set_aside)`.
pub fn run_routine(x0: &[u32; 4], params: &RoutineParams, gaps: &InsertGaps) -> Result<(u32, u32)> {
    let trace = run_routine_traced(x0, params, gaps)?;
    let last = trace.last().expect("trace is never empty");
    match (last.sequence.as_slice(), last.set_aside) {
        (&[survivor], Some(hidden)) => Ok((survivor, hidden)),
        _ => Err(Error::State(format!("routine ended in {last:?}"))),
    }
}

/// State after each step, starting with the initial four numbers.
pub fn run_routine_traced(
    x0: &[u32; 4],
    params: &RoutineParams,
    gaps: &InsertGaps,
) -> Result<Vec<RoutineState>> {
    params.validate()?;
    if let Some(bad) = x0.iter().find(|&&x| x < 1 || x > params.number_range) {
        return Err(Error::domain(format!(
            "initial number {bad} outside 1..={}",
            params.number_range
        )));
    }
    let c = params.c as usize;
    let mut trace = Vec::with_capacity(9);
    let mut state = RoutineState::new(x0.to_vec());
    trace.push(state.clone());

    let step = |state: &mut RoutineState, f: &dyn Fn(&[u32]) -> Result<Vec<u32>>| -> Result<()> {
        state.sequence = f(&state.sequence)?;
        Ok(())
    };
    step(&mut state, &apply_duplicate)?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_rotate(s, params.a as usize))?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_placement(s, 3, &gaps.first))?;
    trace.push(state.clone());
    state = apply_set_aside(&state)?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_placement(s, params.b as usize, &gaps.second))?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_remove_head(s, c))?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_rotate(s, 7))?;
    trace.push(state.clone());
    step(&mut state, &|s| apply_josephus_eliminate(s, 6 - c))?;
    trace.push(state);
    Ok(trace)
}
