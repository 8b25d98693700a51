//! The mentalism routine.
//!
//! Four secret numbers are duplicated, rotated, shuffled into the middle and
//! whittled down by a Josephus-style elimination. Whatever the start and
//! whatever the spoken parameters, the survivor is the number set aside
//! halfway through, so an agent that really tracks its state always reports
//! two equal numbers.

mod ops;
mod routine;
mod script;
mod trial;
mod verify;

pub use ops::{
    apply_duplicate, apply_josephus_eliminate, apply_middle_insert, apply_middle_insert_scattered,
    apply_placement, apply_remove_head, apply_rotate, apply_set_aside,
    hidden_position_after_rotate7, interior_gap_count, josephus_path, Placement, RoutineState,
};
pub use routine::{run_routine, run_routine_traced, InsertGaps, RoutineParams, DEFAULT_NUMBER_RANGE};
pub use script::{
    build_routine_transcript, parse_instruction, routine_instructions, Instruction, COT_SUFFIX,
    FINAL_QUESTION,
};
pub use trial::{compute_isr, run_mentalism_trial, IsrSummary, MentalismOutcome, MentalismTrial};
pub use verify::{
    verify_invariant_exhaustive, verify_with, Counterexample, DomainSizes, InsertionMode,
    ModeCount, VerificationReport,
};
