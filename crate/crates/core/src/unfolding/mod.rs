//! Cost-directed unfolding of synchronous products.

pub mod invariants;
pub mod process;
pub mod search;

pub use process::{BranchingProcess, CondId, Condition, EventId, EventStatus, UnfEvent};
pub use search::{extract_alignment, unfold_align, unfold_align_with, UnfoldOptions, UnfoldRun, UnfoldVariant};
