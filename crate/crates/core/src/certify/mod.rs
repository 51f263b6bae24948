//! Signed-conjugate certificates: construction and verification.
//!
//! A [`Certificate`] lists factors `g_i · base^{±1} · g_i*` whose ordered
//! product equals the target up to a global phase. Construction goes
//! through [`certify_diag`] and [`certify_calkin`]; [`verify()`] checks a
//! certificate without reference to how it was built.

mod bound;
mod certificate;
mod infsim;
mod pipeline;
mod plan;
mod verify;

pub use bound::{ng_bound, ng_bound_from_length, NgMode};
pub use certificate::{Certificate, Factor, Meta, Mode, Operand, Pipeline, Sign};
pub use infsim::infsim_generate;
pub use pipeline::{
    calkin_multiplier, certify_calkin, certify_calkin_with, certify_diag, BALANCED_CONSTANT, DEFAULT_TRUNCATION,
    SPLIT_CONSTANT,
};
pub use plan::{arrange_gap_blocks, BlockPlan};
pub use verify::{verify, verify_with, Failure, FailureClass, Report, VerifyOptions, WorstFactor};
