//! Exact solutions for special graph families, used as independent
//! oracles against the general solvers.
//!
//! Each family carries its own spec type with a `to_walk_graph`
//! constructor, so every closed-form value can be replayed through the
//! general machinery on the equivalent graph. The closed forms here never
//! run a linear solve; they evaluate the known rational structure of the
//! solutions directly (through the stable kernels, so the driftless case
//! needs no separate handling).

mod cycle;
mod line;
mod star;

pub use cycle::{cycle_report, CycleArc, CycleBarrier, CycleReport, CycleSpec};
pub use line::{two_mfb_arrivals, two_mfb_line_report, MfbParams, TwoMfbLineReport, TwoMfbLineSpec};
pub use star::{
    finite_star_absorbing_tips_time, finite_star_arrivals, infinite_star_report, FiniteRay,
    InfiniteRay, InfiniteStarReport, Ray, StarSpec,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("spec mismatch: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    Param(String),
}
