//! Random walks on graphs built from multiple-function barriers, finite
//! interval edges, and infinite half-lines.
//!
//! A *multiple-function barrier* is a vertex that can absorb the walker,
//! hold it in place, or route it onto an incident edge, each with its own
//! probability. Between two barriers an interval edge carries a finite
//! birth-death walk; a half-line carries a one-ended infinite walk whose
//! topological end can swallow the walker when the drift points outward.
//!
//! The crate computes, in closed form:
//!
//! - expected visit counts for every barrier and every edge state
//!   ([`arrival`]),
//! - absorption probabilities at barriers and at half-line ends
//!   ([`absorption`]),
//! - expected times to absorption, with explicit infinite-time detection
//!   ([`time`]),
//!
//! and cross-validates all of it two independent ways: against the exact
//! solutions known for star graphs, cycle graphs, and the integer line
//! ([`closed_form`]), and against a deterministic, parallel trajectory
//! simulator ([`sim`]).
//!
//! Graphs can be described in a small JSON format ([`document`]) consumed
//! by the `barrier-walk` command-line tool; see the `examples/` directory
//! for library usage, one runnable example per capability.

pub mod absorption;
pub mod arrival;
pub mod closed_form;
pub mod demo;
pub mod document;
pub mod graph;
pub mod kernels;
pub mod report;
pub mod sim;
pub mod time;

pub use absorption::{lemma1_profile, AbsorptionError, AbsorptionReport, Lemma1Profile};
pub use arrival::{visit_probability, ArrivalProfile, ArrivalSystem};
pub use document::{DocumentError, GraphDocument};
pub use graph::{
    normalize_start, validate, Barrier, BarrierId, GraphError, HalfLine, IntervalEdge,
    StartPosition, State, Validation, Violation, WalkGraph,
};
pub use kernels::{geom_sum, linear_solve, weighted_geom, DenseSystem, SolveError};
pub use sim::{simulate, SimConfig, SimError, SimEstimate, SimReport};
pub use time::{TimeError, TimeReport};
