//! JSON graph documents: the on-disk format consumed by the CLI.
//!
//! Top-level keys are `barriers`, `intervals`, `half_lines` and `start`.
//! Unknown keys are rejected. Numbers are plain JSON doubles; serializing
//! uses the shortest representation that round-trips the exact value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Barrier, HalfLine, IntervalEdge, StartPosition, WalkGraph};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierDoc {
    pub id: usize,
    pub stay: f64,
    pub absorb: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moves: Vec<MoveDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub half_line_moves: Vec<HalfLineMoveDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveDoc {
    pub to_barrier: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineMoveDoc {
    pub label: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub from: usize,
    pub to: usize,
    pub interior_states: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineDoc {
    pub owner: usize,
    pub label: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum StartDoc {
    #[serde(rename = "barrier")]
    Barrier { id: usize },
    #[serde(rename = "interval")]
    Interval {
        from: usize,
        to: usize,
        position: usize,
    },
    #[serde(rename = "half_line")]
    HalfLine {
        owner: usize,
        label: usize,
        position: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub barriers: Vec<BarrierDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<IntervalDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub half_lines: Vec<HalfLineDoc>,
    pub start: StartDoc,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization cannot fail")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, DocumentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Build the graph and start position. Barriers are ordered by id;
    /// duplicate move entries accumulate. Model rules are checked
    /// separately by [`crate::graph::validate`].
    pub fn to_graph(&self) -> (WalkGraph, StartPosition) {
        let mut barriers: Vec<Barrier> = self
            .barriers
            .iter()
            .map(|doc| {
                let mut barrier = Barrier::new(doc.id, doc.stay, doc.absorb);
                for mv in &doc.moves {
                    *barrier
                        .interval_moves
                        .entry(crate::graph::BarrierId(mv.to_barrier))
                        .or_insert(0.0) += mv.prob;
                }
                for mv in &doc.half_line_moves {
                    *barrier.half_line_moves.entry(mv.label).or_insert(0.0) += mv.prob;
                }
                barrier
            })
            .collect();
        barriers.sort_by_key(|b| b.id);
        let intervals = self
            .intervals
            .iter()
            .map(|doc| IntervalEdge::new(doc.from, doc.to, doc.interior_states, doc.p, doc.q))
            .collect();
        let half_lines = self
            .half_lines
            .iter()
            .map(|doc| HalfLine::new(doc.owner, doc.label, doc.p, doc.q))
            .collect();
        let start = match self.start {
            StartDoc::Barrier { id } => StartPosition::at_barrier(id),
            StartDoc::Interval { from, to, position } => {
                StartPosition::on_interval(from, to, position)
            }
            StartDoc::HalfLine {
                owner,
                label,
                position,
            } => StartPosition::on_half_line(owner, label, position),
        };
        (WalkGraph::new(barriers, intervals, half_lines), start)
    }

    pub fn from_graph(graph: &WalkGraph, start: StartPosition) -> Self {
        let barriers = graph
            .barriers
            .iter()
            .map(|b| BarrierDoc {
                id: b.id.0,
                stay: b.stay,
                absorb: b.absorb,
                moves: b
                    .interval_moves
                    .iter()
                    .map(|(&to, &prob)| MoveDoc {
                        to_barrier: to.0,
                        prob,
                    })
                    .collect(),
                half_line_moves: b
                    .half_line_moves
                    .iter()
                    .map(|(&label, &prob)| HalfLineMoveDoc { label, prob })
                    .collect(),
            })
            .collect();
        let intervals = graph
            .intervals
            .iter()
            .map(|e| IntervalDoc {
                from: e.from.0,
                to: e.to.0,
                interior_states: e.interior_states,
                p: e.p,
                q: e.q,
            })
            .collect();
        let half_lines = graph
            .half_lines
            .iter()
            .map(|h| HalfLineDoc {
                owner: h.owner.0,
                label: h.label,
                p: h.p,
                q: h.q,
            })
            .collect();
        let start = match start {
            StartPosition::AtBarrier(id) => StartDoc::Barrier { id: id.0 },
            StartPosition::OnInterval { from, to, position } => StartDoc::Interval {
                from: from.0,
                to: to.0,
                position,
            },
            StartPosition::OnHalfLine {
                owner,
                label,
                position,
            } => StartDoc::HalfLine {
                owner: owner.0,
                label,
                position,
            },
        };
        GraphDocument {
            barriers,
            intervals,
            half_lines,
            start,
        }
    }
}
