//! Expected time before absorption, with explicit infinite-time
//! detection.
//!
//! Step counting: every transition costs one step, including holds at
//! edge states and barriers; the terminating absorption draw costs
//! nothing. Under this convention the expected times from the barriers
//! solve a dense linear system, and interval/half-line states follow in
//! closed form.
//!
//! If any half-line with positive entry probability has `rho >= 1` the
//! expected time is infinite everywhere: outward drift escapes with
//! positive probability, and the driftless case returns almost surely but
//! only after an excursion of infinite mean.

use thiserror::Error;

use crate::graph::{BarrierId, GraphError, StartPosition, WalkGraph};
use crate::kernels::{
    cum_geom_sum, exit_weight, geom_sum, linear_solve, weighted_geom, DenseSystem, SolveError,
};

const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Singular(#[from] SolveError),
    /// Requested a time that the report declares infinite.
    #[error("expected time is infinite: {reason}")]
    Infinite { reason: String },
    #[error("internal consistency: {quantity} = {value} out of range")]
    Inconsistent { quantity: String, value: f64 },
}

#[derive(Debug, Clone)]
enum Kind {
    Finite { barrier_times: Vec<f64> },
    Infinite { owner: BarrierId, label: usize, rho: f64 },
}

/// Expected absorption times for a graph: per-barrier values plus
/// evaluators for interval and half-line states, or an explicit infinite
/// marker naming the offending half-line.
#[derive(Debug, Clone)]
pub struct TimeReport<'g> {
    graph: &'g WalkGraph,
    kind: Kind,
}

impl<'g> TimeReport<'g> {
    /// Assemble and solve the barrier time system for a validated graph.
    pub fn compute(graph: &'g WalkGraph) -> Result<Self, TimeError> {
        if let Some(hl) = graph
            .half_lines
            .iter()
            .filter(|h| graph.barrier(h.owner).half_line_move(h.label) > 0.0 && h.rho() >= 1.0)
            .min_by_key(|h| (h.owner, h.label))
        {
            return Ok(Self {
                graph,
                kind: Kind::Infinite {
                    owner: hl.owner,
                    label: hl.label,
                    rho: hl.rho(),
                },
            });
        }

        let count = graph.barrier_count();
        let mut matrix = vec![vec![0.0; count]; count];
        let mut rhs = vec![0.0; count];

        for barrier in &graph.barriers {
            let i = barrier.id.0;
            let mut diag = barrier.stay - 1.0;
            let mut lambda = -(1.0 - barrier.absorb);
            for hl in graph.half_lines_at(barrier.id) {
                let entry = barrier.half_line_move(hl.label);
                if entry == 0.0 {
                    continue;
                }
                diag += entry;
                lambda -= entry / (hl.q - hl.p);
            }
            matrix[i][i] = diag;
            rhs[i] = lambda;
        }

        for edge in &graph.intervals {
            let (a, b) = (edge.from.0, edge.to.0);
            let rho = edge.rho();
            let n = edge.interior_states;
            let g_full = geom_sum(n + 1, rho);
            let g_inner = geom_sum(n, rho);
            let entry_a = graph.barriers[a].interval_move(edge.to);
            let entry_b = graph.barriers[b].interval_move(edge.from);
            matrix[a][b] += rho.powi(n as i32) / g_full * entry_a;
            matrix[b][a] += entry_b / g_full;
            matrix[a][a] += g_inner / g_full * entry_a;
            matrix[b][b] += rho * g_inner / g_full * entry_b;
            rhs[a] -= entry_a * weighted_geom(n, rho) / (edge.q * g_full);
            rhs[b] -= entry_b * cum_geom_sum(n, rho) / (edge.q * g_full);
        }

        let mut barrier_times = linear_solve(&DenseSystem::new(matrix, rhs))?;
        let scale = barrier_times.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for value in &mut barrier_times {
            if *value < 0.0 {
                if *value >= -NEGATIVE_TOLERANCE * scale {
                    *value = 0.0;
                } else {
                    return Err(TimeError::Inconsistent {
                        quantity: "barrier absorption time".to_string(),
                        value: *value,
                    });
                }
            }
        }
        Ok(Self {
            graph,
            kind: Kind::Finite { barrier_times },
        })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Finite { .. })
    }

    /// Why the report is infinite, when it is.
    pub fn infinite_reason(&self) -> Option<String> {
        match &self.kind {
            Kind::Finite { .. } => None,
            Kind::Infinite { owner, label, rho } => Some(format!(
                "half-line [{owner},{label}) has drift ratio {rho} >= 1 with positive entry probability"
            )),
        }
    }

    /// Expected times from the barriers, when finite.
    pub fn barrier_times(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Finite { barrier_times } => Some(barrier_times),
            Kind::Infinite { .. } => None,
        }
    }

    fn finite_times(&self) -> Result<&[f64], TimeError> {
        match &self.kind {
            Kind::Finite { barrier_times } => Ok(barrier_times),
            Kind::Infinite { .. } => Err(TimeError::Infinite {
                reason: self.infinite_reason().unwrap(),
            }),
        }
    }

    /// Expected time from position `k` (`0..=n+1`, endpoints are the
    /// barriers) on the interval `[from, to]`.
    pub fn m_interval(&self, from: BarrierId, to: BarrierId, k: usize) -> Result<f64, TimeError> {
        let times = self.finite_times()?;
        let edge = self
            .graph
            .interval_between(from, to)
            .filter(|e| e.from == from && e.to == to)
            .ok_or(GraphError::UnknownInterval { from, to })?;
        let n = edge.interior_states;
        if k > n + 1 {
            return Err(TimeError::Graph(GraphError::PositionOutOfRange {
                start: StartPosition::OnInterval {
                    from,
                    to,
                    position: k,
                },
                max: n + 1,
            }));
        }
        let rho = edge.rho();
        let g_full = geom_sum(n + 1, rho);
        let value = geom_sum(n + 1 - k, rho) / g_full * times[from.0]
            + rho.powi((n + 1 - k) as i32) * geom_sum(k, rho) / g_full * times[to.0]
            + exit_weight(n + 1 - k, k, rho) / (edge.q * g_full);
        Ok(value)
    }

    /// Expected time from position `k >= 0` on the half-line
    /// `[owner, label)`; requires inward drift for `k >= 1`.
    pub fn m_halfline(&self, owner: BarrierId, label: usize, k: usize) -> Result<f64, TimeError> {
        let times = self.finite_times()?;
        let hl = self
            .graph
            .half_line(owner, label)
            .ok_or(GraphError::UnknownHalfLine { owner, label })?;
        if k == 0 {
            return Ok(times[owner.0]);
        }
        if hl.rho() >= 1.0 {
            return Err(TimeError::Infinite {
                reason: format!(
                    "half-line [{owner},{label}) has drift ratio {} >= 1",
                    hl.rho()
                ),
            });
        }
        Ok(times[owner.0] + k as f64 / (hl.q - hl.p))
    }

    /// Expected time from an arbitrary start position.
    pub fn time_from(&self, start: StartPosition) -> Result<f64, TimeError> {
        let times = self.finite_times()?;
        match start {
            StartPosition::AtBarrier(b) => self
                .graph
                .get_barrier(b)
                .map(|_| times[b.0])
                .ok_or(TimeError::Graph(GraphError::UnknownBarrier(b))),
            StartPosition::OnInterval { from, to, position } => {
                self.m_interval(from, to, position)
            }
            StartPosition::OnHalfLine {
                owner,
                label,
                position,
            } => self.m_halfline(owner, label, position),
        }
    }
}
