//! Expected visit counts: the barrier system and per-state evaluators.
//!
//! For a validated graph and a start position, the expected number of
//! arrivals `y_j` at each barrier (counting the start index and repeated
//! holds) solves a dense `(N+1) x (N+1)` linear system whose coefficients
//! are assembled from the kernel ratios in [`crate::kernels`]. Visit
//! counts `x_k` at interval and half-line states then follow in closed
//! form from the `y` values, so they are exposed as evaluators rather
//! than precomputed arrays (half-lines have infinitely many states).
//!
//! Visit counts on a half-line depend structurally on the drift: with
//! outward drift (`rho > 1`) the profile is flat beyond the start, with
//! inward or no drift it decays like `rho^k`. That split is the only
//! explicit case distinction left; the `rho = 1` limits emerge from the
//! kernels without branching.

use thiserror::Error;

use crate::graph::{BarrierId, GraphError, StartPosition, State, WalkGraph};
use crate::kernels::{
    geom_ratio, geom_sum, geom_tail, linear_solve, scaled_geom_sum, DenseSystem, SolveError,
};

/// Scaled clamp window for tiny negative solver outputs.
const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrivalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Singular(#[from] SolveError),
    /// A solution value violates a structural sign or range constraint by
    /// more than float noise; indicates an assembly bug, not bad input.
    #[error("internal consistency: {quantity} = {value} out of range")]
    Inconsistent { quantity: String, value: f64 },
}

/// Start reduced to its source form: a barrier start carries no edge
/// source, edge starts keep their interior position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Barrier(BarrierId),
    Interval {
        from: BarrierId,
        to: BarrierId,
        i0: usize,
    },
    HalfLine {
        owner: BarrierId,
        label: usize,
        i0: usize,
    },
}

fn reduce_start(graph: &WalkGraph, start: StartPosition) -> Result<Source, GraphError> {
    match start {
        StartPosition::AtBarrier(id) => {
            graph.get_barrier(id).ok_or(GraphError::UnknownBarrier(id))?;
            Ok(Source::Barrier(id))
        }
        StartPosition::OnInterval { from, to, position } => {
            let edge = graph
                .interval_between(from, to)
                .filter(|e| e.from == from && e.to == to)
                .ok_or(GraphError::UnknownInterval { from, to })?;
            let n = edge.interior_states;
            if position > n + 1 {
                return Err(GraphError::PositionOutOfRange {
                    start,
                    max: n + 1,
                });
            }
            Ok(if position == 0 {
                Source::Barrier(from)
            } else if position == n + 1 {
                Source::Barrier(to)
            } else {
                Source::Interval {
                    from,
                    to,
                    i0: position,
                }
            })
        }
        StartPosition::OnHalfLine {
            owner,
            label,
            position,
        } => {
            graph
                .half_line(owner, label)
                .ok_or(GraphError::UnknownHalfLine { owner, label })?;
            Ok(if position == 0 {
                Source::Barrier(owner)
            } else {
                Source::HalfLine {
                    owner,
                    label,
                    i0: position,
                }
            })
        }
    }
}

fn pw(rho: f64, k: usize) -> f64 {
    if k <= i32::MAX as usize {
        rho.powi(k as i32)
    } else {
        rho.powf(k as f64)
    }
}

/// The assembled barrier visit system `matrix * y = rhs`.
///
/// Column sums carry the absorption balance: for every barrier `j`,
/// `sum_i matrix[i][j] = -(absorb_j + sum of (1 - 1/rho) half-line entry
/// mass over escaping half-lines at j)`, and the right-hand side sums to
/// `-1` (or `-rho^(-i0)` for a start on an escaping half-line).
#[derive(Debug, Clone)]
pub struct ArrivalSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl ArrivalSystem {
    /// Solve for the barrier visit vector, clamping float-noise negatives
    /// to zero.
    pub fn solve(&self) -> Result<Vec<f64>, ArrivalError> {
        let system = DenseSystem::new(self.matrix.clone(), self.rhs.clone());
        let mut y = linear_solve(&system)?;
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for value in &mut y {
            if *value < 0.0 {
                if *value >= -NEGATIVE_TOLERANCE * scale {
                    *value = 0.0;
                } else {
                    return Err(ArrivalError::Inconsistent {
                        quantity: "barrier visit count".to_string(),
                        value: *value,
                    });
                }
            }
        }
        Ok(y)
    }
}

/// Assemble the visit system for a validated graph and start position.
///
/// Barrier starts are accepted directly; edge positions `0` and `n+1`
/// reduce to the adjacent barrier.
pub fn assemble(graph: &WalkGraph, start: StartPosition) -> Result<ArrivalSystem, GraphError> {
    let source = reduce_start(graph, start)?;
    Ok(assemble_reduced(graph, source))
}

fn assemble_reduced(graph: &WalkGraph, source: Source) -> ArrivalSystem {
    let count = graph.barrier_count();
    let mut matrix = vec![vec![0.0; count]; count];
    let mut rhs = vec![0.0; count];

    for barrier in &graph.barriers {
        let i = barrier.id.0;
        let mut diag = barrier.stay - 1.0;
        for hl in graph.half_lines_at(barrier.id) {
            let entry = barrier.half_line_move(hl.label);
            let rho = hl.rho();
            diag += if rho > 1.0 { entry / rho } else { entry };
        }
        matrix[i][i] = diag;
    }

    for edge in &graph.intervals {
        let (a, b) = (edge.from.0, edge.to.0);
        let rho = edge.rho();
        let n = edge.interior_states;
        let entry_a = graph.barriers[a].interval_move(edge.to);
        let entry_b = graph.barriers[b].interval_move(edge.from);
        matrix[b][a] += geom_tail(n, n + 1, rho) * entry_a;
        matrix[a][b] += geom_ratio(1, n + 1, rho) * entry_b;
        matrix[a][a] += geom_ratio(n, n + 1, rho) * entry_a;
        matrix[b][b] += rho * geom_ratio(n, n + 1, rho) * entry_b;
    }

    match source {
        Source::Barrier(c) => rhs[c.0] = -1.0,
        Source::Interval { from, to, i0 } => {
            let edge = graph.interval_between(from, to).expect("checked");
            let rho = edge.rho();
            let n = edge.interior_states;
            let frac = geom_ratio(n + 1 - i0, n + 1, rho);
            rhs[from.0] = -frac;
            rhs[to.0] = frac - 1.0;
        }
        Source::HalfLine { owner, label, i0 } => {
            let hl = graph.half_line(owner, label).expect("checked");
            let rho = hl.rho();
            rhs[owner.0] = if rho > 1.0 { -pw(rho, i0).recip() } else { -1.0 };
        }
    }

    ArrivalSystem { matrix, rhs }
}

/// Expected visit counts for one (graph, start) pair: the barrier vector
/// plus closed-form evaluators for every interval and half-line state.
#[derive(Debug, Clone)]
pub struct ArrivalProfile<'g> {
    graph: &'g WalkGraph,
    start: StartPosition,
    source: Source,
    visits: Vec<f64>,
}

impl<'g> ArrivalProfile<'g> {
    /// Assemble and solve for a validated graph.
    pub fn compute(graph: &'g WalkGraph, start: StartPosition) -> Result<Self, ArrivalError> {
        let source = reduce_start(graph, start)?;
        let system = assemble_reduced(graph, source);
        let visits = system.solve()?;
        Ok(Self {
            graph,
            start,
            source,
            visits,
        })
    }

    pub fn graph(&self) -> &'g WalkGraph {
        self.graph
    }

    pub fn start(&self) -> StartPosition {
        self.start
    }

    /// Expected arrivals per barrier, indexed by id.
    pub fn barrier_visits(&self) -> &[f64] {
        &self.visits
    }

    pub fn barrier_visit(&self, id: BarrierId) -> f64 {
        self.visits[id.0]
    }

    /// Expected visits to interior state `k` (`1..=n`) of the interval
    /// `[from, to]`.
    pub fn x_interval(&self, from: BarrierId, to: BarrierId, k: usize) -> Result<f64, GraphError> {
        let edge = self
            .graph
            .interval_between(from, to)
            .filter(|e| e.from == from && e.to == to)
            .ok_or(GraphError::UnknownInterval { from, to })?;
        let n = edge.interior_states;
        if k < 1 || k > n {
            return Err(GraphError::PositionOutOfRange {
                start: StartPosition::OnInterval {
                    from,
                    to,
                    position: k,
                },
                max: n,
            });
        }
        let rho = edge.rho();
        let (p, q) = (edge.p, edge.q);
        let entry_lo = self.graph.barrier(from).interval_move(to);
        let entry_hi = self.graph.barrier(to).interval_move(from);
        let y_lo = self.visits[from.0];
        let y_hi = self.visits[to.0];

        let mut x = geom_ratio(k, n + 1, rho) * (entry_hi / q) * y_hi
            + geom_tail(k, n + 1, rho) * (entry_lo / p) * y_lo;

        if let Source::Interval {
            from: c,
            to: d,
            i0,
        } = self.source
        {
            if c == from && d == to {
                // interior source: extra particular term, the two branch
                // forms agree at k = i0 and we use the k <= i0 one there;
                // factors are grouped so neither side overflows alone
                x += if k <= i0 {
                    if rho > 1.0 {
                        scaled_geom_sum(k, -(i0 as i64), rho) * geom_tail(i0, n + 1, rho) / q
                    } else {
                        geom_sum(k, rho) * geom_ratio(n + 1 - i0, n + 1, rho) / q
                    }
                } else if rho > 1.0 {
                    scaled_geom_sum(i0, -(i0 as i64), rho) * geom_tail(k, n + 1, rho) / q
                } else {
                    pw(rho, k - i0) * geom_sum(i0, rho) * geom_ratio(n + 1 - k, n + 1, rho) / q
                };
            }
        }
        Ok(x)
    }

    /// Expected visits to state `k >= 1` of the half-line
    /// `[owner, label)`.
    pub fn x_halfline(&self, owner: BarrierId, label: usize, k: usize) -> Result<f64, GraphError> {
        let hl = self
            .graph
            .half_line(owner, label)
            .ok_or(GraphError::UnknownHalfLine { owner, label })?;
        if k < 1 {
            return Err(GraphError::PositionOutOfRange {
                start: StartPosition::OnHalfLine {
                    owner,
                    label,
                    position: k,
                },
                max: usize::MAX,
            });
        }
        let rho = hl.rho();
        let (p, q) = (hl.p, hl.q);
        let entry = self.graph.barrier(owner).half_line_move(label);
        let y_owner = self.visits[owner.0];

        let started_here = matches!(
            self.source,
            Source::HalfLine { owner: c, label: l, .. } if c == owner && l == label
        );
        if started_here {
            let i0 = match self.source {
                Source::HalfLine { i0, .. } => i0,
                _ => unreachable!(),
            };
            if rho > 1.0 {
                let particular = scaled_geom_sum(k.min(i0), -(i0 as i64), rho) / q;
                Ok(particular + entry / p * y_owner)
            } else {
                let particular = if k <= i0 {
                    geom_sum(k, rho) / q
                } else {
                    pw(rho, k - i0) * geom_sum(i0, rho) / q
                };
                Ok(particular + entry * pw(rho, k) / p * y_owner)
            }
        } else if rho > 1.0 {
            Ok(entry / p * y_owner)
        } else {
            Ok(entry * pw(rho, k) / p * y_owner)
        }
    }

    /// Expected visits to any addressable state.
    pub fn state_visits(&self, state: &State) -> Result<f64, GraphError> {
        match *state {
            State::Barrier(b) => {
                self.graph
                    .get_barrier(b)
                    .ok_or(GraphError::UnknownBarrier(b))?;
                Ok(self.visits[b.0])
            }
            State::Interval { from, to, position } => self.x_interval(from, to, position),
            State::HalfLine {
                owner,
                label,
                position,
            } => self.x_halfline(owner, label, position),
        }
    }
}

fn start_of(state: &State) -> StartPosition {
    match *state {
        State::Barrier(b) => StartPosition::AtBarrier(b),
        State::Interval { from, to, position } => StartPosition::OnInterval {
            from,
            to,
            position,
        },
        State::HalfLine {
            owner,
            label,
            position,
        } => StartPosition::OnHalfLine {
            owner,
            label,
            position,
        },
    }
}

/// Probability of ever visiting `to` when starting in `from`: the ratio
/// of cross visits to self visits, each obtained from its own solve. The
/// denominator counts the start index, so it is at least one.
pub fn visit_probability(
    graph: &WalkGraph,
    from: &State,
    to: &State,
) -> Result<f64, ArrivalError> {
    graph.check_state(from)?;
    graph.check_state(to)?;
    if from == to {
        return Ok(1.0);
    }
    let profile_from = ArrivalProfile::compute(graph, start_of(from))?;
    let profile_to = ArrivalProfile::compute(graph, start_of(to))?;
    let cross = profile_from.state_visits(to)?;
    let own = profile_to.state_visits(to)?;
    let ratio = cross / own;
    if !(-1e-9..=1.0 + 1e-9).contains(&ratio) {
        return Err(ArrivalError::Inconsistent {
            quantity: format!("visit probability {from} -> {to}"),
            value: ratio,
        });
    }
    Ok(ratio.clamp(0.0, 1.0))
}
