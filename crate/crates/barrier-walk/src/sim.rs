//! Trajectory simulation: the stochastic cross-check for every analytic
//! quantity.
//!
//! Dynamics follow the model exactly: each occupied time index (including
//! index 0) adds one visit count to the occupied state; every transition,
//! holds included, costs one step; a terminating absorption draw costs
//! nothing.
//!
//! Half-lines are truncated at `truncation_depth`: a walker stepping onto
//! that position immediately resolves the whole excursion with a single
//! Bernoulli draw on the exact first-passage return probability
//! `min(1, q/p)` — back to `depth - 1` on success, swallowed by the end
//! on failure. Visit counts below the depth and absorption outcomes are
//! therefore exact; only elapsed time inside the excursion is lost, so
//! the time estimate carries a reliability flag that clears only when no
//! truncation event and no censoring occurred.
//!
//! Trajectory `t` draws from an RNG stream derived from `(seed, t)`
//! alone, and partial sums are combined in a fixed batch order, so
//! reports are bit-identical across runs and thread counts.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{BarrierId, GraphError, StartPosition, State, WalkGraph};

/// Trajectories per deterministic aggregation batch; fixed so that the
/// combination order never depends on thread count.
const BATCH: u64 = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("configuration: {0}")]
    Config(String),
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub trajectories: u64,
    /// Trajectories running longer than this many steps are censored.
    pub step_cap: u64,
    /// Half-line distance at which first-passage resampling applies;
    /// must exceed every tracked half-line position and any half-line
    /// start position.
    pub truncation_depth: usize,
    pub seed: u64,
    /// States whose visit counts are estimated.
    pub tracked_states: Vec<State>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trajectories: 100_000,
            step_cap: 1_000_000,
            truncation_depth: 128,
            seed: 0,
            tracked_states: Vec::new(),
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

impl SimEstimate {
    fn from_sums(sum: f64, sumsq: f64, n: u64) -> Self {
        let count = n;
        let n = n as f64;
        let mean = sum / n;
        let var = if count > 1 {
            ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
            count,
        }
    }

    /// Absolute z-score of an analytic value against this estimate; zero
    /// deviation counts as zero even when the spread is zero.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let diff = (analytic - self.mean).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

/// Aggregated simulation output.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub trajectories: u64,
    /// Visit-count estimate per barrier.
    pub barrier_visits: Vec<SimEstimate>,
    /// Visit-count estimate per tracked state, in config order.
    pub state_visits: Vec<(State, SimEstimate)>,
    /// Absorption frequency per barrier.
    pub absorbed_at_barrier: Vec<SimEstimate>,
    /// Escape frequency per outward-drift half-line end.
    pub absorbed_at_end: BTreeMap<(BarrierId, usize), SimEstimate>,
    /// Steps before absorption, over all trajectories.
    pub time: SimEstimate,
    /// True when no censoring and no truncation event occurred, i.e. the
    /// time estimate is unbiased.
    pub time_reliable: bool,
    pub censored_fraction: f64,
    /// Number of trajectories that hit the truncation depth at least once.
    pub truncated_trajectories: u64,
}

// Compiled flat representation for the hot loop.

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Barrier(usize),
    Edge { e: usize, k: usize },
    Half { h: usize, k: usize },
}

enum MoveTarget {
    Edge { e: usize, k: usize },
    Half { h: usize },
}

struct CBarrier {
    absorb: f64,
    hold_end: f64,
    // cumulative upper bounds paired with targets, in id/label order
    moves: Vec<(f64, MoveTarget)>,
}

struct CEdge {
    p: f64,
    pq: f64,
    n: usize,
    lo: usize,
    hi: usize,
}

struct CHalf {
    p: f64,
    pq: f64,
    owner: usize,
    return_prob: f64,
    end_slot: Option<usize>,
}

struct Compiled {
    barriers: Vec<CBarrier>,
    edges: Vec<CEdge>,
    halves: Vec<CHalf>,
    ends: Vec<(BarrierId, usize)>,
    tracked: Vec<Pos>,
    start: Pos,
    depth: usize,
    step_cap: u64,
}

#[derive(Clone)]
struct Accum {
    visit_sum: Vec<f64>,
    visit_sumsq: Vec<f64>,
    tracked_sum: Vec<f64>,
    tracked_sumsq: Vec<f64>,
    absorbed: Vec<f64>,
    escaped: Vec<f64>,
    time_sum: f64,
    time_sumsq: f64,
    censored: u64,
    truncated: u64,
}

impl Accum {
    fn new(nb: usize, nt: usize, ne: usize) -> Self {
        Self {
            visit_sum: vec![0.0; nb],
            visit_sumsq: vec![0.0; nb],
            tracked_sum: vec![0.0; nt],
            tracked_sumsq: vec![0.0; nt],
            absorbed: vec![0.0; nb],
            escaped: vec![0.0; ne],
            time_sum: 0.0,
            time_sumsq: 0.0,
            censored: 0,
            truncated: 0,
        }
    }

    fn merge(&mut self, other: &Accum) {
        for (a, b) in self.visit_sum.iter_mut().zip(&other.visit_sum) {
            *a += b;
        }
        for (a, b) in self.visit_sumsq.iter_mut().zip(&other.visit_sumsq) {
            *a += b;
        }
        for (a, b) in self.tracked_sum.iter_mut().zip(&other.tracked_sum) {
            *a += b;
        }
        for (a, b) in self.tracked_sumsq.iter_mut().zip(&other.tracked_sumsq) {
            *a += b;
        }
        for (a, b) in self.absorbed.iter_mut().zip(&other.absorbed) {
            *a += b;
        }
        for (a, b) in self.escaped.iter_mut().zip(&other.escaped) {
            *a += b;
        }
        self.time_sum += other.time_sum;
        self.time_sumsq += other.time_sumsq;
        self.censored += other.censored;
        self.truncated += other.truncated;
    }
}

fn compile(graph: &WalkGraph, start: StartPosition, config: &SimConfig) -> Result<Compiled, SimError> {
    if config.trajectories == 0 {
        return Err(SimError::Config("need at least one trajectory".into()));
    }
    if config.step_cap == 0 {
        return Err(SimError::Config("step cap must be positive".into()));
    }
    if config.truncation_depth < 2 {
        return Err(SimError::Config(
            "truncation depth must be at least 2".into(),
        ));
    }

    let edge_index = |from: BarrierId, to: BarrierId| -> Option<usize> {
        graph
            .intervals
            .iter()
            .position(|e| e.from == from && e.to == to)
    };
    let half_index = |owner: BarrierId, label: usize| -> Option<usize> {
        graph
            .half_lines
            .iter()
            .position(|h| h.owner == owner && h.label == label)
    };

    let ends = graph.escaping_ends();
    let halves = graph
        .half_lines
        .iter()
        .map(|h| CHalf {
            p: h.p,
            pq: h.p + h.q,
            owner: h.owner.0,
            return_prob: (h.q / h.p).min(1.0),
            end_slot: ends.iter().position(|&(o, l)| o == h.owner && l == h.label),
        })
        .collect();
    let edges = graph
        .intervals
        .iter()
        .map(|e| CEdge {
            p: e.p,
            pq: e.p + e.q,
            n: e.interior_states,
            lo: e.from.0,
            hi: e.to.0,
        })
        .collect();

    let mut barriers = Vec::with_capacity(graph.barrier_count());
    for b in &graph.barriers {
        let mut cum = b.absorb + b.stay;
        let hold_end = cum;
        let mut moves = Vec::new();
        for (&to, &prob) in &b.interval_moves {
            let e = edge_index(b.id.min(to), b.id.max(to))
                .ok_or(GraphError::UnknownInterval { from: b.id, to })?;
            let k = if graph.intervals[e].from == b.id {
                1
            } else {
                graph.intervals[e].interior_states
            };
            cum += prob;
            moves.push((cum, MoveTarget::Edge { e, k }));
        }
        for (&label, &prob) in &b.half_line_moves {
            let h = half_index(b.id, label).ok_or(GraphError::UnknownHalfLine {
                owner: b.id,
                label,
            })?;
            cum += prob;
            moves.push((cum, MoveTarget::Half { h }));
        }
        barriers.push(CBarrier {
            absorb: b.absorb,
            hold_end,
            moves,
        });
    }

    let depth = config.truncation_depth;
    let to_pos = |state: &State| -> Result<Pos, SimError> {
        graph.check_state(state)?;
        Ok(match *state {
            State::Barrier(b) => Pos::Barrier(b.0),
            State::Interval { from, to, position } => Pos::Edge {
                e: edge_index(from, to).expect("checked"),
                k: position,
            },
            State::HalfLine {
                owner,
                label,
                position,
            } => {
                if position >= depth {
                    return Err(SimError::Config(format!(
                        "tracked state {state} lies at or beyond the truncation depth {depth}"
                    )));
                }
                Pos::Half {
                    h: half_index(owner, label).expect("checked"),
                    k: position,
                }
            }
        })
    };
    let tracked = config
        .tracked_states
        .iter()
        .map(to_pos)
        .collect::<Result<Vec<_>, _>>()?;

    let start_pos = match start {
        StartPosition::AtBarrier(b) => {
            graph
                .get_barrier(b)
                .ok_or(GraphError::UnknownBarrier(b))?;
            Pos::Barrier(b.0)
        }
        StartPosition::OnInterval { from, to, position } => {
            let e = edge_index(from, to).ok_or(GraphError::UnknownInterval { from, to })?;
            let n = graph.intervals[e].interior_states;
            if position > n + 1 {
                return Err(SimError::Graph(GraphError::PositionOutOfRange {
                    start,
                    max: n + 1,
                }));
            }
            if position == 0 {
                Pos::Barrier(from.0)
            } else if position == n + 1 {
                Pos::Barrier(to.0)
            } else {
                Pos::Edge { e, k: position }
            }
        }
        StartPosition::OnHalfLine {
            owner,
            label,
            position,
        } => {
            let h = half_index(owner, label).ok_or(GraphError::UnknownHalfLine { owner, label })?;
            if position >= depth {
                return Err(SimError::Config(format!(
                    "start position {position} on half-line [{owner},{label}) \
                     lies at or beyond the truncation depth {depth}"
                )));
            }
            if position == 0 {
                Pos::Barrier(owner.0)
            } else {
                Pos::Half { h, k: position }
            }
        }
    };

    Ok(Compiled {
        barriers,
        edges,
        halves,
        ends,
        tracked,
        start: start_pos,
        depth,
        step_cap: config.step_cap,
    })
}

enum Outcome {
    AbsorbedBarrier(usize),
    Escaped(usize),
    Censored,
}

fn run_trajectory(c: &Compiled, rng: &mut ChaCha8Rng, acc: &mut Accum, scratch: &mut Scratch) {
    scratch.reset();
    let mut pos = c.start;
    let mut steps: u64 = 0;
    let mut truncated = false;

    let outcome = loop {
        // occupancy of the state at the current time index
        match pos {
            Pos::Barrier(b) => scratch.visits[b] += 1,
            _ => {
                for (slot, t) in c.tracked.iter().enumerate() {
                    if *t == pos {
                        scratch.tracked[slot] += 1;
                    }
                }
            }
        }

        match pos {
            Pos::Barrier(b) => {
                let barrier = &c.barriers[b];
                let u: f64 = rng.random();
                if u < barrier.absorb {
                    break Outcome::AbsorbedBarrier(b);
                }
                if steps == c.step_cap {
                    break Outcome::Censored;
                }
                steps += 1;
                if u >= barrier.hold_end {
                    let mut chosen = barrier.moves.last();
                    for entry in &barrier.moves {
                        if u < entry.0 {
                            chosen = Some(entry);
                            break;
                        }
                    }
                    match chosen {
                        Some((_, MoveTarget::Edge { e, k })) => pos = Pos::Edge { e: *e, k: *k },
                        Some((_, MoveTarget::Half { h })) => pos = Pos::Half { h: *h, k: 1 },
                        // hold when the distribution has no moves and the
                        // draw landed in float dust past the hold mass
                        None => {}
                    }
                }
            }
            Pos::Edge { e, k } => {
                if steps == c.step_cap {
                    break Outcome::Censored;
                }
                steps += 1;
                let edge = &c.edges[e];
                let u: f64 = rng.random();
                if u < edge.p {
                    pos = if k == edge.n {
                        Pos::Barrier(edge.hi)
                    } else {
                        Pos::Edge { e, k: k + 1 }
                    };
                } else if u < edge.pq {
                    pos = if k == 1 {
                        Pos::Barrier(edge.lo)
                    } else {
                        Pos::Edge { e, k: k - 1 }
                    };
                }
            }
            Pos::Half { h, k } => {
                if steps == c.step_cap {
                    break Outcome::Censored;
                }
                steps += 1;
                let half = &c.halves[h];
                let u: f64 = rng.random();
                if u < half.p {
                    if k + 1 == c.depth {
                        // resolve the whole excursion above depth-1 with
                        // one first-passage draw
                        truncated = true;
                        let v: f64 = rng.random();
                        if v < half.return_prob {
                            pos = Pos::Half { h, k: c.depth - 1 };
                        } else {
                            break Outcome::Escaped(
                                half.end_slot.expect("only outward drift escapes"),
                            );
                        }
                    } else {
                        pos = Pos::Half { h, k: k + 1 };
                    }
                } else if u < half.pq {
                    pos = if k == 1 {
                        Pos::Barrier(half.owner)
                    } else {
                        Pos::Half { h, k: k - 1 }
                    };
                }
            }
        }
    };

    for (i, &v) in scratch.visits.iter().enumerate() {
        let v = v as f64;
        acc.visit_sum[i] += v;
        acc.visit_sumsq[i] += v * v;
    }
    for (i, &v) in scratch.tracked.iter().enumerate() {
        let v = v as f64;
        acc.tracked_sum[i] += v;
        acc.tracked_sumsq[i] += v * v;
    }
    match outcome {
        Outcome::AbsorbedBarrier(b) => acc.absorbed[b] += 1.0,
        Outcome::Escaped(slot) => acc.escaped[slot] += 1.0,
        Outcome::Censored => acc.censored += 1,
    }
    let t = steps as f64;
    acc.time_sum += t;
    acc.time_sumsq += t * t;
    if truncated {
        acc.truncated += 1;
    }
}

struct Scratch {
    visits: Vec<u64>,
    tracked: Vec<u64>,
}

impl Scratch {
    fn reset(&mut self) {
        self.visits.iter_mut().for_each(|v| *v = 0);
        self.tracked.iter_mut().for_each(|v| *v = 0);
    }
}

/// Run the simulation. Same (graph, start, config) means bit-identical
/// output, independent of thread count.
pub fn simulate(
    graph: &WalkGraph,
    start: StartPosition,
    config: &SimConfig,
) -> Result<SimReport, SimError> {
    let compiled = compile(graph, start, config)?;
    let nb = compiled.barriers.len();
    let nt = compiled.tracked.len();
    let ne = compiled.ends.len();
    let total = config.trajectories;
    let batches = total.div_ceil(BATCH);

    let partials: Vec<Accum> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut acc = Accum::new(nb, nt, ne);
            let mut scratch = Scratch {
                visits: vec![0; nb],
                tracked: vec![0; nt],
            };
            let lo = batch * BATCH;
            let hi = ((batch + 1) * BATCH).min(total);
            for t in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(t);
                run_trajectory(&compiled, &mut rng, &mut acc, &mut scratch);
            }
            acc
        })
        .collect();

    let mut acc = Accum::new(nb, nt, ne);
    for partial in &partials {
        acc.merge(partial);
    }

    let barrier_visits = (0..nb)
        .map(|i| SimEstimate::from_sums(acc.visit_sum[i], acc.visit_sumsq[i], total))
        .collect();
    let state_visits = config
        .tracked_states
        .iter()
        .cloned()
        .zip(
            (0..nt).map(|i| SimEstimate::from_sums(acc.tracked_sum[i], acc.tracked_sumsq[i], total)),
        )
        .collect();
    let absorbed_at_barrier = (0..nb)
        .map(|i| {
            let s = acc.absorbed[i];
            SimEstimate::from_sums(s, s, total)
        })
        .collect();
    let absorbed_at_end = compiled
        .ends
        .iter()
        .enumerate()
        .map(|(slot, &end)| {
            let s = acc.escaped[slot];
            (end, SimEstimate::from_sums(s, s, total))
        })
        .collect();
    let time = SimEstimate::from_sums(acc.time_sum, acc.time_sumsq, total);

    Ok(SimReport {
        trajectories: total,
        barrier_visits,
        state_visits,
        absorbed_at_barrier,
        absorbed_at_end,
        time,
        time_reliable: acc.censored == 0 && acc.truncated == 0,
        censored_fraction: acc.censored as f64 / total as f64,
        truncated_trajectories: acc.truncated,
    })
}
