//! Shared oracle machinery for the integration suites: an independent
//! brute-force absorbing-chain solver, balance-residual checkers, a
//! battery of reference graphs, and seeded random instance generators.

#![allow(dead_code)]

use std::collections::BTreeMap;

use barrier_walk::arrival::ArrivalProfile;
use barrier_walk::graph::{Barrier, BarrierId, HalfLine, IntervalEdge, StartPosition, WalkGraph};
use barrier_walk::time::TimeReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TIGHT: f64 = 1e-10;
pub const ANALYTIC: f64 = 1e-9;
pub const SIGMA: f64 = 4.0;

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = 1.0 + expected.abs().max(actual.abs());
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{what}: {actual} vs {expected} (tol {tol})"
    );
}

/// Plain Gaussian elimination with partial pivoting, local to the test
/// suite so the oracle shares nothing with the library's solver.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        assert!(a[col][col].abs() > 1e-13, "oracle system singular");
        let (pivot_rows, below) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let b_pivot = b[col];
        for (offset, row) in below.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for (k, entry) in row.iter_mut().enumerate().skip(col) {
                    *entry -= f * pivot_row[k];
                }
                b[col + 1 + offset] -= f * b_pivot;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for (k, xv) in x.iter().enumerate().skip(row + 1) {
            acc -= a[row][k] * xv;
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Enumerated transient state of a truncated chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChainState {
    Barrier(usize),
    Interval { edge: usize, k: usize },
    Half { line: usize, k: usize },
}

/// Brute-force absorbing-chain oracle over a walk graph. Half-lines are
/// truncated at `depth`; stepping beyond is treated as leaving the chain
/// (exact for outward drift at large depth, a controlled leak otherwise),
/// so use a depth that makes the truncated mass negligible.
pub struct BruteChain {
    states: Vec<ChainState>,
    index: BTreeMap<ChainState, usize>,
    /// transition[i] = (target, probability); absorbing mass is the
    /// deficit.
    transitions: Vec<Vec<(usize, f64)>>,
    /// probability of absorbing at each barrier, per state
    absorb_barrier: Vec<Vec<f64>>,
    /// probability of leaving through the truncation point of each line
    truncate_mass: Vec<Vec<f64>>,
    lines: usize,
}

impl BruteChain {
    pub fn new(graph: &WalkGraph, depth: usize) -> Self {
        let mut states = Vec::new();
        for b in &graph.barriers {
            states.push(ChainState::Barrier(b.id.0));
        }
        for (edge, e) in graph.intervals.iter().enumerate() {
            for k in 1..=e.interior_states {
                states.push(ChainState::Interval { edge, k });
            }
        }
        for (line, _) in graph.half_lines.iter().enumerate() {
            for k in 1..=depth {
                states.push(ChainState::Half { line, k });
            }
        }
        let index: BTreeMap<ChainState, usize> =
            states.iter().enumerate().map(|(i, s)| (*s, i)).collect();

        let nb = graph.barrier_count();
        let nl = graph.half_lines.len();
        let mut transitions = vec![Vec::new(); states.len()];
        let mut absorb_barrier = vec![vec![0.0; nb]; states.len()];
        let mut truncate_mass = vec![vec![0.0; nl]; states.len()];

        for (i, state) in states.iter().enumerate() {
            match *state {
                ChainState::Barrier(b) => {
                    let barrier = &graph.barriers[b];
                    absorb_barrier[i][b] = barrier.absorb;
                    if barrier.stay > 0.0 {
                        transitions[i].push((i, barrier.stay));
                    }
                    for (&to, &prob) in &barrier.interval_moves {
                        let edge = graph
                            .intervals
                            .iter()
                            .position(|e| e.touches(BarrierId(b)) && e.touches(to))
                            .expect("validated move");
                        let e = &graph.intervals[edge];
                        let k = if e.from.0 == b { 1 } else { e.interior_states };
                        transitions[i].push((index[&ChainState::Interval { edge, k }], prob));
                    }
                    for (&label, &prob) in &barrier.half_line_moves {
                        let line = graph
                            .half_lines
                            .iter()
                            .position(|h| h.owner.0 == b && h.label == label)
                            .expect("validated move");
                        transitions[i].push((index[&ChainState::Half { line, k: 1 }], prob));
                    }
                }
                ChainState::Interval { edge, k } => {
                    let e = &graph.intervals[edge];
                    let up = if k == e.interior_states {
                        index[&ChainState::Barrier(e.to.0)]
                    } else {
                        index[&ChainState::Interval { edge, k: k + 1 }]
                    };
                    let down = if k == 1 {
                        index[&ChainState::Barrier(e.from.0)]
                    } else {
                        index[&ChainState::Interval { edge, k: k - 1 }]
                    };
                    transitions[i].push((up, e.p));
                    transitions[i].push((down, e.q));
                    if e.r() > 0.0 {
                        transitions[i].push((i, e.r()));
                    }
                }
                ChainState::Half { line, k } => {
                    let h = &graph.half_lines[line];
                    if k == depth {
                        truncate_mass[i][line] = h.p;
                    } else {
                        transitions[i].push((index[&ChainState::Half { line, k: k + 1 }], h.p));
                    }
                    let down = if k == 1 {
                        index[&ChainState::Barrier(h.owner.0)]
                    } else {
                        index[&ChainState::Half { line, k: k - 1 }]
                    };
                    transitions[i].push((down, h.q));
                    if h.r() > 0.0 {
                        transitions[i].push((i, h.r()));
                    }
                }
            }
        }

        Self {
            states,
            index,
            transitions,
            absorb_barrier,
            truncate_mass,
            lines: nl,
        }
    }

    pub fn state_index(&self, state: ChainState) -> usize {
        self.index[&state]
    }

    fn start_index(&self, graph: &WalkGraph, start: StartPosition) -> usize {
        let state = match start {
            StartPosition::AtBarrier(b) => ChainState::Barrier(b.0),
            StartPosition::OnInterval { from, to, position } => {
                let edge = graph
                    .intervals
                    .iter()
                    .position(|e| e.from == from && e.to == to)
                    .expect("edge exists");
                let n = graph.intervals[edge].interior_states;
                if position == 0 {
                    ChainState::Barrier(from.0)
                } else if position == n + 1 {
                    ChainState::Barrier(to.0)
                } else {
                    ChainState::Interval { edge, k: position }
                }
            }
            StartPosition::OnHalfLine {
                owner,
                label,
                position,
            } => {
                if position == 0 {
                    ChainState::Barrier(owner.0)
                } else {
                    let line = graph
                        .half_lines
                        .iter()
                        .position(|h| h.owner == owner && h.label == label)
                        .expect("line exists");
                    ChainState::Half { line, k: position }
                }
            }
        };
        self.index[&state]
    }

    /// Expected visit counts per state, counting the start index:
    /// solves (I - Q^T) x = e_start.
    pub fn occupancy(&self, graph: &WalkGraph, start: StartPosition) -> Vec<f64> {
        let n = self.states.len();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for (from, outs) in self.transitions.iter().enumerate() {
            for &(to, prob) in outs {
                a[to][from] -= prob;
            }
        }
        let mut rhs = vec![0.0; n];
        rhs[self.start_index(graph, start)] = 1.0;
        solve_dense(a, rhs)
    }

    /// Absorption mass per barrier and per truncated line end.
    pub fn absorption(
        &self,
        graph: &WalkGraph,
        start: StartPosition,
    ) -> (Vec<f64>, Vec<f64>) {
        let occupancy = self.occupancy(graph, start);
        let nb = graph.barrier_count();
        let mut barriers = vec![0.0; nb];
        let mut ends = vec![0.0; self.lines];
        for (i, x) in occupancy.iter().enumerate() {
            for (b, mass) in barriers.iter_mut().enumerate() {
                *mass += x * self.absorb_barrier[i][b];
            }
            for (l, mass) in ends.iter_mut().enumerate() {
                *mass += x * self.truncate_mass[i][l];
            }
        }
        (barriers, ends)
    }

    /// Expected steps to absorption: total occupancy minus one. Only
    /// meaningful when no mass leaves through a truncation point.
    pub fn mean_time(&self, graph: &WalkGraph, start: StartPosition) -> f64 {
        self.occupancy(graph, start).iter().sum::<f64>() - 1.0
    }
}

/// Independent gambler's-ruin oracle over the interior states only:
/// fundamental-matrix row and the two absorption probabilities.
pub struct RuinOracle {
    /// expected visits to interior state k (1-based) from the start
    pub visits: Vec<f64>,
    pub absorb_low: f64,
    pub absorb_high: f64,
}

pub fn ruin_oracle(n: usize, p: f64, q: f64, i0: usize) -> RuinOracle {
    // (I - Q^T) x = e_{i0} over the n interior states: row k receives
    // p from state k-1 and q from state k+1
    let r = 1.0 - p - q;
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..n {
        a[k][k] = 1.0 - r;
        if k > 0 {
            a[k][k - 1] -= p;
        }
        if k + 1 < n {
            a[k][k + 1] -= q;
        }
    }
    let mut rhs = vec![0.0; n];
    rhs[i0 - 1] = 1.0;
    let visits = solve_dense(a, rhs);
    RuinOracle {
        absorb_low: q * visits[0],
        absorb_high: p * visits[n - 1],
        visits,
    }
}

// ---------------------------------------------------------------------
// Balance-residual checkers (the z = 1 occupancy equations and the time
// recursion, verified state by state).
// ---------------------------------------------------------------------

fn is_start(start: StartPosition, here: StartPosition) -> bool {
    start == here
}

/// Check every occupancy balance equation of a solved profile to `tol`:
/// interior states, edge endpoints with barrier coupling, half-line
/// states up to `half_depth`, and the barrier equations, with the unit
/// source at the start.
pub fn check_arrival_residuals(
    graph: &WalkGraph,
    start: StartPosition,
    profile: &ArrivalProfile<'_>,
    half_depth: usize,
    tol: f64,
) {
    let start = barrier_walk::graph::normalize_start(graph, start).unwrap_or(start);
    let source = |here: StartPosition| -> f64 {
        if is_start(start, here) {
            1.0
        } else {
            0.0
        }
    };
    let barrier_is_start = |b: BarrierId| -> f64 {
        // any edge position equivalent to this barrier
        match start {
            StartPosition::AtBarrier(c) => (c == b) as u8 as f64,
            StartPosition::OnInterval { from, to, position } => {
                let n = graph.interval_between(from, to).unwrap().interior_states;
                if position == 0 && from == b || position == n + 1 && to == b {
                    1.0
                } else {
                    0.0
                }
            }
            StartPosition::OnHalfLine {
                owner, position, ..
            } => {
                if position == 0 && owner == b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    };

    let y = profile.barrier_visits();
    for e in &graph.intervals {
        let n = e.interior_states;
        let x = |k: usize| -> f64 {
            if k == 0 || k == n + 1 {
                unreachable!()
            }
            let value = profile.x_interval(e.from, e.to, k).unwrap();
            assert!(value >= 0.0, "negative visit count {value} at interval state {k}");
            value
        };
        for k in 1..=n {
            let inflow_low = if k == 1 {
                graph.barrier(e.from).interval_move(e.to) * y[e.from.0]
            } else {
                e.p * x(k - 1)
            };
            let inflow_high = if k == n {
                graph.barrier(e.to).interval_move(e.from) * y[e.to.0]
            } else {
                e.q * x(k + 1)
            };
            let here = StartPosition::OnInterval {
                from: e.from,
                to: e.to,
                position: k,
            };
            let residual = x(k) - inflow_low - inflow_high - e.r() * x(k) - source(here);
            assert!(
                residual.abs() <= tol * (1.0 + x(k).abs()),
                "interval [{},{}] state {k}: residual {residual}",
                e.from,
                e.to
            );
        }
    }

    for h in &graph.half_lines {
        let x = |k: usize| {
            let value = profile.x_halfline(h.owner, h.label, k).unwrap();
            assert!(value >= 0.0, "negative visit count {value} at half-line state {k}");
            value
        };
        for k in 1..=half_depth {
            let inflow_low = if k == 1 {
                graph.barrier(h.owner).half_line_move(h.label) * y[h.owner.0]
            } else {
                h.p * x(k - 1)
            };
            let here = StartPosition::OnHalfLine {
                owner: h.owner,
                label: h.label,
                position: k,
            };
            let residual = x(k) - inflow_low - h.q * x(k + 1) - h.r() * x(k) - source(here);
            assert!(
                residual.abs() <= tol * (1.0 + x(k).abs()),
                "half-line [{},{}) state {k}: residual {residual}",
                h.owner,
                h.label
            );
        }
    }

    for b in &graph.barriers {
        let mut inflow = b.stay * y[b.id.0];
        for e in graph.intervals_at(b.id) {
            if e.from == b.id {
                inflow += e.q * profile.x_interval(e.from, e.to, 1).unwrap();
            } else {
                inflow += e.p
                    * profile
                        .x_interval(e.from, e.to, e.interior_states)
                        .unwrap();
            }
        }
        for h in graph.half_lines_at(b.id) {
            inflow += h.q * profile.x_halfline(h.owner, h.label, 1).unwrap();
        }
        let residual = y[b.id.0] - inflow - barrier_is_start(b.id);
        assert!(
            residual.abs() <= tol * (1.0 + y[b.id.0].abs()),
            "barrier {}: residual {residual}",
            b.id
        );
    }
}

/// Check the time recursion of a finite report to `tol`: the step
/// equation at every interval state with barrier boundary values, the
/// barrier equations, and the half-line displacement form.
pub fn check_time_residuals(graph: &WalkGraph, report: &TimeReport<'_>, tol: f64) {
    let times = report.barrier_times().expect("finite report");
    for e in &graph.intervals {
        let n = e.interior_states;
        let m = |k: usize| report.m_interval(e.from, e.to, k).unwrap();
        assert_close(m(0), times[e.from.0], tol, "interval lower boundary");
        assert_close(m(n + 1), times[e.to.0], tol, "interval upper boundary");
        for k in 1..=n {
            let residual = (1.0 - e.r()) * m(k) - e.p * m(k + 1) - e.q * m(k - 1) - 1.0;
            assert!(
                residual.abs() <= tol * (1.0 + m(k).abs()),
                "interval [{},{}] state {k}: time residual {residual}",
                e.from,
                e.to
            );
        }
    }
    for h in &graph.half_lines {
        if h.rho() >= 1.0 {
            continue;
        }
        let m = |k: usize| report.m_halfline(h.owner, h.label, k).unwrap();
        for k in 1..=24usize {
            let residual = (1.0 - h.r()) * m(k) - h.p * m(k + 1) - h.q * m(k - 1) - 1.0;
            assert!(
                residual.abs() <= tol * (1.0 + m(k).abs()),
                "half-line [{},{}) state {k}: time residual {residual}",
                h.owner,
                h.label
            );
        }
    }
    for b in &graph.barriers {
        let mut rhs = b.stay * times[b.id.0] + (1.0 - b.absorb);
        for e in graph.intervals_at(b.id) {
            let entry = b.interval_move(if e.from == b.id { e.to } else { e.from });
            let first = if e.from == b.id {
                report.m_interval(e.from, e.to, 1).unwrap()
            } else {
                report
                    .m_interval(e.from, e.to, e.interior_states)
                    .unwrap()
            };
            rhs += entry * first;
        }
        for h in graph.half_lines_at(b.id) {
            let entry = b.half_line_move(h.label);
            if entry > 0.0 {
                rhs += entry * report.m_halfline(h.owner, h.label, 1).unwrap();
            }
        }
        let residual = times[b.id.0] - rhs;
        assert!(
            residual.abs() <= tol * (1.0 + times[b.id.0].abs()),
            "barrier {}: time residual {residual}",
            b.id
        );
    }
}

// ---------------------------------------------------------------------
// Reference battery and random instances.
// ---------------------------------------------------------------------

/// A named reference graph with a start position.
pub struct BatteryEntry {
    pub name: &'static str,
    pub graph: WalkGraph,
    pub start: StartPosition,
}

/// Reference graphs spanning intervals, all three half-line drift
/// classes, stars, cycles, and the two-barrier line.
pub fn battery() -> Vec<BatteryEntry> {
    let mut entries = vec![BatteryEntry {
        name: "symmetric ruin interval",
        graph: WalkGraph::new(
            vec![Barrier::new(0, 0.0, 1.0), Barrier::new(1, 0.0, 1.0)],
            vec![IntervalEdge::new(0, 1, 4, 0.5, 0.5)],
            vec![],
        ),
        start: StartPosition::on_interval(0, 1, 2),
    }];

    entries.push(BatteryEntry {
        name: "asymmetric interval with holds",
        graph: WalkGraph::new(
            vec![
                Barrier::new(0, 0.3, 0.3).with_interval_move(1, 0.4),
                Barrier::new(1, 0.1, 0.6).with_interval_move(0, 0.3),
            ],
            vec![IntervalEdge::new(0, 1, 3, 0.4, 0.2)],
            vec![],
        ),
        start: StartPosition::on_interval(0, 1, 1),
    });

    entries.push(BatteryEntry {
        name: "three-barrier path",
        graph: WalkGraph::new(
            vec![
                Barrier::new(0, 0.1, 0.5).with_interval_move(1, 0.4),
                Barrier::new(1, 0.0, 0.2)
                    .with_interval_move(0, 0.5)
                    .with_interval_move(2, 0.3),
                Barrier::new(2, 0.25, 0.35).with_interval_move(1, 0.4),
            ],
            vec![
                IntervalEdge::new(0, 1, 2, 0.3, 0.45),
                IntervalEdge::new(1, 2, 5, 0.25, 0.25),
            ],
            vec![],
        ),
        start: StartPosition::at_barrier(1),
    });

    entries.push(BatteryEntry {
        name: "returning half-line",
        graph: WalkGraph::new(
            vec![Barrier::new(0, 0.1, 0.4).with_half_line_move(1, 0.5)],
            vec![],
            vec![HalfLine::new(0, 1, 0.2, 0.5)],
        ),
        start: StartPosition::on_half_line(0, 1, 3),
    });

    entries.push(BatteryEntry {
        name: "driftless half-line",
        graph: WalkGraph::new(
            vec![Barrier::new(0, 0.0, 0.6).with_half_line_move(1, 0.4)],
            vec![],
            vec![HalfLine::new(0, 1, 0.35, 0.35)],
        ),
        start: StartPosition::on_half_line(0, 1, 2),
    });

    entries.push(BatteryEntry {
        name: "escaping half-line",
        graph: WalkGraph::new(
            vec![Barrier::new(0, 0.2, 0.3).with_half_line_move(1, 0.5)],
            vec![],
            vec![HalfLine::new(0, 1, 0.5, 0.25)],
        ),
        start: StartPosition::on_half_line(0, 1, 2),
    });

    entries.push(BatteryEntry {
        name: "finite star",
        graph: WalkGraph::new(
            vec![
                Barrier::new(0, 0.05, 0.15)
                    .with_interval_move(1, 0.45)
                    .with_interval_move(2, 0.35),
                Barrier::new(1, 0.2, 0.5).with_interval_move(0, 0.3),
                Barrier::new(2, 0.0, 1.0),
            ],
            vec![
                IntervalEdge::new(0, 1, 3, 0.35, 0.25),
                IntervalEdge::new(0, 2, 2, 0.2, 0.4),
            ],
            vec![],
        ),
        start: StartPosition::on_interval(0, 1, 2),
    });

    entries.push(BatteryEntry {
        name: "infinite star mixed drift",
        graph: WalkGraph::new(
            vec![Barrier::new(0, 0.1, 0.2)
                .with_half_line_move(1, 0.3)
                .with_half_line_move(2, 0.25)
                .with_half_line_move(3, 0.15)],
            vec![],
            vec![
                HalfLine::new(0, 1, 0.2, 0.4),
                HalfLine::new(0, 2, 0.45, 0.15),
                HalfLine::new(0, 3, 0.3, 0.3),
            ],
        ),
        start: StartPosition::on_half_line(0, 1, 2),
    });

    entries.push(BatteryEntry {
        name: "three-barrier cycle",
        graph: barrier_walk::closed_form::CycleSpec {
            barriers: vec![
                barrier_walk::closed_form::CycleBarrier {
                    stay: 0.1,
                    forward: 0.7,
                    absorb: 0.2,
                },
                barrier_walk::closed_form::CycleBarrier {
                    stay: 0.05,
                    forward: 0.6,
                    absorb: 0.35,
                },
                barrier_walk::closed_form::CycleBarrier {
                    stay: 0.2,
                    forward: 0.5,
                    absorb: 0.3,
                },
            ],
            arcs: vec![
                barrier_walk::closed_form::CycleArc {
                    interior: 2,
                    p: 0.5,
                    q: 0.3,
                },
                barrier_walk::closed_form::CycleArc {
                    interior: 3,
                    p: 0.2,
                    q: 0.4,
                },
                barrier_walk::closed_form::CycleArc {
                    interior: 1,
                    p: 0.45,
                    q: 0.45,
                },
            ],
        }
        .to_walk_graph()
        .unwrap(),
        start: StartPosition::at_barrier(0),
    });

    for (name, p, q, start) in [
        ("integer line drift up", 0.3, 0.2, 6i64),
        ("integer line driftless", 0.35, 0.35, 2),
        ("integer line drift down", 0.2, 0.3, -2),
    ] {
        let spec = barrier_walk::closed_form::TwoMfbLineSpec {
            p,
            q,
            origin: barrier_walk::closed_form::MfbParams {
                up: 0.3,
                down: 0.25,
                stay: 0.15,
                absorb: 0.3,
            },
            upper: barrier_walk::closed_form::MfbParams {
                up: 0.2,
                down: 0.35,
                stay: 0.25,
                absorb: 0.2,
            },
            upper_position: 4,
            start,
        };
        entries.push(BatteryEntry {
            name,
            graph: spec.to_walk_graph().unwrap(),
            start: spec.start_position(),
        });
    }

    entries.push(BatteryEntry {
        name: "kitchen sink",
        graph: WalkGraph::new(
            vec![
                Barrier::new(0, 0.1, 0.1)
                    .with_interval_move(1, 0.35)
                    .with_half_line_move(1, 0.25)
                    .with_half_line_move(2, 0.2),
                Barrier::new(1, 0.05, 0.4)
                    .with_interval_move(0, 0.25)
                    .with_half_line_move(1, 0.3),
            ],
            vec![IntervalEdge::new(0, 1, 4, 0.3, 0.25)],
            vec![
                HalfLine::new(0, 1, 0.25, 0.5),
                HalfLine::new(0, 2, 0.55, 0.2),
                HalfLine::new(1, 1, 0.3, 0.3),
            ],
        ),
        start: StartPosition::on_interval(0, 1, 3),
    });

    entries
}

/// Seeded parameter sampler used by the randomized sweeps: values in
/// [0.05, 0.95], renormalized where a distribution is needed.
pub struct ParamSampler {
    rng: ChaCha8Rng,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.random_range(0.05..0.95)
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn bool(&mut self) -> bool {
        self.rng.random()
    }

    /// `n` nonnegative weights scaled to sum to `total`.
    pub fn distribution(&mut self, n: usize, total: f64) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| self.unit()).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w * total / sum).collect()
    }

    /// A step pair (p, q) with p + q <= 0.99, each at least 0.05,
    /// optionally forced driftless.
    pub fn step_pair(&mut self, driftless: bool) -> (f64, f64) {
        if driftless {
            let p = self.rng.random_range(0.05..0.49);
            (p, p)
        } else {
            loop {
                let p = self.unit() * 0.9;
                let q = self.unit() * 0.9;
                if p >= 0.05 && q >= 0.05 && p + q <= 0.99 {
                    return (p, q);
                }
            }
        }
    }

    /// A step pair whose drift ratio stays out of (0.8, 1.25), so that a
    /// truncated chain at moderate depth is numerically exact.
    pub fn step_pair_bounded_drift(&mut self) -> (f64, f64) {
        loop {
            let (p, q) = self.step_pair(false);
            let rho = p / q;
            if !(0.8..1.25).contains(&rho) {
                return (p, q);
            }
        }
    }
}

/// Options for the random graph generator.
#[derive(Clone, Copy)]
pub struct GraphShape {
    /// Keep half-line drift ratios away from 1 (for truncated-chain
    /// comparisons).
    pub bounded_half_line_drift: bool,
    /// Force every half-line inward (finite expected times).
    pub returning_half_lines_only: bool,
    pub max_barriers: usize,
    pub max_half_lines: usize,
}

impl Default for GraphShape {
    fn default() -> Self {
        Self {
            bounded_half_line_drift: false,
            returning_half_lines_only: false,
            max_barriers: 4,
            max_half_lines: 2,
        }
    }
}

/// A seeded random valid graph with a start position: a path of
/// barriers with an optional chord, a few half-lines, and full random
/// distributions (every barrier keeps a little absorption mass so the
/// systems stay regular).
pub fn random_graph(seed: u64, shape: GraphShape) -> (WalkGraph, StartPosition) {
    let mut s = ParamSampler::new(seed);
    let nb = s.usize_in(1, shape.max_barriers);

    let mut intervals: Vec<IntervalEdge> = Vec::new();
    for i in 1..nb {
        let driftless = s.bool() && s.bool();
        let (p, q) = s.step_pair(driftless);
        intervals.push(IntervalEdge::new(i - 1, i, s.usize_in(1, 5), p, q));
    }
    if nb >= 3 && s.bool() {
        let (p, q) = s.step_pair(false);
        intervals.push(IntervalEdge::new(0, nb - 1, s.usize_in(1, 4), p, q));
    }

    let mut half_lines: Vec<HalfLine> = Vec::new();
    let line_count = s.usize_in(0, shape.max_half_lines);
    for _ in 0..line_count {
        let owner = s.usize_in(0, nb - 1);
        let label = half_lines.iter().filter(|h| h.owner.0 == owner).count() + 1;
        let (p, q) = if shape.bounded_half_line_drift {
            s.step_pair_bounded_drift()
        } else {
            let driftless = s.bool() && s.bool();
            s.step_pair(driftless)
        };
        let (p, q) = if shape.returning_half_lines_only && p >= q {
            (q.min(p) * 0.6, q.max(p))
        } else {
            (p, q)
        };
        half_lines.push(HalfLine::new(owner, label, p, q));
    }

    let mut barriers = Vec::new();
    for id in 0..nb {
        let neighbors: Vec<usize> = intervals
            .iter()
            .filter(|e| e.touches(BarrierId(id)))
            .map(|e| if e.from.0 == id { e.to.0 } else { e.from.0 })
            .collect();
        let labels: Vec<usize> = half_lines
            .iter()
            .filter(|h| h.owner.0 == id)
            .map(|h| h.label)
            .collect();
        let slots = 2 + neighbors.len() + labels.len();
        let mut weights = s.distribution(slots, 1.0);
        // keep a floor of absorption mass so every graph can terminate
        if weights[1] < 0.02 {
            let boost = 0.02 - weights[1];
            weights[1] += boost;
            weights[0] = (weights[0] - boost).max(0.0);
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut barrier = Barrier::new(id, weights[0], weights[1]);
        for (slot, &to) in neighbors.iter().enumerate() {
            barrier = barrier.with_interval_move(to, weights[2 + slot]);
        }
        for (slot, &label) in labels.iter().enumerate() {
            barrier = barrier.with_half_line_move(label, weights[2 + neighbors.len() + slot]);
        }
        barriers.push(barrier);
    }

    let graph = WalkGraph::new(barriers, intervals, half_lines);
    assert!(graph.validate().is_ok(), "generator produced invalid graph");

    let start = loop {
        match s.usize_in(0, 2) {
            0 => break StartPosition::at_barrier(s.usize_in(0, nb - 1)),
            1 if !graph.intervals.is_empty() => {
                let e = &graph.intervals[s.usize_in(0, graph.intervals.len() - 1)];
                break StartPosition::OnInterval {
                    from: e.from,
                    to: e.to,
                    position: s.usize_in(0, e.interior_states + 1),
                };
            }
            2 if !graph.half_lines.is_empty() => {
                let h = &graph.half_lines[s.usize_in(0, graph.half_lines.len() - 1)];
                break StartPosition::OnHalfLine {
                    owner: h.owner,
                    label: h.label,
                    position: s.usize_in(0, 6),
                };
            }
            _ => continue,
        }
    };
    (graph, start)
}
