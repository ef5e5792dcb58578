//! The graph model: barriers, interval edges, half-lines, start positions.
//!
//! A graph holds `N+1` barriers with dense ids `0..=N`. Between two
//! barriers there can be at most one interval edge with `n >= 1` interior
//! states; a barrier may own any finite number of half-lines, each an
//! infinite chain of states `1, 2, 3, ...` with a topological end.
//!
//! Every edge carries step probabilities `p` (forward: toward the higher
//! barrier on an interval, away from the owner on a half-line), `q`
//! (backward) and implicitly `r = 1 - p - q` (hold). Every barrier carries
//! a distribution over staying, absorbing, and entering each incident
//! edge; the distribution must sum to one.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Tolerance on barrier distribution sums.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Index of a barrier; ids are dense `0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BarrierId(pub usize);

impl fmt::Display for BarrierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for BarrierId {
    fn from(value: usize) -> Self {
        BarrierId(value)
    }
}

/// A finite chain of `interior_states` states between two barriers.
///
/// Interior states are numbered `1..=n` in the direction from `from` to
/// `to`; `p` steps toward `to`, `q` toward `from`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEdge {
    pub from: BarrierId,
    pub to: BarrierId,
    pub interior_states: usize,
    pub p: f64,
    pub q: f64,
}

impl IntervalEdge {
    pub fn new(from: usize, to: usize, interior_states: usize, p: f64, q: f64) -> Self {
        Self {
            from: BarrierId(from),
            to: BarrierId(to),
            interior_states,
            p,
            q,
        }
    }

    /// Drift ratio `p/q`.
    pub fn rho(&self) -> f64 {
        self.p / self.q
    }

    /// Hold probability `1 - p - q`, clamped against rounding.
    pub fn r(&self) -> f64 {
        (1.0 - self.p - self.q).max(0.0)
    }

    pub fn touches(&self, b: BarrierId) -> bool {
        self.from == b || self.to == b
    }
}

/// A one-ended infinite chain attached to `owner`, labelled by a positive
/// integer; `p` steps away from the owner (toward the end), `q` back.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    pub owner: BarrierId,
    pub label: usize,
    pub p: f64,
    pub q: f64,
}

impl HalfLine {
    pub fn new(owner: usize, label: usize, p: f64, q: f64) -> Self {
        Self {
            owner: BarrierId(owner),
            label,
            p,
            q,
        }
    }

    pub fn rho(&self) -> f64 {
        self.p / self.q
    }

    pub fn r(&self) -> f64 {
        (1.0 - self.p - self.q).max(0.0)
    }

    /// Whether the end can absorb: strict outward drift.
    pub fn escaping(&self) -> bool {
        self.p > self.q
    }
}

/// One multiple-function barrier: stay / absorb / route distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub id: BarrierId,
    /// Probability of holding in place for one step.
    pub stay: f64,
    /// Probability of immediate absorption (terminates the walk).
    pub absorb: f64,
    /// Probability of stepping onto the interval toward each neighbor.
    pub interval_moves: BTreeMap<BarrierId, f64>,
    /// Probability of stepping onto each owned half-line.
    pub half_line_moves: BTreeMap<usize, f64>,
}

impl Barrier {
    pub fn new(id: usize, stay: f64, absorb: f64) -> Self {
        Self {
            id: BarrierId(id),
            stay,
            absorb,
            interval_moves: BTreeMap::new(),
            half_line_moves: BTreeMap::new(),
        }
    }

    pub fn with_interval_move(mut self, to: usize, prob: f64) -> Self {
        self.interval_moves.insert(BarrierId(to), prob);
        self
    }

    pub fn with_half_line_move(mut self, label: usize, prob: f64) -> Self {
        self.half_line_moves.insert(label, prob);
        self
    }

    /// Probability of entering the interval toward `to` (zero if absent).
    pub fn interval_move(&self, to: BarrierId) -> f64 {
        self.interval_moves.get(&to).copied().unwrap_or(0.0)
    }

    /// Probability of entering the owned half-line `label`.
    pub fn half_line_move(&self, label: usize) -> f64 {
        self.half_line_moves.get(&label).copied().unwrap_or(0.0)
    }

    pub fn distribution_sum(&self) -> f64 {
        self.stay
            + self.absorb
            + self.interval_moves.values().sum::<f64>()
            + self.half_line_moves.values().sum::<f64>()
    }
}

/// Where the walk begins.
///
/// `OnInterval { position: 0 }` means "at the `from` barrier" and
/// `position: n+1` "at the `to` barrier"; `OnHalfLine { position: 0 }`
/// means "at the owner".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPosition {
    AtBarrier(BarrierId),
    OnInterval {
        from: BarrierId,
        to: BarrierId,
        position: usize,
    },
    OnHalfLine {
        owner: BarrierId,
        label: usize,
        position: usize,
    },
}

impl StartPosition {
    pub fn at_barrier(id: usize) -> Self {
        StartPosition::AtBarrier(BarrierId(id))
    }

    pub fn on_interval(from: usize, to: usize, position: usize) -> Self {
        StartPosition::OnInterval {
            from: BarrierId(from),
            to: BarrierId(to),
            position,
        }
    }

    pub fn on_half_line(owner: usize, label: usize, position: usize) -> Self {
        StartPosition::OnHalfLine {
            owner: BarrierId(owner),
            label,
            position,
        }
    }
}

impl fmt::Display for StartPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartPosition::AtBarrier(b) => write!(f, "barrier {b}"),
            StartPosition::OnInterval { from, to, position } => {
                write!(f, "interval [{from},{to}] position {position}")
            }
            StartPosition::OnHalfLine {
                owner,
                label,
                position,
            } => write!(f, "half-line [{owner},{label}) position {position}"),
        }
    }
}

/// A single addressable state of the walk, for visit queries and
/// simulation tracking. Interval positions are interior (`1..=n`),
/// half-line positions are `>= 1`; barrier occupancy is addressed by the
/// barrier itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Barrier(BarrierId),
    Interval {
        from: BarrierId,
        to: BarrierId,
        position: usize,
    },
    HalfLine {
        owner: BarrierId,
        label: usize,
        position: usize,
    },
}

impl State {
    pub fn barrier(id: usize) -> Self {
        State::Barrier(BarrierId(id))
    }

    pub fn interval(from: usize, to: usize, position: usize) -> Self {
        State::Interval {
            from: BarrierId(from),
            to: BarrierId(to),
            position,
        }
    }

    pub fn half_line(owner: usize, label: usize, position: usize) -> Self {
        State::HalfLine {
            owner: BarrierId(owner),
            label,
            position,
        }
    }

    /// Parse the flat CLI address: `interval:from:to:k`, `half:owner:label:k`
    /// or `barrier:id`.
    pub fn parse(address: &str) -> Result<Self, GraphError> {
        let parts: Vec<&str> = address.split(':').collect();
        let num = |s: &str| -> Result<usize, GraphError> {
            s.parse()
                .map_err(|_| GraphError::BadStateAddress(address.to_string()))
        };
        match parts.as_slice() {
            ["interval", from, to, k] => Ok(State::interval(num(from)?, num(to)?, num(k)?)),
            ["half", owner, label, k] => Ok(State::half_line(num(owner)?, num(label)?, num(k)?)),
            ["barrier", id] => Ok(State::barrier(num(id)?)),
            _ => Err(GraphError::BadStateAddress(address.to_string())),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Barrier(b) => write!(f, "barrier:{b}"),
            State::Interval { from, to, position } => {
                write!(f, "interval:{from}:{to}:{position}")
            }
            State::HalfLine {
                owner,
                label,
                position,
            } => write!(f, "half:{owner}:{label}:{position}"),
        }
    }
}

/// The full walk graph. Immutable after construction: validate once, then
/// share freely across threads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WalkGraph {
    pub barriers: Vec<Barrier>,
    pub intervals: Vec<IntervalEdge>,
    pub half_lines: Vec<HalfLine>,
}

impl WalkGraph {
    pub fn new(
        barriers: Vec<Barrier>,
        intervals: Vec<IntervalEdge>,
        half_lines: Vec<HalfLine>,
    ) -> Self {
        Self {
            barriers,
            intervals,
            half_lines,
        }
    }

    pub fn barrier_count(&self) -> usize {
        self.barriers.len()
    }

    pub fn barrier(&self, id: BarrierId) -> &Barrier {
        &self.barriers[id.0]
    }

    pub fn get_barrier(&self, id: BarrierId) -> Option<&Barrier> {
        self.barriers.get(id.0)
    }

    /// The interval between two barriers, in either endpoint order.
    pub fn interval_between(&self, a: BarrierId, b: BarrierId) -> Option<&IntervalEdge> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.intervals
            .iter()
            .find(|e| e.from == lo && e.to == hi)
    }

    pub fn half_line(&self, owner: BarrierId, label: usize) -> Option<&HalfLine> {
        self.half_lines
            .iter()
            .find(|h| h.owner == owner && h.label == label)
    }

    pub fn intervals_at(&self, id: BarrierId) -> impl Iterator<Item = &IntervalEdge> {
        self.intervals.iter().filter(move |e| e.touches(id))
    }

    pub fn half_lines_at(&self, id: BarrierId) -> impl Iterator<Item = &HalfLine> {
        self.half_lines.iter().filter(move |h| h.owner == id)
    }

    /// Check that a state exists in this graph.
    pub fn check_state(&self, state: &State) -> Result<(), GraphError> {
        match *state {
            State::Barrier(b) => {
                self.get_barrier(b).ok_or(GraphError::UnknownBarrier(b))?;
                Ok(())
            }
            State::Interval { from, to, position } => {
                let edge = self
                    .interval_between(from, to)
                    .filter(|e| e.from == from && e.to == to)
                    .ok_or(GraphError::UnknownInterval { from, to })?;
                if position < 1 || position > edge.interior_states {
                    return Err(GraphError::PositionOutOfRange {
                        start: StartPosition::OnInterval { from, to, position },
                        max: edge.interior_states,
                    });
                }
                Ok(())
            }
            State::HalfLine {
                owner,
                label,
                position,
            } => {
                self.half_line(owner, label)
                    .ok_or(GraphError::UnknownHalfLine { owner, label })?;
                if position < 1 {
                    return Err(GraphError::PositionOutOfRange {
                        start: StartPosition::OnHalfLine {
                            owner,
                            label,
                            position,
                        },
                        max: usize::MAX,
                    });
                }
                Ok(())
            }
        }
    }

    pub fn validate(&self) -> Validation {
        validate(self)
    }

    /// Half-lines whose end can absorb (`p/q > 1`), sorted by owner and
    /// label.
    pub fn escaping_ends(&self) -> Vec<(BarrierId, usize)> {
        let mut ends: Vec<(BarrierId, usize)> = self
            .half_lines
            .iter()
            .filter(|h| h.escaping())
            .map(|h| (h.owner, h.label))
            .collect();
        ends.sort();
        ends
    }
}

/// One broken rule, naming the offending element.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Barrier distribution does not sum to one.
    BarrierSum { barrier: BarrierId, sum: f64 },
    /// Edge step probabilities out of range (`p, q > 0`, `p + q <= 1`).
    EdgeParam { edge: String, p: f64, q: f64 },
    /// A barrier move references a missing edge or half-line, or an edge
    /// references a missing barrier.
    DanglingReference { element: String, target: String },
    /// Negative probability mass.
    NegativeProbability { element: String, value: f64 },
    /// Two interval edges between the same barrier pair, duplicate
    /// half-line labels, or a self-loop.
    DuplicateEdge { edge: String },
    /// Barrier ids are not dense `0..=N` in order.
    BarrierIds { expected: usize, found: BarrierId },
    /// Graph has no barriers, or an interval has no interior states.
    Structure { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BarrierSum { barrier, sum } => write!(
                f,
                "barrier {barrier}: distribution sums to {sum}, expected 1"
            ),
            Violation::EdgeParam { edge, p, q } => write!(
                f,
                "{edge}: requires p > 0, q > 0 and p + q <= 1 (got p={p}, q={q})"
            ),
            Violation::DanglingReference { element, target } => {
                write!(f, "{element}: references missing {target}")
            }
            Violation::NegativeProbability { element, value } => {
                write!(f, "{element}: negative probability {value}")
            }
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge: {edge}"),
            Violation::BarrierIds { expected, found } => write!(
                f,
                "barrier ids must be dense 0..=N: expected {expected}, found {found}"
            ),
            Violation::Structure { detail } => write!(f, "{detail}"),
        }
    }
}

/// Outcome of validating a graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), Vec<Violation>> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(self.violations)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown barrier {0}")]
    UnknownBarrier(BarrierId),
    #[error("no interval edge [{from},{to}]")]
    UnknownInterval { from: BarrierId, to: BarrierId },
    #[error("no half-line [{owner},{label})")]
    UnknownHalfLine { owner: BarrierId, label: usize },
    #[error("{start}: position exceeds bound {max}")]
    PositionOutOfRange { start: StartPosition, max: usize },
    #[error("barrier {0} has no incident edges; cannot host a start")]
    IsolatedBarrier(BarrierId),
    #[error("invalid state address: {0}")]
    BadStateAddress(String),
}

fn positive_prob(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn check_edge_params(edge: &str, p: f64, q: f64, violations: &mut Vec<Violation>) {
    if !positive_prob(p) || !positive_prob(q) || p + q > 1.0 + DISTRIBUTION_TOLERANCE {
        violations.push(Violation::EdgeParam {
            edge: edge.to_string(),
            p,
            q,
        });
    }
}

/// Validate a graph against the model rules. Returns every violation
/// found, not just the first.
pub fn validate(graph: &WalkGraph) -> Validation {
    let mut violations = Vec::new();
    let n = graph.barriers.len();

    if n == 0 {
        violations.push(Violation::Structure {
            detail: "graph has no barriers".to_string(),
        });
        return Validation { violations };
    }

    for (k, barrier) in graph.barriers.iter().enumerate() {
        if barrier.id.0 != k {
            violations.push(Violation::BarrierIds {
                expected: k,
                found: barrier.id,
            });
        }
    }

    let exists = |id: BarrierId| id.0 < n;

    let mut seen_pairs = Vec::new();
    for edge in &graph.intervals {
        let name = format!("interval [{},{}]", edge.from, edge.to);
        if !exists(edge.from) || !exists(edge.to) {
            violations.push(Violation::DanglingReference {
                element: name.clone(),
                target: "barrier endpoint".to_string(),
            });
            continue;
        }
        if edge.from >= edge.to {
            violations.push(Violation::DuplicateEdge {
                edge: format!("{name}: endpoints must satisfy from < to"),
            });
        }
        if edge.interior_states == 0 {
            violations.push(Violation::Structure {
                detail: format!("{name}: needs at least one interior state"),
            });
        }
        check_edge_params(&name, edge.p, edge.q, &mut violations);
        let pair = (edge.from, edge.to);
        if seen_pairs.contains(&pair) {
            violations.push(Violation::DuplicateEdge { edge: name });
        }
        seen_pairs.push(pair);
    }

    let mut seen_lines = Vec::new();
    for hl in &graph.half_lines {
        let name = format!("half-line [{},{})", hl.owner, hl.label);
        if !exists(hl.owner) {
            violations.push(Violation::DanglingReference {
                element: name.clone(),
                target: "owner barrier".to_string(),
            });
            continue;
        }
        if hl.label == 0 {
            violations.push(Violation::Structure {
                detail: format!("{name}: labels start at 1"),
            });
        }
        check_edge_params(&name, hl.p, hl.q, &mut violations);
        let key = (hl.owner, hl.label);
        if seen_lines.contains(&key) {
            violations.push(Violation::DuplicateEdge { edge: name });
        }
        seen_lines.push(key);
    }

    for barrier in &graph.barriers {
        let bname = format!("barrier {}", barrier.id);
        for (value, what) in [(barrier.stay, "stay"), (barrier.absorb, "absorb")] {
            if value < 0.0 {
                violations.push(Violation::NegativeProbability {
                    element: format!("{bname} {what}"),
                    value,
                });
            }
        }
        for (&to, &prob) in &barrier.interval_moves {
            if prob < 0.0 {
                violations.push(Violation::NegativeProbability {
                    element: format!("{bname} move toward {to}"),
                    value: prob,
                });
            }
            if graph.interval_between(barrier.id, to).is_none() || to == barrier.id {
                violations.push(Violation::DanglingReference {
                    element: format!("{bname} move toward {to}"),
                    target: format!("interval between {} and {to}", barrier.id),
                });
            }
        }
        for (&label, &prob) in &barrier.half_line_moves {
            if prob < 0.0 {
                violations.push(Violation::NegativeProbability {
                    element: format!("{bname} move onto half-line {label}"),
                    value: prob,
                });
            }
            if graph.half_line(barrier.id, label).is_none() {
                violations.push(Violation::DanglingReference {
                    element: format!("{bname} move onto half-line {label}"),
                    target: format!("half-line [{},{label})", barrier.id),
                });
            }
        }
        let sum = barrier.distribution_sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            violations.push(Violation::BarrierSum {
                barrier: barrier.id,
                sum,
            });
        }
    }

    Validation { violations }
}

/// Rewrite a barrier start onto an incident edge; edge starts are checked
/// and returned unchanged. Idempotent.
///
/// The rewritten position is equivalent to the barrier itself:
/// `OnInterval(c, d, 0)` is a start at barrier `c`, `OnInterval(c, d, n+1)`
/// at barrier `d`, `OnHalfLine(c, k, 0)` at barrier `c`.
pub fn normalize_start(graph: &WalkGraph, start: StartPosition) -> Result<StartPosition, GraphError> {
    match start {
        StartPosition::AtBarrier(id) => {
            graph.get_barrier(id).ok_or(GraphError::UnknownBarrier(id))?;
            let mut incident: Vec<&IntervalEdge> = graph.intervals_at(id).collect();
            incident.sort_by_key(|e| (e.from, e.to));
            if let Some(edge) = incident.first() {
                let position = if edge.from == id {
                    0
                } else {
                    edge.interior_states + 1
                };
                return Ok(StartPosition::OnInterval {
                    from: edge.from,
                    to: edge.to,
                    position,
                });
            }
            let mut lines: Vec<&HalfLine> = graph.half_lines_at(id).collect();
            lines.sort_by_key(|h| h.label);
            if let Some(hl) = lines.first() {
                return Ok(StartPosition::OnHalfLine {
                    owner: id,
                    label: hl.label,
                    position: 0,
                });
            }
            Err(GraphError::IsolatedBarrier(id))
        }
        StartPosition::OnInterval { from, to, position } => {
            let edge = graph
                .interval_between(from, to)
                .filter(|e| e.from == from && e.to == to)
                .ok_or(GraphError::UnknownInterval { from, to })?;
            if position > edge.interior_states + 1 {
                return Err(GraphError::PositionOutOfRange {
                    start,
                    max: edge.interior_states + 1,
                });
            }
            Ok(start)
        }
        StartPosition::OnHalfLine { owner, label, .. } => {
            graph
                .half_line(owner, label)
                .ok_or(GraphError::UnknownHalfLine { owner, label })?;
            Ok(start)
        }
    }
}
