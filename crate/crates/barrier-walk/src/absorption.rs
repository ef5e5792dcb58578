//! Absorption probabilities at barriers and at half-line ends.
//!
//! A barrier absorbs mass `absorb_i * y_i`; an escaping half-line end
//! swallows `(1 - 1/rho)` of the entry mass routed onto it, plus the
//! never-return mass `1 - rho^(-i0)` when the walk starts on that line.
//! Total barrier absorption is computed twice, once as the direct sum and
//! once from the column-sum balance of the visit system; the two must
//! agree, and together with the end masses they account for probability
//! one.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::arrival::{ArrivalError, ArrivalProfile};
use crate::graph::{BarrierId, StartPosition, WalkGraph};

/// Agreement tolerance between the two total absorption routes.
const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbsorptionError {
    #[error(transparent)]
    Arrival(#[from] ArrivalError),
    /// The direct and balance-based totals disagree; indicates an
    /// assembly bug.
    #[error("absorption totals disagree: direct {direct} vs balance {balance}")]
    CrossCheck { direct: f64, balance: f64 },
    /// The single-barrier half-line profile requires outward drift.
    #[error("drift must point away from the barrier (p > q), got p={p}, q={q}")]
    Drift { p: f64, q: f64 },
    #[error("invalid parameter: {0}")]
    Param(String),
}

/// Probability mass per absorbing sink for one (graph, start) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionReport {
    /// `absorb_i * y_i` per barrier, indexed by id.
    pub per_barrier: Vec<f64>,
    /// Mass escaping through each outward-drift half-line end.
    pub per_end: BTreeMap<(BarrierId, usize), f64>,
    /// Total mass absorbed at barriers (complement of the end masses).
    pub total_mfb: f64,
}

impl AbsorptionReport {
    /// Compute from an already-solved visit profile.
    pub fn from_profile(profile: &ArrivalProfile<'_>) -> Result<Self, AbsorptionError> {
        let graph = profile.graph();
        let visits = profile.barrier_visits();

        let per_barrier: Vec<f64> = graph
            .barriers
            .iter()
            .map(|b| b.absorb * visits[b.id.0])
            .collect();
        let direct: f64 = per_barrier.iter().sum();

        let start_line = profile.start_half_line_source();
        let mut per_end = BTreeMap::new();
        let mut escape_mass = 0.0;
        for hl in &graph.half_lines {
            let rho = hl.rho();
            if rho <= 1.0 {
                continue;
            }
            let entry = graph.barrier(hl.owner).half_line_move(hl.label);
            let mut mass = (1.0 - rho.recip()) * entry * visits[hl.owner.0];
            escape_mass += mass;
            if let Some((owner, label, i0)) = start_line {
                if owner == hl.owner && label == hl.label {
                    mass += 1.0 - rho.powi(-(i0 as i32));
                }
            }
            per_end.insert((hl.owner, hl.label), mass);
        }

        // Balance route: the start mass minus what leaks to the ends.
        let start_mass = match start_line {
            Some((owner, label, i0)) => {
                let rho = graph.half_line(owner, label).expect("checked").rho();
                if rho > 1.0 {
                    rho.powi(-(i0 as i32))
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let balance = start_mass - escape_mass;

        if (direct - balance).abs() > CROSS_CHECK_TOLERANCE {
            return Err(AbsorptionError::CrossCheck { direct, balance });
        }

        Ok(Self {
            per_barrier,
            per_end,
            total_mfb: direct,
        })
    }

    /// Solve and report in one step.
    pub fn compute(graph: &WalkGraph, start: StartPosition) -> Result<Self, AbsorptionError> {
        let profile = ArrivalProfile::compute(graph, start)?;
        Self::from_profile(&profile)
    }

    /// Total escaping mass over all ends.
    pub fn total_end(&self) -> f64 {
        self.per_end.values().sum()
    }
}

impl ArrivalProfile<'_> {
    /// The (owner, label, position) of the start when it lies strictly on
    /// a half-line.
    pub(crate) fn start_half_line_source(&self) -> Option<(BarrierId, usize, usize)> {
        match self.start() {
            StartPosition::OnHalfLine {
                owner,
                label,
                position,
            } if position >= 1 => Some((owner, label, position)),
            _ => None,
        }
    }
}

/// Visit counts and end-absorption probability for a `[p, q, r]` walk on
/// the nonnegative integers with a partially reflecting barrier at the
/// origin: reflect with probability `alpha`, absorb with `1 - alpha`.
/// Requires outward drift `p > q`, so the visit profile is flat at and
/// beyond the start.
#[derive(Debug, Clone, Copy)]
pub struct Lemma1Profile {
    p: f64,
    q: f64,
    alpha: f64,
    i0: usize,
}

impl Lemma1Profile {
    pub fn new(p: f64, q: f64, alpha: f64, i0: usize) -> Result<Self, AbsorptionError> {
        if !(p.is_finite() && p > 0.0) || !(q.is_finite() && q > 0.0) || p + q > 1.0 + 1e-12 {
            return Err(AbsorptionError::Param(format!(
                "need p, q > 0 and p + q <= 1, got p={p}, q={q}"
            )));
        }
        if p <= q {
            return Err(AbsorptionError::Drift { p, q });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(AbsorptionError::Param(format!(
                "reflect probability must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self { p, q, alpha, i0 })
    }

    fn rho(&self) -> f64 {
        self.p / self.q
    }

    /// Expected visits to state `k >= 0`.
    pub fn visits(&self, k: usize) -> f64 {
        let Self { p, q, alpha, i0 } = *self;
        let rho = self.rho();
        let drift = p - q;
        let decay = rho.powi(-(i0 as i32));
        if k == 0 {
            return p * decay / (p - alpha * q);
        }
        let plateau_shift = p * (1.0 - alpha) * decay / (drift * (p - alpha * q));
        if k <= i0 {
            rho.powi(k as i32 - i0 as i32) / drift - plateau_shift
        } else {
            1.0 / drift - plateau_shift
        }
    }

    /// The flat visit count at and beyond the start position.
    pub fn plateau(&self) -> f64 {
        self.visits(self.i0.max(1))
    }

    /// Probability of escaping through the end.
    pub fn end_probability(&self) -> f64 {
        1.0 - self.p * (1.0 - self.alpha) * self.rho().powi(-(self.i0 as i32))
            / (self.p - self.alpha * self.q)
    }
}

/// Convenience wrapper matching the operation shape: evaluator plus end
/// probability.
pub fn lemma1_profile(
    p: f64,
    q: f64,
    alpha: f64,
    i0: usize,
) -> Result<(Lemma1Profile, f64), AbsorptionError> {
    let profile = Lemma1Profile::new(p, q, alpha, i0)?;
    let end = profile.end_probability();
    Ok((profile, end))
}
