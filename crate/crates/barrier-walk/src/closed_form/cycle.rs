//! Positively oriented cycle graphs: each barrier either absorbs, holds,
//! or moves onto the arc toward the next barrier.

use super::ClosedFormError;
use crate::graph::{Barrier, IntervalEdge, StartPosition, WalkGraph};
use crate::kernels::geom_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleBarrier {
    pub stay: f64,
    /// Probability of stepping onto the outgoing arc.
    pub forward: f64,
    pub absorb: f64,
}

/// Arc `i -> i+1 (mod N+1)`; `p` steps forward along the cycle
/// orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleArc {
    pub interior: usize,
    pub p: f64,
    pub q: f64,
}

/// A cycle of `N+1` barriers and `N+1` arcs; the walk starts at barrier 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec {
    pub barriers: Vec<CycleBarrier>,
    pub arcs: Vec<CycleArc>,
}

impl CycleSpec {
    pub fn len(&self) -> usize {
        self.barriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.barriers.is_empty()
    }

    fn check(&self) -> Result<(), ClosedFormError> {
        if self.barriers.is_empty() || self.barriers.len() != self.arcs.len() {
            return Err(ClosedFormError::Unsupported(
                "cycle needs one arc per barrier".into(),
            ));
        }
        Ok(())
    }

    /// The equivalent general graph. The wrap arc from the last barrier
    /// back to barrier 0 becomes the interval `[0, N]` with its step
    /// probabilities swapped (interval states are numbered from the lower
    /// barrier, the arc runs the other way). Needs at least three
    /// barriers: fewer would demand a self-loop or a parallel edge.
    pub fn to_walk_graph(&self) -> Result<WalkGraph, ClosedFormError> {
        self.check()?;
        let count = self.barriers.len();
        if count < 3 {
            return Err(ClosedFormError::Unsupported(
                "cycles with fewer than three barriers have no loop-free graph form".into(),
            ));
        }
        let mut barriers: Vec<Barrier> = self
            .barriers
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let next = (i + 1) % count;
                Barrier::new(i, b.stay, b.absorb).with_interval_move(next, b.forward)
            })
            .collect();
        let mut intervals = Vec::with_capacity(count);
        for (i, arc) in self.arcs.iter().enumerate() {
            if i + 1 < count {
                intervals.push(IntervalEdge::new(i, i + 1, arc.interior, arc.p, arc.q));
            } else {
                // wrap arc: numbering reversed relative to the orientation
                intervals.push(IntervalEdge::new(0, count - 1, arc.interior, arc.q, arc.p));
            }
        }
        barriers.sort_by_key(|b| b.id);
        Ok(WalkGraph::new(barriers, intervals, vec![]))
    }

    pub fn start_position(&self) -> StartPosition {
        StartPosition::at_barrier(0)
    }
}

/// Closed-form cycle results, starting at barrier 0.
#[derive(Debug, Clone)]
pub struct CycleReport {
    spec: CycleSpec,
    /// Visit counts per barrier.
    pub barrier_visits: Vec<f64>,
    /// Probability of returning to barrier 0 before absorption.
    pub return_probability: f64,
    /// Mean absorption times per barrier from the one-directional
    /// coefficient recursion, solved around the cycle. The recursion uses
    /// the per-arc interior count as its own normalizer; see
    /// [`CycleReport::barrier_times_recursion`].
    pub barrier_times_recursion: Vec<f64>,
}

/// Evaluate the cycle closed forms.
///
/// Visit counts chain around the cycle: each barrier's count is the
/// previous one times a transfer ratio whose numerator carries the
/// arriving arc's pass-through weight and whose denominator carries the
/// departing arc's; certain absorption normalizes the total.
pub fn cycle_report(spec: &CycleSpec) -> Result<CycleReport, ClosedFormError> {
    spec.check()?;
    let count = spec.barriers.len();

    // pass-through weight of arc i: rho^n / g_{n+1}
    let pass: Vec<f64> = spec
        .arcs
        .iter()
        .map(|arc| {
            let rho = arc.p / arc.q;
            rho.powi(arc.interior as i32) / geom_sum(arc.interior + 1, rho)
        })
        .collect();

    let mut products = Vec::with_capacity(count);
    products.push(1.0);
    for i in 1..count {
        let transfer = pass[i - 1] * spec.barriers[i - 1].forward
            / (spec.barriers[i].absorb + pass[i] * spec.barriers[i].forward);
        products.push(products[i - 1] * transfer);
    }
    let weight: f64 = products
        .iter()
        .zip(&spec.barriers)
        .map(|(prod, b)| b.absorb * prod)
        .sum();
    let barrier_visits: Vec<f64> = products.iter().map(|prod| prod / weight).collect();
    let return_probability = 1.0 - weight;

    let barrier_times_recursion = times_by_recursion(spec)?;

    Ok(CycleReport {
        spec: spec.clone(),
        barrier_visits,
        return_probability,
        barrier_times_recursion,
    })
}

/// One-directional time recursion around the cycle, with the arc interior
/// count `n` as the coefficient normalizer and the driftless drift term
/// `-n/(2p)`.
fn times_by_recursion(spec: &CycleSpec) -> Result<Vec<f64>, ClosedFormError> {
    let count = spec.barriers.len();
    let mut lambda = Vec::with_capacity(count);
    let mut mu = Vec::with_capacity(count);
    for (b, arc) in spec.barriers.iter().zip(&spec.arcs) {
        if b.forward <= 0.0 {
            return Err(ClosedFormError::Unsupported(
                "the time recursion needs positive forward probabilities".into(),
            ));
        }
        let n = arc.interior as f64;
        lambda.push(1.0 + n * b.absorb / b.forward);
        mu.push(-(n / b.forward) * ((1.0 - b.absorb) + n / (2.0 * arc.p) * b.forward));
    }

    // unroll n_{i+1} = lambda_i n_i + mu_i around the cycle and close it
    let mut product_all = 1.0;
    let mut inhomogeneous = 0.0;
    for i in 0..count {
        inhomogeneous = inhomogeneous * lambda[i] + mu[i];
        product_all *= lambda[i];
    }
    if (1.0 - product_all).abs() < 1e-300 {
        return Err(ClosedFormError::Unsupported(
            "no absorption anywhere on the cycle".into(),
        ));
    }
    let n0 = inhomogeneous / (1.0 - product_all);
    let mut times = Vec::with_capacity(count);
    times.push(n0);
    for i in 0..count - 1 {
        let prev = times[i];
        times.push(lambda[i] * prev + mu[i]);
    }
    Ok(times)
}

impl CycleReport {
    /// Visit count of interior state `k` on arc `arc` (`1..=n`).
    pub fn visits(&self, arc: usize, k: usize) -> Result<f64, ClosedFormError> {
        let a = self
            .spec
            .arcs
            .get(arc)
            .ok_or_else(|| ClosedFormError::Param(format!("no arc {arc}")))?;
        if k < 1 || k > a.interior {
            return Err(ClosedFormError::Param(format!(
                "arc {arc} has no interior state {k}"
            )));
        }
        let rho = a.p / a.q;
        let n = a.interior;
        let share = rho.powi(k as i32) * geom_sum(n + 1 - k, rho) / geom_sum(n + 1, rho);
        Ok(share * self.spec.barriers[arc].forward / a.p * self.barrier_visits[arc])
    }
}
