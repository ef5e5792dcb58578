//! Star graphs: one center barrier, rays that are either finite intervals
//! to tip barriers or infinite half-lines.

use std::collections::BTreeMap;

use super::ClosedFormError;
use crate::graph::{Barrier, HalfLine, IntervalEdge, StartPosition, WalkGraph};
use crate::kernels::geom_sum;

/// A finite ray: interval to a tip barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteRay {
    pub interior: usize,
    pub p: f64,
    pub q: f64,
    /// Tip move probability back toward the center.
    pub tip_to_center: f64,
    pub tip_stay: f64,
    pub tip_absorb: f64,
}

/// An infinite ray: half-line out of the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteRay {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ray {
    Finite(FiniteRay),
    Infinite(InfiniteRay),
}

/// A star: center barrier plus rays, each entered from the center with
/// its own probability. Rays are numbered from 1 in declaration order and
/// the walk starts at offset `i0` on ray 1 (`i0 = 0` is the center).
#[derive(Debug, Clone, PartialEq)]
pub struct StarSpec {
    pub center_stay: f64,
    pub center_absorb: f64,
    /// `(entry probability from the center, ray)` pairs.
    pub rays: Vec<(f64, Ray)>,
}

impl StarSpec {
    /// A single barrier on the integer line: two infinite rays, the
    /// negative axis renumbered so that its outward direction is the
    /// original step toward minus infinity.
    ///
    /// `positive`/`negative` give `(p, q)` in the original orientation
    /// (`p` steps toward plus infinity on both axes).
    pub fn integer_line(
        center_stay: f64,
        center_absorb: f64,
        entry_positive: f64,
        positive: (f64, f64),
        entry_negative: f64,
        negative: (f64, f64),
    ) -> Self {
        StarSpec {
            center_stay,
            center_absorb,
            rays: vec![
                (
                    entry_positive,
                    Ray::Infinite(InfiniteRay {
                        p: positive.0,
                        q: positive.1,
                    }),
                ),
                (
                    entry_negative,
                    Ray::Infinite(InfiniteRay {
                        p: negative.1,
                        q: negative.0,
                    }),
                ),
            ],
        }
    }

    /// The equivalent general graph: finite rays become barriers
    /// `1, 2, ...` in ray order, infinite rays become half-lines with
    /// labels `1, 2, ...` in ray order.
    pub fn to_walk_graph(&self) -> WalkGraph {
        let mut center = Barrier::new(0, self.center_stay, self.center_absorb);
        let mut barriers = Vec::new();
        let mut intervals = Vec::new();
        let mut half_lines = Vec::new();
        let mut next_barrier = 1;
        let mut next_label = 1;
        for &(entry, ray) in &self.rays {
            match ray {
                Ray::Finite(r) => {
                    let id = next_barrier;
                    next_barrier += 1;
                    center = center.with_interval_move(id, entry);
                    barriers.push(
                        Barrier::new(id, r.tip_stay, r.tip_absorb)
                            .with_interval_move(0, r.tip_to_center),
                    );
                    intervals.push(IntervalEdge::new(0, id, r.interior, r.p, r.q));
                }
                Ray::Infinite(r) => {
                    let label = next_label;
                    next_label += 1;
                    center = center.with_half_line_move(label, entry);
                    half_lines.push(HalfLine::new(0, label, r.p, r.q));
                }
            }
        }
        let mut all = vec![center];
        all.extend(barriers);
        WalkGraph::new(all, intervals, half_lines)
    }

    /// Start position at offset `i0` on ray 1.
    pub fn start_position(&self, i0: usize) -> StartPosition {
        match self.rays.first() {
            Some((_, Ray::Finite(_))) => StartPosition::on_interval(0, 1, i0),
            Some((_, Ray::Infinite(_))) => StartPosition::on_half_line(0, 1, i0),
            None => StartPosition::at_barrier(0),
        }
    }

    fn finite_rays(&self) -> Result<Vec<(f64, FiniteRay)>, ClosedFormError> {
        self.rays
            .iter()
            .map(|&(entry, ray)| match ray {
                Ray::Finite(r) => Ok((entry, r)),
                Ray::Infinite(_) => Err(ClosedFormError::Unsupported(
                    "finite-star forms need all rays finite".into(),
                )),
            })
            .collect()
    }

    fn infinite_rays(&self) -> Result<Vec<(f64, InfiniteRay)>, ClosedFormError> {
        self.rays
            .iter()
            .map(|&(entry, ray)| match ray {
                Ray::Infinite(r) => Ok((entry, r)),
                Ray::Finite(_) => Err(ClosedFormError::Unsupported(
                    "infinite-star forms need all rays infinite".into(),
                )),
            })
            .collect()
    }
}

/// Barrier visit counts `(center, tip_1, .., tip_N)` for an all-finite
/// star, starting at offset `i0` on ray 1.
///
/// Each tip couples to the center through a per-ray transfer ratio; the
/// start offset adds a source term on ray 1 and absorption certainty
/// normalizes the total.
pub fn finite_star_arrivals(spec: &StarSpec, i0: usize) -> Result<Vec<f64>, ClosedFormError> {
    let rays = spec.finite_rays()?;
    if rays.is_empty() {
        return Err(ClosedFormError::Unsupported("star needs rays".into()));
    }
    let first = &rays[0].1;
    if i0 > first.interior + 1 {
        return Err(ClosedFormError::Param(format!(
            "start offset {i0} exceeds ray 1 length {}",
            first.interior + 1
        )));
    }

    let transfer: Vec<f64> = rays
        .iter()
        .map(|(entry, r)| {
            let rho = r.p / r.q;
            rho.powi(r.interior as i32) * entry
                / (r.tip_absorb * geom_sum(r.interior + 1, rho) + r.tip_to_center)
        })
        .collect();
    let rho1 = first.p / first.q;
    let source = rho1.powi((first.interior + 1 - i0) as i32) * geom_sum(i0, rho1)
        / (first.tip_absorb * geom_sum(first.interior + 1, rho1) + first.tip_to_center);

    let mut absorb_weight = spec.center_absorb; // zeta_0 = 1
    for ((_, r), zeta) in rays.iter().zip(&transfer) {
        absorb_weight += r.tip_absorb * zeta;
    }
    let y0 = (1.0 - rays[0].1.tip_absorb * source) / absorb_weight;

    let mut visits = Vec::with_capacity(rays.len() + 1);
    visits.push(y0);
    for (ray_index, zeta) in transfer.iter().enumerate() {
        let mut y = zeta * y0;
        if ray_index == 0 {
            y += source;
        }
        visits.push(y);
    }
    Ok(visits)
}

/// Mean absorption time from the center of an all-finite star whose tips
/// absorb surely.
pub fn finite_star_absorbing_tips_time(spec: &StarSpec) -> Result<f64, ClosedFormError> {
    let rays = spec.finite_rays()?;
    for (_, r) in &rays {
        if (r.tip_absorb - 1.0).abs() > 1e-12 {
            return Err(ClosedFormError::Unsupported(
                "tips must absorb surely".into(),
            ));
        }
    }
    let mut numerator = 1.0 - spec.center_absorb;
    let mut denominator = 1.0 - spec.center_stay;
    for (entry, r) in &rays {
        let rho = r.p / r.q;
        let g_full = geom_sum(r.interior + 1, rho);
        let escape_ratio = geom_sum(r.interior, rho) / g_full;
        let drift_weight = -crate::kernels::weighted_geom(r.interior, rho) / (r.q * g_full);
        numerator -= drift_weight * entry;
        denominator -= escape_ratio * entry;
    }
    Ok(numerator / denominator)
}

/// Everything known in closed form for an all-infinite star.
#[derive(Debug, Clone)]
pub struct InfiniteStarReport {
    rays: Vec<(f64, InfiniteRay)>,
    i0: usize,
    /// `s_0 + sum over escaping rays of (1 - 1/rho) * entry`.
    pub escape_denominator: f64,
    /// Visit count of the center.
    pub center_visits: f64,
    /// Absorption probability at the center.
    pub absorb_center: f64,
    /// Escape probability per ray index (1-based), escaping rays only.
    pub end_probabilities: BTreeMap<usize, f64>,
    /// Mean absorption time from the center; `None` when any ray drifts
    /// outward or is driftless.
    pub center_time: Option<f64>,
}

/// Closed-form report for an all-infinite star, starting at offset `i0`
/// on ray 1.
pub fn infinite_star_report(
    spec: &StarSpec,
    i0: usize,
) -> Result<InfiniteStarReport, ClosedFormError> {
    let rays = spec.infinite_rays()?;
    if rays.is_empty() {
        return Err(ClosedFormError::Unsupported("star needs rays".into()));
    }
    let s0 = spec.center_absorb;

    let mut denom = s0;
    for (entry, r) in &rays {
        let rho = r.p / r.q;
        if rho > 1.0 {
            denom += (1.0 - rho.recip()) * entry;
        }
    }

    let rho1 = rays[0].1.p / rays[0].1.q;
    let start_mass = if rho1 > 1.0 {
        rho1.powi(-(i0 as i32))
    } else {
        1.0
    };
    let center_visits = start_mass / denom;

    let mut end_probabilities = BTreeMap::new();
    for (index, (entry, r)) in rays.iter().enumerate() {
        let rho = r.p / r.q;
        if rho > 1.0 {
            let mut mass = (1.0 - rho.recip()) * entry * center_visits;
            if index == 0 {
                mass += 1.0 - start_mass;
            }
            end_probabilities.insert(index + 1, mass);
        }
    }

    let center_time = if rays.iter().all(|(_, r)| r.p < r.q) {
        let mut t = (1.0 - s0) / s0;
        for (entry, r) in &rays {
            t += entry / (r.q - r.p) / s0;
        }
        Some(t)
    } else {
        None
    };

    Ok(InfiniteStarReport {
        rays,
        i0,
        escape_denominator: denom,
        center_visits,
        absorb_center: s0 * center_visits,
        end_probabilities,
        center_time,
    })
}

impl InfiniteStarReport {
    /// Visit count of state `k >= 1` on ray `ray` (1-based).
    pub fn visits(&self, ray: usize, k: usize) -> Result<f64, ClosedFormError> {
        let (entry, r) = self
            .rays
            .get(ray - 1)
            .ok_or_else(|| ClosedFormError::Param(format!("no ray {ray}")))?;
        if k == 0 {
            return Ok(self.center_visits);
        }
        let rho = r.p / r.q;
        let y0 = self.center_visits;
        if ray == 1 && self.i0 >= 1 {
            let i0 = self.i0;
            Ok(if rho > 1.0 {
                let scale = rho.powi(-(i0 as i32));
                let particular = scale * geom_sum(k.min(i0), rho) / r.q;
                particular + entry / r.p * y0
            } else {
                let particular = if k <= i0 {
                    geom_sum(k, rho) / r.q
                } else {
                    rho.powi((k - i0) as i32) * geom_sum(i0, rho) / r.q
                };
                particular + entry * rho.powi(k as i32) / r.p * y0
            })
        } else if rho > 1.0 {
            Ok(entry / r.p * y0)
        } else {
            Ok(entry * rho.powi(k as i32) / r.p * y0)
        }
    }

    /// Probability of ever reaching state `j >= 1` on a driftless ray,
    /// starting from the center.
    pub fn center_arrival_probability(
        &self,
        ray: usize,
        j: usize,
    ) -> Result<f64, ClosedFormError> {
        let (entry, r) = self
            .rays
            .get(ray - 1)
            .ok_or_else(|| ClosedFormError::Param(format!("no ray {ray}")))?;
        if (r.p - r.q).abs() > 1e-15 {
            return Err(ClosedFormError::Unsupported(
                "the arrival-probability form holds for driftless rays".into(),
            ));
        }
        Ok(entry / (j as f64 * self.escape_denominator + entry))
    }

    /// Mean absorption time from state `k` on ray `ray`, when finite.
    pub fn time(&self, ray: usize, k: usize) -> Option<f64> {
        let (_, r) = self.rays.get(ray - 1)?;
        let n0 = self.center_time?;
        Some(n0 + k as f64 / (r.q - r.p))
    }
}
