//! Random walk on the integers with two barriers, at 0 and at `N`.
//!
//! As a graph this is three components: the interval between the
//! barriers, a half-line above `N`, and a half-line below 0 whose outward
//! direction is the original step toward minus infinity (so its drift
//! ratio is the reciprocal of the interior one). Since the two half-line
//! drifts are reciprocal, at least one is `>= 1` and the expected
//! absorption time is infinite for every start.

use super::ClosedFormError;
use crate::graph::{Barrier, HalfLine, IntervalEdge, StartPosition, WalkGraph};
use crate::kernels::geom_sum;

/// Barrier move distribution on the integer line: step up, step down,
/// hold, absorb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfbParams {
    pub up: f64,
    pub down: f64,
    pub stay: f64,
    pub absorb: f64,
}

impl MfbParams {
    fn sum(&self) -> f64 {
        self.up + self.down + self.stay + self.absorb
    }
}

/// Interior `(p, q, r)` walk with barriers at 0 and `upper_position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoMfbLineSpec {
    pub p: f64,
    pub q: f64,
    /// Barrier at integer 0.
    pub origin: MfbParams,
    /// Barrier at integer `upper_position`.
    pub upper: MfbParams,
    /// Position `N >= 2` of the upper barrier (the interval in between
    /// needs at least one interior state).
    pub upper_position: usize,
    /// Integer start position.
    pub start: i64,
}

impl TwoMfbLineSpec {
    fn check(&self) -> Result<(), ClosedFormError> {
        if self.upper_position < 2 {
            return Err(ClosedFormError::Unsupported(
                "the barriers must be at least two apart".into(),
            ));
        }
        for (name, m) in [("origin", self.origin), ("upper", self.upper)] {
            if !(m.up.is_finite() && m.up > 0.0)
                || !(m.down.is_finite() && m.down > 0.0)
                || m.absorb < 0.0
                || m.stay < 0.0
            {
                return Err(ClosedFormError::Param(format!(
                    "{name} barrier needs positive up/down and nonnegative stay/absorb"
                )));
            }
            if (m.sum() - 1.0).abs() > 1e-12 {
                return Err(ClosedFormError::Param(format!(
                    "{name} barrier distribution sums to {}",
                    m.sum()
                )));
            }
        }
        if !(self.p.is_finite() && self.p > 0.0)
            || !(self.q.is_finite() && self.q > 0.0)
            || self.p + self.q > 1.0 + 1e-12
        {
            return Err(ClosedFormError::Param(
                "interior walk needs p, q > 0 with p + q <= 1".into(),
            ));
        }
        Ok(())
    }

    /// The equivalent three-component graph: barrier 0 at integer 0,
    /// barrier 1 at integer `N`.
    pub fn to_walk_graph(&self) -> Result<WalkGraph, ClosedFormError> {
        self.check()?;
        let n = self.upper_position - 1;
        let barriers = vec![
            Barrier::new(0, self.origin.stay, self.origin.absorb)
                .with_interval_move(1, self.origin.up)
                .with_half_line_move(1, self.origin.down),
            Barrier::new(1, self.upper.stay, self.upper.absorb)
                .with_interval_move(0, self.upper.down)
                .with_half_line_move(1, self.upper.up),
        ];
        let intervals = vec![IntervalEdge::new(0, 1, n, self.p, self.q)];
        let half_lines = vec![
            // below 0: outward is the original downward step
            HalfLine::new(0, 1, self.q, self.p),
            // above N: outward is the original upward step
            HalfLine::new(1, 1, self.p, self.q),
        ];
        Ok(WalkGraph::new(barriers, intervals, half_lines))
    }

    /// The start as a graph position.
    pub fn start_position(&self) -> StartPosition {
        let n1 = self.upper_position as i64;
        if self.start <= 0 {
            StartPosition::on_half_line(0, 1, (-self.start) as usize)
        } else if self.start >= n1 {
            StartPosition::on_half_line(1, 1, (self.start - n1) as usize)
        } else {
            StartPosition::on_interval(0, 1, self.start as usize)
        }
    }

    fn rho(&self) -> f64 {
        self.p / self.q
    }
}

/// Closed-form results for the two-barrier line.
#[derive(Debug, Clone)]
pub struct TwoMfbLineReport {
    spec: TwoMfbLineSpec,
    /// Visit count of integer 0.
    pub visits_origin: f64,
    /// Visit count of integer `N`.
    pub visits_upper: f64,
    pub absorb_origin: f64,
    pub absorb_upper: f64,
    /// Escape mass below (only with inward interior drift `rho < 1`).
    pub escape_below: f64,
    /// Escape mass above (only with `rho > 1`).
    pub escape_above: f64,
    /// The expected absorption time, infinite for every start on this
    /// family.
    pub infinite_time_reason: String,
}

struct Pieces {
    g_full: f64,
    sigma_origin: f64,
    sigma_upper: f64,
    origin_block: f64,
    denominator: f64,
}

fn pieces(spec: &TwoMfbLineSpec) -> Pieces {
    let rho = spec.rho();
    let n = spec.upper_position - 1;
    let g_full = geom_sum(n + 1, rho);
    // barrier absorption weight, end-escape mass folded in
    let sigma_origin = spec.origin.absorb
        + if rho < 1.0 {
            spec.origin.down * (1.0 - rho)
        } else {
            0.0
        };
    let sigma_upper = spec.upper.absorb
        + if rho > 1.0 {
            spec.upper.up * (1.0 - rho.recip())
        } else {
            0.0
        };
    let origin_block = sigma_origin * g_full + spec.origin.up * rho.powi(n as i32);
    let denominator = sigma_upper * origin_block + sigma_origin * spec.upper.down;
    Pieces {
        g_full,
        sigma_origin,
        sigma_upper,
        origin_block,
        denominator,
    }
}

/// Barrier visit counts `(origin, upper)` for any integer start.
pub fn two_mfb_arrivals(spec: &TwoMfbLineSpec) -> Result<(f64, f64), ClosedFormError> {
    spec.check()?;
    let rho = spec.rho();
    let n1 = spec.upper_position;
    let n = n1 - 1;
    let p = pieces(spec);
    let i0 = spec.start;

    Ok(if i0 > 0 && (i0 as usize) < n1 {
        let i0 = i0 as usize;
        let y0 = (geom_sum(n1 - i0, rho) * p.sigma_upper + spec.upper.down) / p.denominator;
        let y1 = (p.sigma_origin * rho.powi((n1 - i0) as i32) * geom_sum(i0, rho)
            + spec.origin.up * rho.powi(n as i32))
            / p.denominator;
        (y0, y1)
    } else if i0 >= n1 as i64 {
        let k0 = (i0 - n1 as i64) as usize;
        // mass that ever reaches the upper barrier from above
        let reach = if rho > 1.0 { rho.powi(-(k0 as i32)) } else { 1.0 };
        (
            reach * spec.upper.down / p.denominator,
            reach * p.origin_block / p.denominator,
        )
    } else {
        let k0 = (-i0) as usize;
        let reach = if rho < 1.0 { rho.powi(k0 as i32) } else { 1.0 };
        (
            reach * (p.sigma_upper * p.g_full + spec.upper.down) / p.denominator,
            reach * spec.origin.up * rho.powi(n as i32) / p.denominator,
        )
    })
}

/// Full closed-form report for the two-barrier line.
pub fn two_mfb_line_report(spec: &TwoMfbLineSpec) -> Result<TwoMfbLineReport, ClosedFormError> {
    let (visits_origin, visits_upper) = two_mfb_arrivals(spec)?;
    let rho = spec.rho();
    let n1 = spec.upper_position as i64;

    let mut escape_below = 0.0;
    let mut escape_above = 0.0;
    if rho < 1.0 {
        escape_below = (1.0 - rho) * spec.origin.down * visits_origin;
        if spec.start < 0 {
            escape_below += 1.0 - rho.powi(-(spec.start as i32));
        }
    } else if rho > 1.0 {
        escape_above = (1.0 - rho.recip()) * spec.upper.up * visits_upper;
        if spec.start > n1 {
            escape_above += 1.0 - rho.powi(-((spec.start - n1) as i32));
        }
    }

    Ok(TwoMfbLineReport {
        spec: *spec,
        visits_origin,
        visits_upper,
        absorb_origin: spec.origin.absorb * visits_origin,
        absorb_upper: spec.upper.absorb * visits_upper,
        escape_below,
        escape_above,
        infinite_time_reason:
            "the half-line drifts are reciprocal, so one of them is at least 1".to_string(),
    })
}

impl TwoMfbLineReport {
    /// Visit count of any integer state.
    pub fn visits(&self, j: i64) -> f64 {
        let spec = &self.spec;
        let rho = spec.rho();
        let (p, q) = (spec.p, spec.q);
        let n1 = spec.upper_position as i64;
        let n = spec.upper_position - 1;
        let i0 = spec.start;
        let (y0, y1) = (self.visits_origin, self.visits_upper);

        if j == 0 {
            return y0;
        }
        if j == n1 {
            return y1;
        }
        if j > 0 && j < n1 {
            let k = j as usize;
            let g_full = geom_sum(n + 1, rho);
            let mut x = geom_sum(k, rho) / g_full * (spec.upper.down / q) * y1
                + rho.powi(k as i32) * geom_sum(n + 1 - k, rho) / g_full * (spec.origin.up / p)
                    * y0;
            if i0 > 0 && i0 < n1 {
                let i0 = i0 as usize;
                x += if k <= i0 {
                    geom_sum(k, rho) / q * geom_sum(n + 1 - i0, rho) / g_full
                } else {
                    rho.powi((k - i0) as i32) * geom_sum(i0, rho) * geom_sum(n + 1 - k, rho)
                        / (q * g_full)
                };
            }
            return x;
        }
        if j > n1 {
            // upper half-line, outward drift ratio rho
            let k = (j - n1) as usize;
            let entry = spec.upper.up;
            if i0 > n1 {
                let s0 = (i0 - n1) as usize;
                if rho > 1.0 {
                    let scale = rho.powi(-(s0 as i32));
                    scale * geom_sum(k.min(s0), rho) / q + entry / p * y1
                } else {
                    let particular = if k <= s0 {
                        geom_sum(k, rho) / q
                    } else {
                        rho.powi((k - s0) as i32) * geom_sum(s0, rho) / q
                    };
                    particular + entry * rho.powi(k as i32) / p * y1
                }
            } else if rho > 1.0 {
                entry / p * y1
            } else {
                entry * rho.powi(k as i32) / p * y1
            }
        } else {
            // lower half-line: outward step probability q, inward p,
            // drift ratio 1/rho
            let k = (-j) as usize;
            let rho_inv = 1.0 / rho;
            let entry = spec.origin.down;
            if i0 < 0 {
                let s0 = (-i0) as usize;
                if rho_inv > 1.0 {
                    let scale = rho_inv.powi(-(s0 as i32));
                    scale * geom_sum(k.min(s0), rho_inv) / p + entry / q * y0
                } else {
                    let particular = if k <= s0 {
                        geom_sum(k, rho_inv) / p
                    } else {
                        rho_inv.powi((k - s0) as i32) * geom_sum(s0, rho_inv) / p
                    };
                    particular + entry * rho_inv.powi(k as i32) / q * y0
                }
            } else if rho_inv > 1.0 {
                entry / q * y0
            } else {
                entry * rho_inv.powi(k as i32) / q * y0
            }
        }
    }

    /// Probability of ever reaching `j` above the upper barrier from `i`
    /// strictly between the barriers.
    pub fn arrival_probability(&self, i: i64, j: i64) -> Result<f64, ClosedFormError> {
        let n1 = self.spec.upper_position as i64;
        if !(0 < i && i < n1 && j > n1) {
            return Err(ClosedFormError::Param(format!(
                "the arrival form needs 0 < i < {n1} < j"
            )));
        }
        let cross = two_mfb_arrivals(&TwoMfbLineSpec {
            start: i,
            ..self.spec
        })?;
        let own = two_mfb_arrivals(&TwoMfbLineSpec {
            start: j,
            ..self.spec
        })?;
        let spec = &self.spec;
        let rho = spec.rho();
        let k = (j - n1) as usize;
        let numerator = if rho > 1.0 {
            spec.upper.up / spec.p * cross.1
        } else {
            spec.upper.up * rho.powi(k as i32) / spec.p * cross.1
        };
        let self_visits = if rho > 1.0 {
            rho.powi(-(k as i32)) * geom_sum(k, rho) / spec.q + spec.upper.up / spec.p * own.1
        } else {
            geom_sum(k, rho) / spec.q + spec.upper.up * rho.powi(k as i32) / spec.p * own.1
        };
        Ok(numerator / self_visits)
    }
}
