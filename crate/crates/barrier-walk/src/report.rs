//! Assembled reports with a stable serialization schema, shared by the
//! command-line tool and the library examples.
//!
//! The analysis schema has four fixed top-level keys: `y` (visit counts
//! per barrier), `x` (visit counts at requested states, keyed by flat
//! state address), `absorption` (per-barrier masses, per-end masses,
//! total), and `time` (either `status: "finite"` with the per-barrier
//! vector or `status: "infinite"` with a reason; never a sentinel
//! number). Numbers round-trip exactly through JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorption::{AbsorptionError, AbsorptionReport};
use crate::arrival::{ArrivalError, ArrivalProfile};
use crate::graph::{GraphError, StartPosition, State, WalkGraph};
use crate::kernels::SolveError;
use crate::sim::{SimEstimate, SimReport};
use crate::time::{TimeError, TimeReport};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Arrival(#[from] ArrivalError),
    #[error(transparent)]
    Absorption(#[from] AbsorptionError),
    #[error(transparent)]
    Time(#[from] TimeError),
}

impl ReportError {
    /// Whether the underlying cause is a singular barrier system.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            ReportError::Arrival(ArrivalError::Singular(SolveError::Singular { .. }))
                | ReportError::Absorption(AbsorptionError::Arrival(ArrivalError::Singular(_)))
                | ReportError::Time(TimeError::Singular(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSection {
    pub barriers: Vec<f64>,
    pub ends: BTreeMap<String, f64>,
    pub total_mfb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TimeSection {
    Finite {
        n: Vec<f64>,
        m: BTreeMap<String, f64>,
        start: f64,
    },
    Infinite {
        reason: String,
    },
}

/// Analytic results for one document: stable JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub y: Vec<f64>,
    pub x: BTreeMap<String, f64>,
    pub absorption: AbsorptionSection,
    pub time: TimeSection,
}

impl AnalysisReport {
    pub fn compute(
        graph: &WalkGraph,
        start: StartPosition,
        states: &[State],
    ) -> Result<Self, ReportError> {
        let profile = ArrivalProfile::compute(graph, start)?;
        let absorption = AbsorptionReport::from_profile(&profile)?;

        let mut x = BTreeMap::new();
        for state in states {
            x.insert(state.to_string(), profile.state_visits(state)?);
        }

        let time_report = TimeReport::compute(graph)?;
        let time = match time_report.barrier_times() {
            Some(barrier_times) => match time_report.time_from(start) {
                Ok(start_time) => {
                    let mut m = BTreeMap::new();
                    for state in states {
                        let value = match *state {
                            State::Barrier(b) => Ok(barrier_times[b.0]),
                            State::Interval { from, to, position } => {
                                time_report.m_interval(from, to, position)
                            }
                            State::HalfLine {
                                owner,
                                label,
                                position,
                            } => time_report.m_halfline(owner, label, position),
                        };
                        // states on an unentered outward-drift half-line
                        // have no finite entry even in a finite report
                        if let Ok(value) = value {
                            m.insert(state.to_string(), value);
                        }
                    }
                    TimeSection::Finite {
                        n: barrier_times.to_vec(),
                        m,
                        start: start_time,
                    }
                }
                Err(TimeError::Infinite { reason }) => TimeSection::Infinite { reason },
                Err(other) => return Err(other.into()),
            },
            None => TimeSection::Infinite {
                reason: time_report.infinite_reason().expect("not finite"),
            },
        };

        Ok(AnalysisReport {
            y: profile.barrier_visits().to_vec(),
            x,
            absorption: AbsorptionSection {
                barriers: absorption.per_barrier.clone(),
                ends: absorption
                    .per_end
                    .iter()
                    .map(|(&(owner, label), &mass)| (format!("{owner}:{label}"), mass))
                    .collect(),
                total_mfb: absorption.total_mfb,
            },
            time,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("barrier visit counts:\n");
        for (i, y) in self.y.iter().enumerate() {
            out.push_str(&format!("  y[{i}] = {y:.12}\n"));
        }
        if !self.x.is_empty() {
            out.push_str("state visit counts:\n");
            for (state, value) in &self.x {
                out.push_str(&format!("  {state} = {value:.12}\n"));
            }
        }
        out.push_str("absorption:\n");
        for (i, mass) in self.absorption.barriers.iter().enumerate() {
            out.push_str(&format!("  barrier {i}: {mass:.12}\n"));
        }
        for (end, mass) in &self.absorption.ends {
            out.push_str(&format!("  end {end}: {mass:.12}\n"));
        }
        out.push_str(&format!(
            "  total at barriers: {:.12}\n",
            self.absorption.total_mfb
        ));
        match &self.time {
            TimeSection::Finite { n, m, start } => {
                out.push_str("expected absorption time:\n");
                for (i, t) in n.iter().enumerate() {
                    out.push_str(&format!("  from barrier {i}: {t:.12}\n"));
                }
                for (state, t) in m {
                    out.push_str(&format!("  from {state}: {t:.12}\n"));
                }
                out.push_str(&format!("  from start: {start:.12}\n"));
            }
            TimeSection::Infinite { reason } => {
                out.push_str(&format!("expected absorption time: infinite ({reason})\n"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOut {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

impl From<SimEstimate> for EstimateOut {
    fn from(e: SimEstimate) -> Self {
        Self {
            mean: e.mean,
            stderr: e.stderr,
            count: e.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimAbsorptionSection {
    pub barriers: Vec<EstimateOut>,
    pub ends: BTreeMap<String, EstimateOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTimeSection {
    pub mean: f64,
    pub stderr: f64,
    pub reliable: bool,
}

/// Simulation results: stable JSON schema mirroring the analysis keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub trajectories: u64,
    pub seed: u64,
    pub step_cap: u64,
    pub truncation_depth: usize,
    pub y: Vec<EstimateOut>,
    pub x: BTreeMap<String, EstimateOut>,
    pub absorption: SimAbsorptionSection,
    pub time: SimTimeSection,
    pub censored_fraction: f64,
}

impl SimulationOutput {
    pub fn from_report(report: &SimReport, seed: u64, step_cap: u64, depth: usize) -> Self {
        Self {
            trajectories: report.trajectories,
            seed,
            step_cap,
            truncation_depth: depth,
            y: report.barrier_visits.iter().map(|&e| e.into()).collect(),
            x: report
                .state_visits
                .iter()
                .map(|(state, est)| (state.to_string(), (*est).into()))
                .collect(),
            absorption: SimAbsorptionSection {
                barriers: report
                    .absorbed_at_barrier
                    .iter()
                    .map(|&e| e.into())
                    .collect(),
                ends: report
                    .absorbed_at_end
                    .iter()
                    .map(|(&(owner, label), &est)| (format!("{owner}:{label}"), est.into()))
                    .collect(),
            },
            time: SimTimeSection {
                mean: report.time.mean,
                stderr: report.time.stderr,
                reliable: report.time_reliable,
            },
            censored_fraction: report.censored_fraction,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// One analytic-versus-estimate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub quantity: String,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z: f64,
}

/// Tabulated comparison of every quantity present on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub max_abs_z: f64,
}

impl Comparison {
    pub fn build(
        analysis: &AnalysisReport,
        sim: &SimReport,
        start_time: Option<f64>,
    ) -> Comparison {
        let mut rows = Vec::new();
        let mut push = |quantity: String, analytic: f64, est: &SimEstimate| {
            let z = est.z_score(analytic);
            rows.push(CompareRow {
                quantity,
                analytic,
                estimate: est.mean,
                stderr: est.stderr,
                z,
            });
        };

        for (i, (analytic, est)) in analysis.y.iter().zip(&sim.barrier_visits).enumerate() {
            push(format!("y[{i}]"), *analytic, est);
        }
        for (state, est) in &sim.state_visits {
            if let Some(analytic) = analysis.x.get(&state.to_string()) {
                push(format!("x[{state}]"), *analytic, est);
            }
        }
        for (i, (analytic, est)) in analysis
            .absorption
            .barriers
            .iter()
            .zip(&sim.absorbed_at_barrier)
            .enumerate()
        {
            push(format!("absorb[barrier {i}]"), *analytic, est);
        }
        for (&(owner, label), est) in &sim.absorbed_at_end {
            if let Some(analytic) = analysis.absorption.ends.get(&format!("{owner}:{label}")) {
                push(format!("absorb[end {owner}:{label}]"), *analytic, est);
            }
        }
        if let (Some(analytic), true) = (start_time, sim.time_reliable) {
            push("time[start]".to_string(), analytic, &sim.time);
        }

        let max_abs_z = rows.iter().fold(0.0f64, |m, r| m.max(r.z));
        Comparison { rows, max_abs_z }
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>18} {:>18} {:>12} {:>8}\n",
            "quantity", "analytic", "estimate", "stderr", "z"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<24} {:>18.12} {:>18.12} {:>12.3e} {:>8.2}\n",
                row.quantity, row.analytic, row.estimate, row.stderr, row.z
            ));
        }
        out.push_str(&format!("max |z| = {:.2}\n", self.max_abs_z));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
