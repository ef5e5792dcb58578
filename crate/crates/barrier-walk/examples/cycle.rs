//! A one-way cycle of barriers: chained visit counts, the return
//! probability, and the two routes to the mean absorption time.
//!
//! ```bash
//! cargo run --example cycle
//! ```

use barrier_walk::arrival::ArrivalProfile;
use barrier_walk::closed_form::{cycle_report, CycleArc, CycleBarrier, CycleSpec};
use barrier_walk::graph::BarrierId;
use barrier_walk::sim::{simulate, SimConfig};
use barrier_walk::time::TimeReport;

fn main() {
    let spec = CycleSpec {
        barriers: vec![
            CycleBarrier { stay: 0.1, forward: 0.7, absorb: 0.2 },
            CycleBarrier { stay: 0.05, forward: 0.6, absorb: 0.35 },
            CycleBarrier { stay: 0.2, forward: 0.5, absorb: 0.3 },
        ],
        arcs: vec![
            CycleArc { interior: 2, p: 0.5, q: 0.3 },
            CycleArc { interior: 3, p: 0.2, q: 0.4 },
            CycleArc { interior: 1, p: 0.45, q: 0.45 },
        ],
    };
    let report = cycle_report(&spec).unwrap();
    let graph = spec.to_walk_graph().unwrap();
    let profile = ArrivalProfile::compute(&graph, spec.start_position()).unwrap();

    println!("visit counts around the cycle (closed form vs general):");
    for (b, (c, g)) in report
        .barrier_visits
        .iter()
        .zip(profile.barrier_visits())
        .enumerate()
    {
        println!("  barrier {b}: {c:.12} vs {g:.12}");
    }
    println!(
        "return probability to the start barrier: {:.9}",
        report.return_probability
    );

    // mean absorption time: the general solver is exact; the chained
    // one-directional recursion uses per-arc normalizers that only
    // approximate it, so a simulation arbitrates
    let general = TimeReport::compute(&graph).unwrap();
    let n0 = general.barrier_times().unwrap()[0];
    let recursion = report.barrier_times_recursion[0];
    println!("\nmean absorption time from barrier 0:");
    println!("  general solver             {n0:.9}");
    println!("  one-directional recursion  {recursion:.9}");

    let config = SimConfig {
        trajectories: 200_000,
        seed: 17,
        ..SimConfig::default()
    };
    let sim = simulate(&graph, spec.start_position(), &config).unwrap();
    println!(
        "  simulation                 {:.9} +- {:.9}  (z against general: {:.2})",
        sim.time.mean,
        sim.time.stderr,
        sim.time.z_score(n0)
    );
    println!(
        "  simulation y0              {:.9} +- {:.9}  (analytic {:.9})",
        sim.barrier_visits[0].mean,
        sim.barrier_visits[0].stderr,
        profile.barrier_visit(BarrierId(0))
    );
}
