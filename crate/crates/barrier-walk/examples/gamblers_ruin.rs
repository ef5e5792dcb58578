//! The classic two-absorbing-barrier interval: visit counts, ruin
//! probabilities, and mean game length, with the textbook values printed
//! alongside.
//!
//! ```bash
//! cargo run --example gamblers_ruin
//! ```

use barrier_walk::absorption::AbsorptionReport;
use barrier_walk::arrival::ArrivalProfile;
use barrier_walk::graph::{Barrier, BarrierId, IntervalEdge, StartPosition, WalkGraph};
use barrier_walk::time::TimeReport;

fn main() {
    // a fair game over 9 interior fortunes (ruin at 0, fortune 10), the
    // gambler holding 3 units
    let n = 9;
    let stake = 3;
    let graph = WalkGraph::new(
        vec![Barrier::new(0, 0.0, 1.0), Barrier::new(1, 0.0, 1.0)],
        vec![IntervalEdge::new(0, 1, n, 0.5, 0.5)],
        vec![],
    );
    graph.validate().into_result().expect("valid graph");
    let start = StartPosition::on_interval(0, 1, stake);

    let profile = ArrivalProfile::compute(&graph, start).unwrap();
    let absorption = AbsorptionReport::from_profile(&profile).unwrap();
    let total = (n + 1) as f64;
    println!("fair game, stake {stake} of {}:", n + 1);
    println!(
        "  ruin probability      {:.6}   (classic 1 - i/N = {:.6})",
        absorption.per_barrier[0],
        1.0 - stake as f64 / total
    );
    println!(
        "  win probability       {:.6}   (classic i/N = {:.6})",
        absorption.per_barrier[1],
        stake as f64 / total
    );

    let time = TimeReport::compute(&graph).unwrap();
    let duration = time
        .m_interval(BarrierId(0), BarrierId(1), stake)
        .unwrap();
    println!(
        "  expected duration     {:.6}   (classic i(N - i) = {:.6})",
        duration,
        (stake * (n + 1 - stake)) as f64
    );

    println!("  visits per fortune:");
    for k in 1..=n {
        println!(
            "    state {k}: {:.6}",
            profile.x_interval(BarrierId(0), BarrierId(1), k).unwrap()
        );
    }

    // tilt the odds and watch the ruin probability follow the drift
    println!("\nhouse edge sweep (p = win probability per round):");
    for &(p, q) in &[(0.45, 0.55), (0.48, 0.52), (0.5, 0.5), (0.55, 0.45)] {
        let graph = WalkGraph::new(
            vec![Barrier::new(0, 0.0, 1.0), Barrier::new(1, 0.0, 1.0)],
            vec![IntervalEdge::new(0, 1, n, p, q)],
            vec![],
        );
        let report = AbsorptionReport::compute(&graph, start).unwrap();
        println!("  p = {p:.2}: ruin {:.6}", report.per_barrier[0]);
    }
}
