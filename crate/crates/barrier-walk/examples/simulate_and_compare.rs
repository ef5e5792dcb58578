//! Cross-validate the analytic solver against the trajectory simulator
//! on a graph that mixes every edge type, and show the deterministic
//! seeding contract.
//!
//! ```bash
//! cargo run --release --example simulate_and_compare
//! ```

use barrier_walk::graph::{Barrier, HalfLine, IntervalEdge, StartPosition, State, WalkGraph};
use barrier_walk::report::{AnalysisReport, Comparison, TimeSection};
use barrier_walk::sim::{simulate, SimConfig};

fn main() {
    // two barriers, an interval, a returning line, an escaping line, and
    // a driftless line
    let graph = WalkGraph::new(
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
    );
    graph.validate().into_result().expect("valid graph");
    let start = StartPosition::on_interval(0, 1, 3);
    let tracked = vec![
        State::interval(0, 1, 1),
        State::interval(0, 1, 2),
        State::half_line(0, 1, 1),
        State::half_line(0, 2, 2),
        State::half_line(1, 1, 1),
    ];

    let analysis = AnalysisReport::compute(&graph, start, &tracked).unwrap();
    let config = SimConfig {
        trajectories: 200_000,
        truncation_depth: 24,
        seed: 2024,
        tracked_states: tracked,
        ..SimConfig::default()
    };
    let sim = simulate(&graph, start, &config).unwrap();
    let start_time = match &analysis.time {
        TimeSection::Finite { start, .. } => Some(*start),
        TimeSection::Infinite { reason } => {
            println!("expected time: infinite ({reason})\n");
            None
        }
    };

    let comparison = Comparison::build(&analysis, &sim, start_time);
    print!("{}", comparison.render_table());
    println!(
        "\ncensored fraction {}, truncation events {}",
        sim.censored_fraction, sim.truncated_trajectories
    );

    // identical configuration, identical bits
    let again = simulate(&graph, start, &config).unwrap();
    let identical = sim
        .barrier_visits
        .iter()
        .zip(&again.barrier_visits)
        .all(|(a, b)| a.mean.to_bits() == b.mean.to_bits());
    println!("re-run with the same seed is bit-identical: {identical}");
}
