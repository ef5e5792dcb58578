//! Half-lines out of a single barrier: where does the walker end up when
//! some directions drift away forever?
//!
//! ```bash
//! cargo run --example infinite_star
//! ```

use barrier_walk::absorption::AbsorptionReport;
use barrier_walk::arrival::ArrivalProfile;
use barrier_walk::closed_form::{infinite_star_report, InfiniteRay, Ray, StarSpec};
use barrier_walk::graph::BarrierId;

fn main() {
    // ray 1 escapes (drift out), ray 2 returns, ray 3 is driftless
    let spec = StarSpec {
        center_stay: 0.1,
        center_absorb: 0.2,
        rays: vec![
            (0.25, Ray::Infinite(InfiniteRay { p: 0.45, q: 0.15 })),
            (0.3, Ray::Infinite(InfiniteRay { p: 0.2, q: 0.4 })),
            (0.15, Ray::Infinite(InfiniteRay { p: 0.3, q: 0.3 })),
        ],
    };
    let i0 = 3; // start three steps out on the escaping ray
    let report = infinite_star_report(&spec, i0).unwrap();

    println!("start {i0} steps out on the escaping ray:");
    println!("  center visits        {:.9}", report.center_visits);
    println!("  absorbed at barrier  {:.9}", report.absorb_center);
    for (ray, mass) in &report.end_probabilities {
        println!("  escaped through ray {ray}: {mass:.9}");
    }
    let total: f64 = report.absorb_center + report.end_probabilities.values().sum::<f64>();
    println!("  total                {total:.12}");

    // the same numbers through the general machinery
    let graph = spec.to_walk_graph();
    let profile = ArrivalProfile::compute(&graph, spec.start_position(i0)).unwrap();
    let absorption = AbsorptionReport::from_profile(&profile).unwrap();
    println!("\ngeneral solver agrees:");
    println!("  center visits        {:.9}", profile.barrier_visit(BarrierId(0)));
    println!("  absorbed at barrier  {:.9}", absorption.per_barrier[0]);
    for (&(owner, label), mass) in &absorption.per_end {
        println!("  escaped through [{owner},{label}): {mass:.9}");
    }

    // visit profile along the driftless ray from the center: constant,
    // because every level is reached with the same expected count
    println!("\nvisit counts along each ray (start at the center):");
    let report0 = infinite_star_report(&spec, 0).unwrap();
    for ray in 1..=3usize {
        let values: Vec<String> = (1..=6)
            .map(|k| format!("{:.5}", report0.visits(ray, k).unwrap()))
            .collect();
        println!("  ray {ray}: {}", values.join("  "));
    }

    // the probability of ever reaching level j on the driftless ray
    // decays like 1/j
    println!("\narrival probability on the driftless ray:");
    for j in [1usize, 2, 5, 10, 100] {
        println!(
            "  level {j:>3}: {:.6}",
            report0.center_arrival_probability(3, j).unwrap()
        );
    }
}
