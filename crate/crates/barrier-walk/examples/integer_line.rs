//! The integers with two barriers: absorption splits across four sinks
//! (two barriers, two directions of escape) and the expected time is
//! infinite whenever the walk can wander off an axis without drift back.
//!
//! ```bash
//! cargo run --example integer_line
//! ```

use barrier_walk::closed_form::{two_mfb_line_report, MfbParams, TwoMfbLineSpec};
use barrier_walk::time::TimeReport;

fn main() {
    for (label, p, q) in [
        ("upward drift   (p > q)", 0.3, 0.2),
        ("driftless      (p = q)", 0.35, 0.35),
        ("downward drift (p < q)", 0.2, 0.3),
    ] {
        let spec = TwoMfbLineSpec {
            p,
            q,
            origin: MfbParams { up: 0.3, down: 0.25, stay: 0.15, absorb: 0.3 },
            upper: MfbParams { up: 0.2, down: 0.35, stay: 0.25, absorb: 0.2 },
            upper_position: 5,
            start: 2,
        };
        let report = two_mfb_line_report(&spec).unwrap();
        println!("{label}, barriers at 0 and 5, start at 2:");
        println!("  absorb at 0      {:.9}", report.absorb_origin);
        println!("  absorb at 5      {:.9}", report.absorb_upper);
        println!("  escape below     {:.9}", report.escape_below);
        println!("  escape above     {:.9}", report.escape_above);
        let total = report.absorb_origin
            + report.absorb_upper
            + report.escape_below
            + report.escape_above;
        println!("  total            {total:.12}");

        let graph = spec.to_walk_graph().unwrap();
        let time = TimeReport::compute(&graph).unwrap();
        println!(
            "  expected time    infinite ({})\n",
            time.infinite_reason().unwrap_or_default()
        );
    }

    // the visit profile across the whole line, one value per integer
    let spec = TwoMfbLineSpec {
        p: 0.3,
        q: 0.2,
        origin: MfbParams { up: 0.3, down: 0.25, stay: 0.15, absorb: 0.3 },
        upper: MfbParams { up: 0.2, down: 0.35, stay: 0.25, absorb: 0.2 },
        upper_position: 5,
        start: 2,
    };
    let report = two_mfb_line_report(&spec).unwrap();
    println!("visit counts along the line (upward drift case):");
    for j in -4i64..=9 {
        let marker = match j {
            0 | 5 => " <- barrier",
            2 => " <- start",
            _ => "",
        };
        println!("  {j:>3}: {:.6}{marker}", report.visits(j));
    }

    // probability of ever reaching a state above the upper barrier
    println!("\nprobability of ever reaching j, from i = 2:");
    for j in [6i64, 7, 10, 20] {
        println!("  j = {j:>2}: {:.6}", report.arrival_probability(2, j).unwrap());
    }
}
