//! A star of interval rays: the closed-form visit counts and the
//! product rule for the mean exit time from the center, both checked
//! against the general solver.
//!
//! ```bash
//! cargo run --example finite_star
//! ```

use barrier_walk::arrival::ArrivalProfile;
use barrier_walk::closed_form::{
    finite_star_absorbing_tips_time, finite_star_arrivals, FiniteRay, Ray, StarSpec,
};
use barrier_walk::time::TimeReport;

fn main() {
    // three rays with different lengths, drifts and tip behavior; the
    // walk starts two steps out on ray 1
    let spec = StarSpec {
        center_stay: 0.1,
        center_absorb: 0.15,
        rays: vec![
            (
                0.3,
                Ray::Finite(FiniteRay {
                    interior: 4,
                    p: 0.35,
                    q: 0.25,
                    tip_to_center: 0.25,
                    tip_stay: 0.15,
                    tip_absorb: 0.6,
                }),
            ),
            (
                0.25,
                Ray::Finite(FiniteRay {
                    interior: 2,
                    p: 0.3,
                    q: 0.3,
                    tip_to_center: 0.5,
                    tip_stay: 0.0,
                    tip_absorb: 0.5,
                }),
            ),
            (
                0.2,
                Ray::Finite(FiniteRay {
                    interior: 3,
                    p: 0.2,
                    q: 0.4,
                    tip_to_center: 0.0,
                    tip_stay: 0.0,
                    tip_absorb: 1.0,
                }),
            ),
        ],
    };
    let i0 = 2;
    let closed = finite_star_arrivals(&spec, i0).unwrap();
    let graph = spec.to_walk_graph();
    let profile = ArrivalProfile::compute(&graph, spec.start_position(i0)).unwrap();

    println!("visit counts, closed form vs general solver:");
    for (b, (c, g)) in closed.iter().zip(profile.barrier_visits()).enumerate() {
        let name = if b == 0 { "center" } else { "tip" };
        println!("  {name} {b}: {c:.12} vs {g:.12}  (diff {:.2e})", (c - g).abs());
    }

    // with surely absorbing tips and symmetric steps, the mean exit time
    // from the center of a two-arm star is the product of the arm lengths
    println!("\nmean exit time from the center, two symmetric arms:");
    for (a, b) in [(2usize, 5usize), (3, 4), (6, 6)] {
        let arm = |interior: usize| {
            Ray::Finite(FiniteRay {
                interior,
                p: 0.5,
                q: 0.5,
                tip_to_center: 0.0,
                tip_stay: 0.0,
                tip_absorb: 1.0,
            })
        };
        let star = StarSpec {
            center_stay: 0.0,
            center_absorb: 0.0,
            rays: vec![(0.5, arm(b - 1)), (0.5, arm(a - 1))],
        };
        let closed = finite_star_absorbing_tips_time(&star).unwrap();
        let graph = star.to_walk_graph();
        let general = TimeReport::compute(&graph).unwrap().barrier_times().unwrap()[0];
        println!("  arms {a} and {b}: {closed:.9} (= {a}*{b}), general {general:.9}");
    }
}
