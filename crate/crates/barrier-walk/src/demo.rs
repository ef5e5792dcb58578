//! Built-in demonstration documents, one per closed-form family.

use crate::closed_form::{
    CycleArc, CycleBarrier, CycleSpec, FiniteRay, MfbParams, Ray, StarSpec, TwoMfbLineSpec,
};
use crate::document::GraphDocument;
use crate::graph::StartPosition;

pub const DEMO_NAMES: [&str; 4] = ["remark2", "infinite-star", "cycle", "two-mfb-line"];

/// The named built-in document, or `None` for an unknown name.
pub fn demo_document(name: &str) -> Option<GraphDocument> {
    match name {
        // symmetric two-arm star with surely absorbing tips at distances
        // 4 and 3 from the center; mean exit time from the center is 12
        "remark2" => {
            let spec = StarSpec {
                center_stay: 0.0,
                center_absorb: 0.0,
                rays: vec![
                    (
                        0.5,
                        Ray::Finite(FiniteRay {
                            interior: 3,
                            p: 0.5,
                            q: 0.5,
                            tip_to_center: 0.0,
                            tip_stay: 0.0,
                            tip_absorb: 1.0,
                        }),
                    ),
                    (
                        0.5,
                        Ray::Finite(FiniteRay {
                            interior: 2,
                            p: 0.5,
                            q: 0.5,
                            tip_to_center: 0.0,
                            tip_stay: 0.0,
                            tip_absorb: 1.0,
                        }),
                    ),
                ],
            };
            Some(GraphDocument::from_graph(
                &spec.to_walk_graph(),
                StartPosition::at_barrier(0),
            ))
        }
        // single barrier with returning, escaping, and driftless rays
        "infinite-star" => {
            let spec = StarSpec {
                center_stay: 0.1,
                center_absorb: 0.2,
                rays: vec![
                    (0.3, Ray::Infinite(crate::closed_form::InfiniteRay { p: 0.2, q: 0.4 })),
                    (0.25, Ray::Infinite(crate::closed_form::InfiniteRay { p: 0.45, q: 0.15 })),
                    (0.15, Ray::Infinite(crate::closed_form::InfiniteRay { p: 0.3, q: 0.3 })),
                ],
            };
            Some(GraphDocument::from_graph(
                &spec.to_walk_graph(),
                spec.start_position(2),
            ))
        }
        // three barriers on a one-way cycle
        "cycle" => {
            let spec = CycleSpec {
                barriers: vec![
                    CycleBarrier {
                        stay: 0.1,
                        forward: 0.7,
                        absorb: 0.2,
                    };
                    3
                ],
                arcs: vec![
                    CycleArc {
                        interior: 2,
                        p: 0.5,
                        q: 0.5,
                    };
                    3
                ],
            };
            Some(GraphDocument::from_graph(
                &spec.to_walk_graph().expect("three barriers"),
                spec.start_position(),
            ))
        }
        // driftless integers with barriers at 0 and 4; expected
        // absorption time is infinite
        "two-mfb-line" => {
            let spec = TwoMfbLineSpec {
                p: 0.35,
                q: 0.35,
                origin: MfbParams {
                    up: 0.3,
                    down: 0.25,
                    stay: 0.15,
                    absorb: 0.3,
                },
                upper: MfbParams {
                    up: 0.2,
                    down: 0.35,
                    stay: 0.25,
                    absorb: 0.2,
                },
                upper_position: 4,
                start: 2,
            };
            Some(GraphDocument::from_graph(
                &spec.to_walk_graph().expect("valid spec"),
                spec.start_position(),
            ))
        }
        _ => None,
    }
}
