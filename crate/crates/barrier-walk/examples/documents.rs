//! Build a graph in code, write it as a JSON document, read it back, and
//! analyze it — the same format the `barrier-walk` CLI consumes.
//!
//! ```bash
//! cargo run --example documents
//! ```

use barrier_walk::document::GraphDocument;
use barrier_walk::graph::{Barrier, HalfLine, IntervalEdge, StartPosition, WalkGraph};
use barrier_walk::report::AnalysisReport;

fn main() {
    let graph = WalkGraph::new(
        vec![
            Barrier::new(0, 0.2, 0.3)
                .with_interval_move(1, 0.4)
                .with_half_line_move(1, 0.1),
            Barrier::new(1, 0.0, 0.55).with_interval_move(0, 0.45),
        ],
        vec![IntervalEdge::new(0, 1, 3, 0.3, 0.3)],
        vec![HalfLine::new(0, 1, 0.2, 0.4)],
    );
    let start = StartPosition::on_interval(0, 1, 2);

    let doc = GraphDocument::from_graph(&graph, start);
    let json = doc.to_json();
    println!("document:\n{json}\n");

    let (parsed_graph, parsed_start) = GraphDocument::from_json(&json).unwrap().to_graph();
    assert_eq!(parsed_graph, graph);
    assert_eq!(parsed_start, start);
    parsed_graph.validate().into_result().expect("valid");

    let report = AnalysisReport::compute(&parsed_graph, parsed_start, &[]).unwrap();
    println!("analysis:\n{}", report.render_table());
    println!("as JSON:\n{}", report.to_json());
}
