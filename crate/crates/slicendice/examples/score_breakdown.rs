//! Score one block by hand: per-view suspiciousness contributions and how
//! the alternative metrics rate the same block.
//!
//! ```bash
//! cargo run --example score_breakdown
//! ```

use slicendice::ingest::{compute_ief, load_attribute_table, TableSchema};
use slicendice::metric::{baseline_score, suspiciousness, BaselineKind};
use slicendice::mvgraph::{build_graph, BlockState};

fn main() {
    // Four accounts sharing a login host and a payment handle; six others
    // with unremarkable overlap.
    let csv = "\
id,login_host,payout_handle
a1,10.0.0.9,pay-77
a2,10.0.0.9,pay-77
a3,10.0.0.9,pay-77
a4,10.0.0.9,pay-77
b1,edge-1,alpha
b2,edge-1,alpha
b3,edge-2,beta
b4,edge-2,beta
b5,edge-3,gamma
b6,edge-3,gamma
";
    let table = load_attribute_table(csv.as_bytes(), &TableSchema::default()).unwrap();
    let ief = compute_ief(&table).unwrap();
    let graph = build_graph(&table, &ief);

    let ring = BlockState::from_nodes(&graph, &[0, 1, 2, 3]).unwrap();
    let views = vec![0, 1];
    let score = suspiciousness(&ring, &graph, &views).unwrap();
    println!("suspiciousness {:.3}", score.total);
    for pv in &score.per_view {
        println!(
            "  view {} ({}): f = {:.3}  mass {:.1}  density {:.1} vs background {:.1}",
            pv.view,
            graph.view(pv.view).name(),
            pv.contribution,
            pv.mass,
            pv.density,
            pv.background
        );
    }

    for kind in BaselineKind::ALL {
        let value = baseline_score(kind, &ring, &graph, &views).unwrap();
        println!("{:<8} {value:.3}", kind.label());
    }

    // A pair from the background scores far lower than the ring.
    let pair = BlockState::from_nodes(&graph, &[4, 5]).unwrap();
    let pair_score = suspiciousness(&pair, &graph, &views).unwrap();
    println!("background pair: {:.3}", pair_score.total);
    assert!(score.total > pair_score.total);
}
