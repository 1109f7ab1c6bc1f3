//! Persist a built multi-view graph as a versioned binary snapshot and load
//! it back, skipping the rebuild on later runs.
//!
//! ```bash
//! cargo run --example graph_snapshot
//! ```

use slicendice::ingest::compute_ief;
use slicendice::mvgraph::{build_graph, MultiViewGraph};
use slicendice::simulator::{generate, SimScenario};

fn main() {
    let scenario = SimScenario {
        entities: 120,
        attack_entities: 20,
        rng_seed: 1,
        ..SimScenario::defaults()
    };
    let (table, _) = generate(&scenario).unwrap();
    let ief = compute_ief(&table).unwrap();
    let graph = build_graph(&table, &ief);

    let path = std::env::temp_dir().join("slicendice_example.mvgs");
    let mut file = std::fs::File::create(&path).unwrap();
    graph.write_snapshot(&mut file).unwrap();
    drop(file);
    let bytes = std::fs::metadata(&path).unwrap().len();
    println!("snapshot: {} ({bytes} bytes)", path.display());

    let restored = MultiViewGraph::read_snapshot(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(graph, restored);
    println!(
        "restored {} entities / {} views; masses match",
        restored.entity_count(),
        restored.view_count()
    );

    // Tampering with the version byte is caught on load.
    let mut raw = std::fs::read(&path).unwrap();
    raw[4] = 0xFF;
    assert!(MultiViewGraph::read_snapshot(raw.as_slice()).is_err());
    println!("version check rejects a tampered snapshot");
}
