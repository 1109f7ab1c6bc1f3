//! End to end: simulate a planted attack, build the multi-view graph, mine
//! suspicious blocks, and check the top block against the ground truth.
//!
//! ```bash
//! cargo run --release --example mine_simulated
//! ```

use std::collections::BTreeSet;

use slicendice::ingest::compute_ief;
use slicendice::mvgraph::build_graph;
use slicendice::search::{mine, MinerConfig};
use slicendice::simulator::{generate, SimScenario};

fn main() {
    let scenario = SimScenario {
        rng_seed: 7,
        ..SimScenario::defaults()
    };
    let (table, truth) = generate(&scenario).unwrap();

    let ief = compute_ief(&table).unwrap();
    let graph = build_graph(&table, &ief);
    println!(
        "graph: {} entities, {} views, volume {}",
        graph.entity_count(),
        graph.view_count(),
        graph.volume()
    );

    let cfg = MinerConfig {
        num_seeds: 100,
        rng_seed: 11,
        ..MinerConfig::default()
    };
    let outcome = mine(&graph, &cfg);
    println!(
        "{} expansions converged; {} blocks after dedup",
        outcome.summary.converged, outcome.summary.kept_after_dedup
    );

    let attack: BTreeSet<&str> = truth.attacks[0]
        .entities
        .iter()
        .map(String::as_str)
        .collect();
    for (rank, block) in outcome.blocks.iter().take(3).enumerate() {
        let hits = block
            .entity_ids
            .iter()
            .filter(|id| attack.contains(id.as_str()))
            .count();
        println!(
            "#{rank}: score {:.1}, {} nodes ({}/{} planted attackers), views {:?}, {} iterations",
            block.score.total,
            block.entity_ids.len(),
            hits,
            attack.len(),
            block.view_names,
            block.iterations
        );
    }

    // The top block recovers the whole planted group.
    let top = &outcome.blocks[0];
    let recovered = top
        .entity_ids
        .iter()
        .filter(|id| attack.contains(id.as_str()))
        .count();
    assert_eq!(recovered, attack.len(), "top block missed attackers");
    assert_eq!(
        top.view_names,
        truth.attacks[0].views.iter().cloned().collect::<Vec<_>>()
    );
}
