//! Time the greedy seed constructor against uniform random node seeding.
//! Random pairs must beat the background density in every selected view at
//! once, which gets rapidly harder as the view count grows.
//!
//! ```bash
//! cargo run --release --example seed_timing
//! ```

use slicendice::bench::{median, seed_timing};
use slicendice::ingest::compute_ief;
use slicendice::mvgraph::build_graph;
use slicendice::simulator::{generate, SimScenario};

fn main() {
    let scenario = SimScenario {
        rng_seed: 5,
        ..SimScenario::defaults()
    };
    let (table, _) = generate(&scenario).unwrap();
    let ief = compute_ief(&table).unwrap();
    let graph = build_graph(&table, &ief);

    let trials = 30;
    let rows = seed_timing(&graph, &[1, 2, 3], trials, 95.0, 9);
    println!("{:<4} {:>14} {:>14} {:>8}", "z", "greedy µs", "random µs", "ratio");
    for z in [1usize, 2, 3] {
        let pick = |method: &str| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.method == method && r.z == z)
                .map(|r| r.micros)
                .collect()
        };
        let greedy = median(&pick("greedy"));
        let random = median(&pick("random"));
        println!(
            "{z:<4} {greedy:>14.1} {random:>14.1} {:>8.1}",
            random / greedy
        );
    }
}
