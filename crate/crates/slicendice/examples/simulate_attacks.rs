//! Generate a synthetic table with planted lockstep attacks and write the
//! same files the `slicendice simulate` subcommand produces.
//!
//! ```bash
//! cargo run --example simulate_attacks
//! ```

use slicendice::ingest::TableSchema;
use slicendice::simulator::{generate, preset, Preset, SimScenario};

fn main() {
    // Start from a named scenario and raise the attack count.
    let scenario = SimScenario {
        attacks: 2,
        rng_seed: 42,
        ..preset(Preset::HighSync)
    };
    let (table, truth) = generate(&scenario).unwrap();

    println!(
        "generated {} entities × {} attributes",
        table.entity_count(),
        table.attribute_count()
    );
    for (idx, attack) in truth.attacks.iter().enumerate() {
        let entities: Vec<&str> = attack.entities.iter().take(5).map(String::as_str).collect();
        println!(
            "attack {idx}: {} entities over views {:?} (first few: {entities:?}…)",
            attack.entities.len(),
            attack.views
        );
    }

    let dir = std::env::temp_dir().join("slicendice_simulate_example");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("table.csv");
    let truth_path = dir.join("truth.json");
    std::fs::write(&csv_path, table.to_delimited(&TableSchema::default())).unwrap();
    std::fs::write(&truth_path, truth.to_json().unwrap()).unwrap();
    println!("wrote {} and {}", csv_path.display(), truth_path.display());

    // Same scenario, same seed → identical output.
    let (again, _) = generate(&scenario).unwrap();
    assert_eq!(table, again);
}
