//! Behavior-level precision/recall comparison on one simulated scenario:
//! the search's own metric versus the four alternatives rescoring the same
//! mined blocks.
//!
//! ```bash
//! cargo run --release --example evaluate_preset
//! ```

use slicendice::evaluation::{compare, EvalConfig, Method};
use slicendice::search::MinerConfig;
use slicendice::simulator::{preset, Preset};

fn main() {
    let mut scenario = preset(Preset::HighSync);
    scenario.rng_seed = 3;
    let cfg = EvalConfig {
        miner: MinerConfig {
            num_seeds: 100,
            rng_seed: 103,
            ..MinerConfig::default()
        },
    };
    let report = compare(&scenario, &Method::ALL, &cfg).unwrap();
    println!("note: {}", report.note);
    println!(
        "mined {} blocks ({} after dedup)\n",
        report.mine_summary.converged, report.mine_summary.kept_after_dedup
    );
    println!("{:<12} {:>8}  points", "method", "auc_pr");
    for outcome in &report.methods {
        println!(
            "{:<12} {:>8.4}  {}",
            outcome.method.label(),
            outcome.auc_pr,
            outcome.curve.points.len()
        );
    }

    let ours = report
        .methods
        .iter()
        .find(|m| m.method == Method::SliceNDice)
        .unwrap();
    assert!(ours.auc_pr > 0.0 && ours.auc_pr <= 1.0);
}
