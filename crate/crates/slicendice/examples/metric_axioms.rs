//! Run the axiom grid: which scoring metric satisfies which monotonicity
//! property, with a concrete counterexample for every failure.
//!
//! ```bash
//! cargo run --example metric_axioms
//! ```

use slicendice::axioms::{full_grid, Axiom};

fn main() {
    let report = full_grid(1000, 0);
    print!("{:<16}", "metric");
    for axiom in Axiom::ALL {
        print!("{:<16}", axiom.label());
    }
    println!();
    for row in &report.rows {
        print!("{:<16}", row.metric);
        for check in &row.checks {
            print!(
                "{:<16}",
                if check.holds() {
                    "ok".to_string()
                } else {
                    format!("{} bad", check.violations)
                }
            );
        }
        println!();
    }
    assert!(report.matches_expectations());

    // Show one failure in full.
    let ce = report
        .counterexamples()
        .find(|c| c.metric == "mass" && c.axiom == "cross_view")
        .expect("mass fails cross-view");
    println!(
        "\nmass vs cross-view: both arrangements score {:.3} / {:.3} — \
         shifting mass toward the sparser view should have scored higher",
        ce.more_score, ce.less_score
    );
    println!(
        "  sparser-view-heavy: densities {:?} over backgrounds {:?}",
        ce.more_suspicious.densities, ce.more_suspicious.backgrounds
    );
}
