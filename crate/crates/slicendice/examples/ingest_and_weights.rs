//! Load a small table, blacklist a stopword, and inspect the
//! inverse-entity-frequency weights that drive edge weighting.
//!
//! ```bash
//! cargo run --example ingest_and_weights
//! ```

use slicendice::ingest::{
    apply_stopwords, compute_ief, load_attribute_table, Stopwords, TableSchema,
};

fn main() {
    let csv = "\
id,email_domain,upload_name
org1,mailfast.example,Test|invoice_march.pdf
org2,mailfast.example,Test
org3,mailfast.example,Test|invoice_march.pdf
org4,corp.example,quarterly.xlsx
org5,corp.example,Test
";
    let schema = TableSchema::default();
    let table = load_attribute_table(csv.as_bytes(), &schema).unwrap();
    println!(
        "{} entities × {} attributes",
        table.entity_count(),
        table.attribute_count()
    );

    // "Test" is a placeholder name unrelated entities keep reusing; overlap
    // on it means nothing, so blacklist it for the upload_name attribute.
    let stopwords = Stopwords::parse("[upload_name]\nTest\n").unwrap();
    let cleaned = apply_stopwords(&table, &stopwords);

    let ief = compute_ief(&cleaned).unwrap();
    for (attr, name) in cleaned.attributes().iter().enumerate() {
        println!("{name}:");
        let mut tokens: Vec<(&str, f64)> = ief.tokens(attr).collect();
        tokens.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (token, weight) in tokens {
            println!("  {token:<24} ief = {weight:10.2}");
        }
    }

    // The stopword is gone entirely: weight 0, no edges from it.
    assert_eq!(ief.weight(1, "Test"), 0.0);
    // Rarer values weigh more.
    assert!(ief.weight(1, "invoice_march.pdf") > ief.weight(0, "mailfast.example"));
}
