//! Mining suspiciously synchronized entity groups from multi-attribute
//! tabular data.
//!
//! Entities sharing too many, too unlikely attribute values — accounts
//! registered from one IP pool with matching contact patterns, say — stand
//! out as groups rather than individuals. This crate models a table of
//! entities × multi-valued attributes as a multi-view graph (one similarity
//! view per attribute, edge weights from rarity-discounted value overlap),
//! scores node subsets with a negative log-likelihood under a per-view
//! Erdős–Rényi–Exponential null model, and extracts high-scoring groups with
//! a greedy alternating search over node sets and view selections.
//!
//! The pipeline, module by module:
//!
//! - [`ingest`]: delimited-text loading, stopword blacklisting, and
//!   inverse-entity-frequency weighting;
//! - [`mvgraph`]: the compressed per-view indexes, block mass bookkeeping,
//!   and an optional binary snapshot of the built graph;
//! - [`metric`]: the suspiciousness score, its density form, and the
//!   alternative block metrics (mass, average degree, density, leading
//!   singular value);
//! - [`axioms`]: the monotonicity properties a group-scoring metric should
//!   satisfy, with a sampling harness and counterexample generator;
//! - [`seeding`]: weighted view sampling and greedy constraint-satisfying
//!   seed construction;
//! - [`search`]: the alternating maximization loop, the parallel multi-seed
//!   driver, and Jaccard deduplication;
//! - [`simulator`]: synthetic tables with planted lockstep attacks and the
//!   five named evaluation scenarios;
//! - [`evaluation`]: behavior-level precision/recall scoring against planted
//!   ground truth, with alternative-metric rescoring;
//! - [`bench`]: seed-time and scaling measurements;
//! - [`cli`]: the `slicendice` binary's subcommands (mine, simulate,
//!   evaluate, axioms, bench) and run manifests.
//!
//! The `examples/` directory holds one runnable example per capability;
//! start with `mine_simulated`.

pub mod axioms;
pub mod bench;
pub mod cli;
pub mod evaluation;
pub mod ingest;
pub mod metric;
pub mod mvgraph;
pub mod search;
pub mod seeding;
pub mod simulator;
