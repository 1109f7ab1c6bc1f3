//! Timing experiments: seed-construction speed and runtime scaling.
//!
//! Three measurements back the efficiency story:
//! - time-to-valid-seed for the greedy constructor versus uniform random
//!   node sampling, across view counts;
//! - wall time of a fixed budget of alternating iterations as the entity
//!   count grows (one full neighbor sweep per iteration, so time should be
//!   linear in N);
//! - the same at fixed N as the iteration budget grows.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use crate::mvgraph::{BlockState, MultiViewGraph};
use crate::search::{update_nodes, update_views, worker_rng, SearchError};
use crate::seeding::{greedy_seed, seed_views, SeedConfig};
use crate::simulator::{generate, SimScenario};

/// One timed seed-construction trial.
#[derive(Debug, Clone, Serialize)]
pub struct SeedTimingRow {
    pub method: &'static str,
    pub z: usize,
    pub trial: usize,
    pub micros: f64,
    /// False when the trial hit its cap without finding a valid seed.
    pub succeeded: bool,
}

/// One timed fixed-budget run.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub entities: usize,
    pub iterations: u32,
    pub trial: usize,
    pub millis: f64,
}

const RANDOM_SEED_TRY_CAP: u64 = 200_000;

/// Uniform random node seeding: draw random pairs until one satisfies
/// `ρᵢ > Pᵢ` on every selected view. The comparison mode for the seed-time
/// experiment; the try cap turns pathological settings into a capped trial
/// rather than a hang.
pub fn random_seed_until_valid(
    graph: &MultiViewGraph,
    views: &[usize],
    rng: &mut impl Rng,
) -> (Option<Vec<usize>>, u64) {
    let n = graph.entity_count();
    for tries in 1..=RANDOM_SEED_TRY_CAP {
        let a = rng.gen_range(0..n);
        let offset = rng.gen_range(1..n);
        let b = (a + offset) % n;
        let ok = views.iter().all(|&view| {
            // A pair's volume is 1, so the constraint is weight > P.
            let weight = graph.pair_weight(view, a, b).expect("valid entities");
            weight > graph.view_density(view)
        });
        if ok {
            return (Some(vec![a.min(b), a.max(b)]), tries);
        }
    }
    (None, RANDOM_SEED_TRY_CAP)
}

/// Time greedy versus random seeding over `trials` per view count.
///
/// Both methods get the same sampled views in each trial. Rows carry raw
/// microseconds; summarize with [`median`].
pub fn seed_timing(
    graph: &MultiViewGraph,
    z_values: &[usize],
    trials: usize,
    percentile: f64,
    rng_seed: u64,
) -> Vec<SeedTimingRow> {
    let mut rows = Vec::new();
    for &z in z_values {
        let cfg = SeedConfig {
            views_per_block: z,
            frequency_percentile: percentile,
            ..SeedConfig::default()
        };
        let mut rng = worker_rng(rng_seed, z as u64);
        for trial in 0..trials {
            let views = match seed_views(graph, &cfg, &mut rng) {
                Ok(views) => views,
                Err(_) => break,
            };

            let start = Instant::now();
            let greedy_ok = greedy_seed(graph, &views, &cfg, &mut rng).is_ok();
            rows.push(SeedTimingRow {
                method: "greedy",
                z,
                trial,
                micros: start.elapsed().as_secs_f64() * 1e6,
                succeeded: greedy_ok,
            });

            let start = Instant::now();
            let (random, _tries) = random_seed_until_valid(graph, &views, &mut rng);
            rows.push(SeedTimingRow {
                method: "random",
                z,
                trial,
                micros: start.elapsed().as_secs_f64() * 1e6,
                succeeded: random.is_some(),
            });
        }
    }
    rows
}

/// Run exactly `iterations` alternating view/node updates from a greedy
/// seed, ignoring convergence, and return the elapsed time. Each iteration
/// performs one full neighbor sweep whether or not a move is accepted.
pub fn fixed_iteration_run(
    graph: &MultiViewGraph,
    z: usize,
    iterations: u32,
    rng_seed: u64,
    stream: u64,
) -> Result<Duration, SearchError> {
    let cfg = SeedConfig {
        views_per_block: z,
        ..SeedConfig::default()
    };
    let mut rng = worker_rng(rng_seed, stream);
    let views = seed_views(graph, &cfg, &mut rng)?;
    let nodes = greedy_seed(graph, &views, &cfg, &mut rng)?;
    let mut block = BlockState::from_nodes(graph, &nodes)?;
    let start = Instant::now();
    for _ in 0..iterations {
        let views = update_views(graph, &block, z)?;
        update_nodes(graph, &mut block, &views)?;
    }
    Ok(start.elapsed())
}

/// Wall time of a fixed iteration budget as the entity count grows.
///
/// Each entity count gets its own simulated table (same parameters apart
/// from N, attack size scaled with N) and `trials` timed runs.
pub fn scaling_vs_entities(
    entity_counts: &[usize],
    iterations: u32,
    trials: usize,
    base: &SimScenario,
    rng_seed: u64,
) -> Vec<ScalingRow> {
    let mut rows = Vec::new();
    for (idx, &n) in entity_counts.iter().enumerate() {
        let scenario = SimScenario {
            entities: n,
            attack_entities: base.attack_entities * n / base.entities.max(1),
            rng_seed: rng_seed ^ (idx as u64 + 1),
            ..base.clone()
        };
        let (table, _) = generate(&scenario).expect("valid scaling scenario");
        let ief = crate::ingest::compute_ief(&table).expect("nonempty table");
        let graph = crate::mvgraph::build_graph(&table, &ief);
        for trial in 0..trials {
            if let Ok(elapsed) =
                fixed_iteration_run(&graph, 3, iterations, rng_seed, trial as u64)
            {
                rows.push(ScalingRow {
                    entities: n,
                    iterations,
                    trial,
                    millis: elapsed.as_secs_f64() * 1e3,
                });
            }
        }
    }
    rows
}

/// Wall time versus iteration budget at fixed N.
pub fn scaling_vs_iterations(
    iteration_counts: &[u32],
    trials: usize,
    base: &SimScenario,
    rng_seed: u64,
) -> Vec<ScalingRow> {
    let (table, _) = generate(base).expect("valid scenario");
    let ief = crate::ingest::compute_ief(&table).expect("nonempty table");
    let graph = crate::mvgraph::build_graph(&table, &ief);
    let mut rows = Vec::new();
    for &iterations in iteration_counts {
        for trial in 0..trials {
            if let Ok(elapsed) =
                fixed_iteration_run(&graph, 3, iterations, rng_seed, trial as u64)
            {
                rows.push(ScalingRow {
                    entities: base.entities,
                    iterations,
                    trial,
                    millis: elapsed.as_secs_f64() * 1e3,
                });
            }
        }
    }
    rows
}

/// Median of a sample (mean of the middle two for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    }
}

/// Coefficient of determination of the least-squares line through (x, y).
pub fn linear_fit_r2(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    assert!(points.len() >= 2, "fit needs at least two points");
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}
