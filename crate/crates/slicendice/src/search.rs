//! The alternating greedy search: seed, then repeatedly re-pick the best
//! views for the current nodes and the best single-node change for the
//! current views, while the score strictly improves.
//!
//! Every expansion is independent: the driver runs many seeds concurrently
//! over the shared read-only graph, each with its own rng stream split from
//! the master seed by seed index, so output is identical for any worker
//! count. Results are ranked by score and pruned of near-duplicates by
//! node-set Jaccard similarity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{suspiciousness, view_nll, BlockScore, MetricError};
use crate::mvgraph::{BlockState, GraphError, MultiViewGraph};
use crate::seeding::{greedy_seed, seed_views, SeedConfig, SeedError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("fewer than {wanted} views are eligible for this block ({available})")]
    ViewSelection { wanted: usize, available: usize },
    #[error("no constraint-satisfying seed after {0} view resamples")]
    SeedingFailed(u32),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Full mining configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MinerConfig {
    /// Independent seed expansions to run.
    pub num_seeds: usize,
    /// Jaccard similarity threshold η for pruning near-duplicate blocks.
    pub jaccard_threshold: f64,
    /// Worker threads (0 = one per logical cpu).
    pub threads: usize,
    /// Safety cap on alternating iterations per seed.
    pub iteration_cap: u32,
    /// Master rng seed; every worker stream derives from it.
    pub rng_seed: u64,
    pub seed: SeedConfig,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            num_seeds: 200,
            jaccard_threshold: 0.05,
            threads: 0,
            iteration_cap: 1000,
            rng_seed: 0,
            seed: SeedConfig::default(),
        }
    }
}

impl MinerConfig {
    pub fn views_per_block(&self) -> usize {
        self.seed.views_per_block
    }
}

/// The rng stream for one worker: same master seed, distinct stream index.
pub fn worker_rng(master_seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(worker);
    rng
}

/// A converged block: nodes, chosen views, score, and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MinedBlock {
    /// Node indices into the graph, ascending.
    pub node_indices: Vec<u32>,
    /// The same nodes as ids, sorted lexicographically.
    pub entity_ids: Vec<String>,
    /// Selected view indices, ascending.
    pub view_indices: Vec<usize>,
    pub view_names: Vec<String>,
    pub score: BlockScore,
    /// Alternating iterations until convergence (or the cap).
    pub iterations: u32,
    /// Which seed expansion produced this block.
    pub seed_id: u64,
    /// True when the iteration cap stopped the expansion before convergence.
    pub capped: bool,
    /// Accepted score after each iteration, starting from the seed's score.
    pub score_trace: Vec<f64>,
}

impl MinedBlock {
    pub fn jaccard(&self, other: &MinedBlock) -> f64 {
        jaccard(&self.node_indices, &other.node_indices)
    }
}

/// Jaccard similarity of two ascending index sets.
pub fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let mut shared = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - shared;
    shared as f64 / union as f64
}

/// Pick the `z` eligible views with the highest per-view contribution for
/// this block; ties go to the lower view index.
///
/// A view is eligible here when it has graph mass, the block has mass in it,
/// and the block's density exceeds the background.
pub fn update_views(
    graph: &MultiViewGraph,
    block: &BlockState,
    z: usize,
) -> Result<Vec<usize>, SearchError> {
    let volume = block.volume();
    let view_volume = graph.volume();
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for view in 0..graph.view_count() {
        if !graph.is_eligible(view) {
            continue;
        }
        if let Ok(contribution) = view_nll(block.mass(view), volume, graph.view_mass(view), view_volume)
        {
            scored.push((view, contribution));
        }
    }
    if scored.len() < z {
        return Err(SearchError::ViewSelection {
            wanted: z,
            available: scored.len(),
        });
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<usize> = scored.into_iter().take(z).map(|(view, _)| view).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Add(usize),
    Remove(usize),
}

/// Best-improvement step over every single-node addition and removal.
///
/// Applies the best strictly-improving feasible move and reports whether the
/// block changed; an unchanged block is a valid fixed point. Moves that break
/// `ρᵢ > Pᵢ` on any selected view (or empty a view's mass) are infeasible.
/// Removals keep at least two nodes. Ties go to the lowest entity index, adds
/// and removes interleaved in index order.
pub fn update_nodes(
    graph: &MultiViewGraph,
    block: &mut BlockState,
    views: &[usize],
) -> Result<bool, SearchError> {
    let view_volume = graph.volume();
    let n = block.len();
    let current_volume = block.volume();
    let mut current = 0.0;
    for &view in views {
        current += view_nll(
            block.mass(view),
            current_volume,
            graph.view_mass(view),
            view_volume,
        )?;
    }

    let added_volume = volume_of(n + 1);
    let removed_volume = volume_of(n.saturating_sub(1));
    let mut best: Option<(f64, Move)> = None;
    for entity in 0..graph.entity_count() {
        let (candidate_volume, mv) = if block.contains(entity) {
            if n <= 2 {
                continue;
            }
            (removed_volume, Move::Remove(entity))
        } else {
            (added_volume, Move::Add(entity))
        };
        let mut score = 0.0;
        let mut feasible = true;
        for &view in views {
            let mass = match mv {
                Move::Add(e) => block.mass(view) + block.add_delta(graph, view, e),
                Move::Remove(e) => block.mass(view) - block.remove_delta(graph, view, e),
            };
            match view_nll(mass, candidate_volume, graph.view_mass(view), view_volume) {
                Ok(contribution) => score += contribution,
                Err(_) => {
                    feasible = false;
                    break;
                }
            }
        }
        let strictly_improving = score > current;
        if !feasible || !strictly_improving {
            continue;
        }
        if best.is_none_or(|(best_score, _)| score > best_score) {
            best = Some((score, mv));
        }
    }

    match best {
        Some((_, Move::Add(entity))) => {
            block.add(graph, entity)?;
            Ok(true)
        }
        Some((_, Move::Remove(entity))) => {
            block.remove(graph, entity)?;
            Ok(true)
        }
        None => Ok(false),
    }
}

fn volume_of(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// One full expansion: sample views, grow a seed, then alternate view and
/// node updates until the score stops improving.
///
/// Seeding failures trigger a view resample, up to the seed restart cap; the
/// iteration cap flags the block as capped instead of looping forever.
pub fn slice_n_dice(
    graph: &MultiViewGraph,
    cfg: &MinerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<MinedBlock, SearchError> {
    let z = cfg.views_per_block();

    let mut seeded = None;
    for _ in 0..cfg.seed.restart_cap {
        let views = seed_views(graph, &cfg.seed, rng)?;
        match greedy_seed(graph, &views, &cfg.seed, rng) {
            Ok(nodes) => {
                seeded = Some((views, nodes));
                break;
            }
            Err(SeedError::NotEnoughEligibleViews { .. }) => unreachable!("seed_views screened"),
            Err(_) => continue, // resample views
        }
    }
    let (mut views, nodes) =
        seeded.ok_or(SearchError::SeedingFailed(cfg.seed.restart_cap))?;

    let mut block = BlockState::from_nodes(graph, &nodes)?;
    let mut score = suspiciousness(&block, graph, &views)?.total;
    let mut trace = vec![score];
    let mut iterations = 0;
    let mut capped = false;
    loop {
        if iterations >= cfg.iteration_cap {
            capped = true;
            break;
        }
        let previous = score;
        views = update_views(graph, &block, z)?;
        update_nodes(graph, &mut block, &views)?;
        score = suspiciousness(&block, graph, &views)?.total;
        iterations += 1;
        if score > previous {
            trace.push(score);
        } else {
            break;
        }
    }

    let node_indices: Vec<u32> = block.members().map(|m| m as u32).collect();
    let mut entity_ids: Vec<String> = node_indices
        .iter()
        .map(|&m| graph.entity_id(m as usize).to_string())
        .collect();
    entity_ids.sort_unstable();
    let final_score = suspiciousness(&block, graph, &views)?;
    Ok(MinedBlock {
        node_indices,
        entity_ids,
        view_names: views
            .iter()
            .map(|&v| graph.view(v).name().to_string())
            .collect(),
        view_indices: views,
        score: final_score,
        iterations,
        seed_id: 0, // assigned by the driver
        capped,
        score_trace: trace,
    })
}

/// Outcome counters for a whole mining run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineSummary {
    pub seeds_run: usize,
    pub converged: usize,
    pub seeding_failures: usize,
    pub capped: usize,
    pub kept_after_dedup: usize,
}

/// Ranked mining output.
///
/// `blocks` is the deduplicated product meant for reporting and review;
/// `all_blocks` keeps every converged expansion in rank order, which is what
/// behavior-level evaluation penalizes (overlapping expansions stack
/// penalties on the nodes they agree about).
#[derive(Debug, Clone)]
pub struct MineOutcome {
    pub blocks: Vec<MinedBlock>,
    pub all_blocks: Vec<MinedBlock>,
    pub summary: MineSummary,
}

/// Run `num_seeds` independent expansions concurrently, rank by score, and
/// prune near-duplicates.
///
/// Deterministic for a fixed config: each seed's rng stream is derived from
/// the master seed and the seed index, results are collected in seed order,
/// and ranking sorts by (score desc, seed id asc) — worker scheduling cannot
/// affect the output.
pub fn mine(graph: &MultiViewGraph, cfg: &MinerConfig) -> MineOutcome {
    let results: Vec<Result<MinedBlock, SearchError>> = if cfg.threads == 1 {
        (0..cfg.num_seeds)
            .map(|seed_id| run_seed(graph, cfg, seed_id as u64))
            .collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if cfg.threads > 0 {
            builder = builder.num_threads(cfg.threads);
        }
        let pool = builder.build().expect("thread pool");
        pool.install(|| {
            use rayon::prelude::*;
            (0..cfg.num_seeds)
                .into_par_iter()
                .map(|seed_id| run_seed(graph, cfg, seed_id as u64))
                .collect()
        })
    };

    let mut summary = MineSummary {
        seeds_run: cfg.num_seeds,
        ..MineSummary::default()
    };
    let mut blocks = Vec::new();
    for (seed_id, result) in results.into_iter().enumerate() {
        match result {
            Ok(mut block) => {
                block.seed_id = seed_id as u64;
                if block.capped {
                    summary.capped += 1;
                } else {
                    summary.converged += 1;
                }
                blocks.push(block);
            }
            Err(_) => summary.seeding_failures += 1,
        }
    }
    blocks.sort_by(|a, b| {
        b.score
            .total
            .total_cmp(&a.score.total)
            .then(a.seed_id.cmp(&b.seed_id))
    });
    let deduplicated = jaccard_dedup(blocks.clone(), cfg.jaccard_threshold);
    summary.kept_after_dedup = deduplicated.len();
    MineOutcome {
        blocks: deduplicated,
        all_blocks: blocks,
        summary,
    }
}

fn run_seed(graph: &MultiViewGraph, cfg: &MinerConfig, seed_id: u64) -> Result<MinedBlock, SearchError> {
    let mut rng = worker_rng(cfg.rng_seed, seed_id);
    slice_n_dice(graph, cfg, &mut rng)
}

/// Greedy scan of a score-ranked list keeping a block only when its node-set
/// Jaccard similarity with every kept block is below η. Order preserved.
pub fn jaccard_dedup(blocks: Vec<MinedBlock>, eta: f64) -> Vec<MinedBlock> {
    let mut kept: Vec<MinedBlock> = Vec::new();
    for block in blocks {
        if kept.iter().all(|k| k.jaccard(&block) < eta) {
            kept.push(block);
        }
    }
    kept
}
