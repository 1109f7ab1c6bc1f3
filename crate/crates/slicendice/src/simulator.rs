//! Synthetic multi-attribute tables with planted lockstep attacks.
//!
//! Normal behavior: every entity draws `Poisson(λ)` values per attribute,
//! uniformly over that attribute's value space `[1, uᵢ]`. An attack picks `n`
//! entities and `k` attributes, and each attacked entity draws `Poisson(2λ)`
//! extra values in each attacked attribute — but only from the restricted
//! space `[1, ⌊uᵢ/τ⌋]`, so higher attack temperature τ means tighter
//! synchrony. Attack draws are unioned with normal ones; repeated across `c`
//! independent attacks.
//!
//! Everything is driven by a single sequential rng, so a scenario plus seed
//! reproduces its table and ground truth exactly.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::AttributeTable;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("attack temperature must be at least 1 (got {0})")]
    TemperatureTooLow(f64),
    #[error("attack entity count {0} exceeds entity count {1}")]
    AttackTooLarge(usize, usize),
    #[error("attack view count {0} exceeds attribute count {1}")]
    TooManyAttackViews(usize, usize),
    #[error("attribute {0} has empty restricted space (cardinality {1}, temperature {2})")]
    EmptyRestrictedSpace(usize, u64, f64),
    #[error("cardinalities must list one entry per attribute ({got} for {want})")]
    CardinalityShape { got: usize, want: usize },
    #[error("mean value count must be non-negative (got {0})")]
    NegativeMean(f64),
    #[error("attribute cardinalities must be at least 1")]
    ZeroCardinality,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// How attacks choose which attributes to strike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewBias {
    Uniform,
    /// Weight ∝ uᵢ: attacks land in high-cardinality (sparse) views.
    ProportionalToCardinality,
    /// Weight ∝ 1/uᵢ: attacks land in low-cardinality (dense) views.
    InverseToCardinality,
}

/// Generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    /// Entity count N.
    pub entities: usize,
    /// Attribute count K.
    pub attributes: usize,
    /// Value-space cardinality per attribute (length K).
    pub cardinalities: Vec<u64>,
    /// Entities per attack (n).
    pub attack_entities: usize,
    /// Attributes per attack (k).
    pub attack_views: usize,
    /// Number of attacks (c).
    pub attacks: usize,
    /// Mean values per normal entity-attribute (λ).
    pub mean_values: f64,
    /// Attack temperature (τ ≥ 1): attackers draw from `[1, ⌊uᵢ/τ⌋]`.
    pub temperature: f64,
    pub view_bias: ViewBias,
    pub rng_seed: u64,
}

impl SimScenario {
    /// The stock setting: 500 entities, 10 attributes with cardinalities
    /// 50·i, one attack of 50 entities × 3 views, λ=5, τ=10.
    pub fn defaults() -> Self {
        let attributes = 10;
        Self {
            entities: 500,
            attributes,
            cardinalities: (1..=attributes as u64).map(|i| 50 * i).collect(),
            attack_entities: 50,
            attack_views: 3,
            attacks: 1,
            mean_values: 5.0,
            temperature: 10.0,
            view_bias: ViewBias::Uniform,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.temperature < 1.0 {
            return Err(SimError::TemperatureTooLow(self.temperature));
        }
        if self.attack_entities > self.entities {
            return Err(SimError::AttackTooLarge(self.attack_entities, self.entities));
        }
        if self.attack_views > self.attributes {
            return Err(SimError::TooManyAttackViews(
                self.attack_views,
                self.attributes,
            ));
        }
        if self.cardinalities.len() != self.attributes {
            return Err(SimError::CardinalityShape {
                got: self.cardinalities.len(),
                want: self.attributes,
            });
        }
        if self.mean_values < 0.0 {
            return Err(SimError::NegativeMean(self.mean_values));
        }
        for (attr, &u) in self.cardinalities.iter().enumerate() {
            if u == 0 {
                return Err(SimError::ZeroCardinality);
            }
            if self.attacks > 0 && restricted_space(u, self.temperature) < 1 {
                return Err(SimError::EmptyRestrictedSpace(attr, u, self.temperature));
            }
        }
        Ok(())
    }

    pub fn attribute_name(attr: usize) -> String {
        format!("attr_{:02}", attr + 1)
    }

    pub fn entity_name(&self, entity: usize) -> String {
        let width = self.entities.saturating_sub(1).to_string().len();
        format!("n{entity:0width$}")
    }
}

/// The named settings used for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// The defaults: attackers restricted to a tenth of each value space.
    HighSync,
    /// τ=2 — attackers blend in far better.
    LowSync,
    /// Attack views weighted ∝ u: strikes land in sparse views.
    HighSignal,
    /// Attack views weighted ∝ 1/u: strikes land in dense views.
    LowSignal,
    /// K=30: the same attacks hide in three times the dimensionality.
    HighDim,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::HighSync,
        Preset::LowSync,
        Preset::HighSignal,
        Preset::LowSignal,
        Preset::HighDim,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Preset::HighSync => "high-sync",
            Preset::LowSync => "low-sync",
            Preset::HighSignal => "high-signal",
            Preset::LowSignal => "low-signal",
            Preset::HighDim => "high-dim",
        }
    }

    pub fn parse(name: &str) -> Option<Preset> {
        Preset::ALL.iter().copied().find(|p| p.label() == name)
    }
}

/// Scenario for a named preset: the defaults with exactly one knob moved.
pub fn preset(which: Preset) -> SimScenario {
    let mut scenario = SimScenario::defaults();
    match which {
        Preset::HighSync => {}
        Preset::LowSync => scenario.temperature = 2.0,
        Preset::HighSignal => scenario.view_bias = ViewBias::ProportionalToCardinality,
        Preset::LowSignal => scenario.view_bias = ViewBias::InverseToCardinality,
        Preset::HighDim => {
            scenario.attributes = 30;
            scenario.cardinalities = (1..=30u64).map(|i| 50 * i).collect();
        }
    }
    scenario
}

/// One planted attack: which entities synchronized over which views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attack {
    pub entities: BTreeSet<String>,
    pub views: BTreeSet<String>,
}

/// Everything the evaluation needs to label behaviors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub version: u32,
    pub scenario: SimScenario,
    pub attacks: Vec<Attack>,
}

pub const GROUND_TRUTH_VERSION: u32 = 1;

impl GroundTruth {
    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn restricted_space(cardinality: u64, temperature: f64) -> u64 {
    (cardinality as f64 / temperature).floor() as u64
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive mean");
    dist.sample(rng) as usize
}

/// `count` distinct indices from `0..n`, by partial Fisher–Yates; returned in
/// draw order.
fn sample_indices(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// `count` distinct indices weighted without replacement.
fn sample_weighted(weights: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut remaining: Vec<(usize, f64)> = weights.iter().copied().enumerate().collect();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().map(|(_, w)| w).sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (idx, (_, weight)) in remaining.iter().enumerate() {
            if target < *weight {
                pick = idx;
                break;
            }
            target -= weight;
        }
        chosen.push(remaining.remove(pick).0);
    }
    chosen
}

/// Generate a table and its ground truth.
pub fn generate(scenario: &SimScenario) -> Result<(AttributeTable, GroundTruth), SimError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let n = scenario.entities;
    let k = scenario.attributes;

    // Normal behavior.
    let mut cells: Vec<Vec<BTreeSet<String>>> = vec![vec![BTreeSet::new(); k]; n];
    for entity_cells in cells.iter_mut() {
        for (attr, cell) in entity_cells.iter_mut().enumerate() {
            let draws = poisson_count(&mut rng, scenario.mean_values);
            let space = scenario.cardinalities[attr];
            for _ in 0..draws {
                cell.insert(rng.gen_range(1..=space).to_string());
            }
        }
    }

    // Attacks.
    let view_weights: Vec<f64> = match scenario.view_bias {
        ViewBias::Uniform => vec![1.0; k],
        ViewBias::ProportionalToCardinality => {
            scenario.cardinalities.iter().map(|&u| u as f64).collect()
        }
        ViewBias::InverseToCardinality => scenario
            .cardinalities
            .iter()
            .map(|&u| 1.0 / u as f64)
            .collect(),
    };
    let mut attacks = Vec::with_capacity(scenario.attacks);
    for _ in 0..scenario.attacks {
        let mut members = sample_indices(n, scenario.attack_entities, &mut rng);
        members.sort_unstable();
        let mut views = sample_weighted(&view_weights, scenario.attack_views, &mut rng);
        views.sort_unstable();
        for &entity in &members {
            for &attr in &views {
                let draws = poisson_count(&mut rng, 2.0 * scenario.mean_values);
                let space = restricted_space(scenario.cardinalities[attr], scenario.temperature);
                for _ in 0..draws {
                    cells[entity][attr].insert(rng.gen_range(1..=space).to_string());
                }
            }
        }
        attacks.push(Attack {
            entities: members
                .iter()
                .map(|&e| scenario.entity_name(e))
                .collect(),
            views: views.iter().map(|&v| SimScenario::attribute_name(v)).collect(),
        });
    }

    let entity_ids: Vec<String> = (0..n).map(|e| scenario.entity_name(e)).collect();
    let attributes: Vec<String> = (0..k).map(SimScenario::attribute_name).collect();
    let table = AttributeTable::new(entity_ids, attributes, cells)
        .expect("generated ids and attributes are unique");
    let truth = GroundTruth {
        version: GROUND_TRUTH_VERSION,
        scenario: scenario.clone(),
        attacks,
    };
    Ok((table, truth))
}
