//! MVERE suspiciousness scoring, plus the four alternative block metrics used
//! for comparison.
//!
//! Under the multi-view Erdős–Rényi–Exponential null model, every pair of
//! entities in view `i` carries an i.i.d. `Exp(λᵢ)` weight with MLE
//! `λᵢ = V/Cᵢ`, so the mass of a block with volume `v` follows
//! `Gamma(v, V/Cᵢ)`. Suspiciousness is the negative log-likelihood of the
//! observed block masses, Stirling-simplified per view to
//!
//! ```text
//! fᵢ = v·ln(Cᵢ/V) + v·ln v − v − ln v − v·ln cᵢ + ln cᵢ + V·cᵢ/Cᵢ
//! ```
//!
//! summed over the selected views. This closed form — not the exact Gamma
//! log-pdf — is the canonical metric: the monotonicity properties checked in
//! [`crate::axioms`] differentiate exactly this expression. The exact-pdf
//! variant is exposed only as a diagnostic.
//!
//! Scores are defined only where every selected view's block density exceeds
//! its background density (`ρᵢ > Pᵢ`); anything else is rejected rather than
//! scored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mvgraph::{BlockState, MultiViewGraph};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("block volume must be at least 1 (got {0})")]
    InvalidVolume(f64),
    #[error("view mass and volume must be positive (C={mass}, V={volume})")]
    InvalidViewTotals { mass: f64, volume: f64 },
    #[error("block mass must be positive to score")]
    ZeroMass,
    #[error("density {density} does not exceed background {background}{}", view.map(|v| format!(" in view {v}")).unwrap_or_default())]
    DensityNotAboveBackground {
        view: Option<usize>,
        density: f64,
        background: f64,
    },
    #[error("power iteration did not converge within {0} iterations")]
    PowerIterationDiverged(usize),
}

/// Negative log-likelihood contribution of one view, mass-parameterized.
///
/// `mass`/`volume` describe the block (`c`, `v`); `view_mass`/`view_volume`
/// the enclosing view (`C`, `V`). Natural logarithms throughout. Requires
/// `c/v > C/V`.
pub fn view_nll(mass: f64, volume: f64, view_mass: f64, view_volume: f64) -> Result<f64, MetricError> {
    if volume < 1.0 {
        return Err(MetricError::InvalidVolume(volume));
    }
    if view_mass.is_nan() || view_mass <= 0.0 || view_volume.is_nan() || view_volume <= 0.0 {
        return Err(MetricError::InvalidViewTotals {
            mass: view_mass,
            volume: view_volume,
        });
    }
    if mass.is_nan() || mass <= 0.0 {
        return Err(MetricError::ZeroMass);
    }
    let density = mass / volume;
    let background = view_mass / view_volume;
    if density <= background {
        return Err(MetricError::DensityNotAboveBackground {
            view: None,
            density,
            background,
        });
    }
    Ok(view_nll_unchecked(mass, volume, view_mass, view_volume))
}

#[inline]
fn view_nll_unchecked(c: f64, v: f64, big_c: f64, big_v: f64) -> f64 {
    v * (big_c / big_v).ln() + v * v.ln() - v - v.ln() - v * c.ln() + c.ln() + big_v * c / big_c
}

/// The same contribution reparameterized by densities:
///
/// ```text
/// f̂ᵢ = v·ln Pᵢ − v·ln ρᵢ − v + ln ρᵢ + v·ρᵢ/Pᵢ
/// ```
///
/// Algebraically equal to [`view_nll`] with `c = ρ·v`, `C = P·V` for any `V`.
pub fn density_nll(density: f64, view_density: f64, volume: f64) -> Result<f64, MetricError> {
    if volume < 1.0 {
        return Err(MetricError::InvalidVolume(volume));
    }
    if view_density.is_nan() || view_density <= 0.0 {
        return Err(MetricError::InvalidViewTotals {
            mass: view_density,
            volume: 1.0,
        });
    }
    if density.is_nan() || density <= 0.0 {
        return Err(MetricError::ZeroMass);
    }
    if density <= view_density {
        return Err(MetricError::DensityNotAboveBackground {
            view: None,
            density,
            background: view_density,
        });
    }
    Ok(volume * view_density.ln() - volume * density.ln() - volume
        + density.ln()
        + volume * density / view_density)
}

/// Exact Gamma log-pdf variant of [`view_nll`], without the Stirling
/// simplification. Diagnostic only — never used in search or ranking.
pub fn exact_view_nll(
    mass: f64,
    volume: f64,
    view_mass: f64,
    view_volume: f64,
) -> Result<f64, MetricError> {
    // Same domain as the canonical form.
    view_nll(mass, volume, view_mass, view_volume)?;
    let rate = view_volume / view_mass;
    Ok(-(volume * rate.ln() - ln_gamma(volume) + (volume - 1.0) * mass.ln() - rate * mass))
}

/// Lanczos approximation of ln Γ(x) for x > 0.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_81,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// One view's share of a block score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewContribution {
    /// View index in the graph.
    pub view: usize,
    /// fᵢ — this view's term of the negative log-likelihood.
    pub contribution: f64,
    /// Block mass cᵢ.
    pub mass: f64,
    /// Block density ρᵢ.
    pub density: f64,
    /// Background density Pᵢ.
    pub background: f64,
}

/// MVERE suspiciousness of a block over its selected views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScore {
    pub total: f64,
    /// Per selected view, ascending by view index.
    pub per_view: Vec<ViewContribution>,
}

/// Score a block over exactly the selected views.
///
/// Every selected view must satisfy `ρᵢ > Pᵢ`; the first violating view is
/// named in the error. Unselected views contribute nothing.
pub fn suspiciousness(
    block: &BlockState,
    graph: &MultiViewGraph,
    views: &[usize],
) -> Result<BlockScore, MetricError> {
    let volume = block.volume();
    if volume < 1.0 {
        return Err(MetricError::InvalidVolume(volume));
    }
    let view_volume = graph.volume();
    let mut per_view = Vec::with_capacity(views.len());
    let mut total = 0.0;
    let mut ordered: Vec<usize> = views.to_vec();
    ordered.sort_unstable();
    for view in ordered {
        let mass = block.mass(view);
        let view_mass = graph.view_mass(view);
        let contribution =
            view_nll(mass, volume, view_mass, view_volume).map_err(|err| match err {
                MetricError::DensityNotAboveBackground {
                    density,
                    background,
                    ..
                } => MetricError::DensityNotAboveBackground {
                    view: Some(view),
                    density,
                    background,
                },
                other => other,
            })?;
        total += contribution;
        per_view.push(ViewContribution {
            view,
            contribution,
            mass,
            density: mass / volume,
            background: view_mass / view_volume,
        });
    }
    Ok(BlockScore { total, per_view })
}

/// The alternative block metrics, extended to multi-view blocks by summing
/// over an aggregated view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Total block mass Σcᵢ.
    Mass,
    /// Average degree Σcᵢ/n.
    AvgDeg,
    /// Density Σcᵢ/v.
    Dens,
    /// Leading singular value of the view-aggregated block adjacency.
    SingVal,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Mass,
        BaselineKind::AvgDeg,
        BaselineKind::Dens,
        BaselineKind::SingVal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BaselineKind::Mass => "mass",
            BaselineKind::AvgDeg => "avgdeg",
            BaselineKind::Dens => "dens",
            BaselineKind::SingVal => "singval",
        }
    }
}

const POWER_ITERATION_CAP: usize = 10_000;
const POWER_ITERATION_TOL: f64 = 1e-8;

/// Score a block with one of the alternative metrics over the selected views.
///
/// For `SingVal`, the aggregated weighted adjacency is materialized at block
/// scale only and its leading singular value found by power iteration from a
/// deterministic all-ones start.
pub fn baseline_score(
    kind: BaselineKind,
    block: &BlockState,
    graph: &MultiViewGraph,
    views: &[usize],
) -> Result<f64, MetricError> {
    let n = block.len() as f64;
    if block.is_empty() {
        return Err(MetricError::InvalidVolume(0.0));
    }
    let total_mass: f64 = views.iter().map(|&view| block.mass(view)).sum();
    match kind {
        BaselineKind::Mass => Ok(total_mass),
        BaselineKind::AvgDeg => Ok(total_mass / n),
        BaselineKind::Dens => {
            let volume = block.volume();
            if volume == 0.0 {
                Ok(0.0)
            } else {
                Ok(total_mass / volume)
            }
        }
        BaselineKind::SingVal => {
            if total_mass == 0.0 {
                return Ok(0.0);
            }
            let adjacency = aggregated_block_adjacency(block, graph, views);
            leading_singular_value(&adjacency, block.len())
        }
    }
}

/// Dense n×n adjacency of the block, with weights summed across the selected
/// views. Row-major, symmetric, zero diagonal.
pub fn aggregated_block_adjacency(
    block: &BlockState,
    graph: &MultiViewGraph,
    views: &[usize],
) -> Vec<f64> {
    let members: Vec<usize> = block.members().collect();
    let n = members.len();
    let position: std::collections::HashMap<usize, usize> = members
        .iter()
        .enumerate()
        .map(|(pos, &node)| (node, pos))
        .collect();
    let mut adjacency = vec![0.0; n * n];
    for &view_idx in views {
        let view = graph.view(view_idx);
        // Walk each shared value's members inside the block.
        let mut counts: std::collections::HashMap<u32, Vec<usize>> =
            std::collections::HashMap::new();
        for &node in &members {
            for &value in view.values_of(node) {
                counts.entry(value).or_default().push(position[&node]);
            }
        }
        let mut values: Vec<u32> = counts.keys().copied().collect();
        values.sort_unstable();
        for value in values {
            let carriers = &counts[&value];
            if carriers.len() < 2 {
                continue;
            }
            let weight = view.ief(value);
            for i in 0..carriers.len() {
                for j in (i + 1)..carriers.len() {
                    adjacency[carriers[i] * n + carriers[j]] += weight;
                    adjacency[carriers[j] * n + carriers[i]] += weight;
                }
            }
        }
    }
    adjacency
}

/// Leading singular value of a symmetric non-negative matrix by power
/// iteration (all-ones start, relative tolerance 1e-8, capped iterations).
pub fn leading_singular_value(matrix: &[f64], n: usize) -> Result<f64, MetricError> {
    debug_assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return Ok(0.0);
    }
    let mut vector = vec![1.0 / (n as f64).sqrt(); n];
    let mut eigenvalue = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let mut next = vec![0.0; n];
        for row in 0..n {
            let mut acc = 0.0;
            for col in 0..n {
                acc += matrix[row * n + col] * vector[col];
            }
            next[row] = acc;
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for x in next.iter_mut() {
            *x /= norm;
        }
        let previous = eigenvalue;
        eigenvalue = norm;
        vector = next;
        if (eigenvalue - previous).abs() <= POWER_ITERATION_TOL * eigenvalue.abs() {
            return Ok(eigenvalue);
        }
    }
    Err(MetricError::PowerIterationDiverged(POWER_ITERATION_CAP))
}
