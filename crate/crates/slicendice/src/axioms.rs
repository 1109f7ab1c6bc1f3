//! Monotonicity properties every block-suspiciousness metric should satisfy,
//! with a sampling harness that checks them against the MVERE metric and the
//! four alternative metrics.
//!
//! Each axiom compares two configurations that differ in exactly one respect;
//! the one the axiom declares more suspicious must score strictly higher. The
//! harness samples random feasible configurations (block density above
//! background in every view), applies the axiom's perturbation, and counts
//! violations. Alternative metrics are evaluated on a realized block — a
//! complete subgraph with uniform pair weights matching the configuration —
//! so the singular-value metric runs through the same power iteration used
//! for block scoring.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metric::{leading_singular_value, view_nll, BaselineKind};

/// The five axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// More mass in one view, all else fixed → more suspicious.
    Mass,
    /// Larger volume at fixed densities → more suspicious.
    Size,
    /// Sparser background in one view, block fixed → more suspicious.
    Contrast,
    /// Smaller volume at fixed masses → more suspicious.
    Concentration,
    /// Fixed total mass shifted toward the sparser view → more suspicious.
    CrossView,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::Mass,
        Axiom::Size,
        Axiom::Contrast,
        Axiom::Concentration,
        Axiom::CrossView,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Axiom::Mass => "mass",
            Axiom::Size => "size",
            Axiom::Contrast => "contrast",
            Axiom::Concentration => "concentration",
            Axiom::CrossView => "cross_view",
        }
    }
}

/// Which scoring function the harness evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// The MVERE negative log-likelihood.
    Suspiciousness,
    Baseline(BaselineKind),
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 5] = [
        ScoreKind::Suspiciousness,
        ScoreKind::Baseline(BaselineKind::Mass),
        ScoreKind::Baseline(BaselineKind::AvgDeg),
        ScoreKind::Baseline(BaselineKind::Dens),
        ScoreKind::Baseline(BaselineKind::SingVal),
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ScoreKind::Suspiciousness => "suspiciousness",
            ScoreKind::Baseline(kind) => kind.label(),
        }
    }
}

/// An abstract block-in-graph configuration: `n` nodes, per-view block
/// densities and background densities, and the enclosing view volume.
///
/// Masses follow as `cᵢ = ρᵢ·v`, `Cᵢ = Pᵢ·V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub nodes: usize,
    pub densities: Vec<f64>,
    pub backgrounds: Vec<f64>,
    pub view_volume: f64,
}

impl Config {
    pub fn volume(&self) -> f64 {
        let n = self.nodes as f64;
        n * (n - 1.0) / 2.0
    }

    pub fn masses(&self) -> Vec<f64> {
        self.densities.iter().map(|d| d * self.volume()).collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.nodes >= 2
            && self
                .densities
                .iter()
                .zip(&self.backgrounds)
                .all(|(rho, p)| rho > p && *p > 0.0)
    }
}

/// Evaluate one scoring function on a configuration.
///
/// Alternative metrics are aggregate functions of the realized uniform block;
/// the singular value is computed by power iteration on the materialized
/// block adjacency with uniform pair weight `Σcᵢ/v`.
pub fn score(kind: ScoreKind, config: &Config) -> f64 {
    let v = config.volume();
    let n = config.nodes as f64;
    match kind {
        ScoreKind::Suspiciousness => {
            let big_v = config.view_volume;
            config
                .densities
                .iter()
                .zip(&config.backgrounds)
                .map(|(rho, p)| {
                    view_nll(rho * v, v, p * big_v, big_v)
                        .expect("harness only samples feasible configurations")
                })
                .sum()
        }
        ScoreKind::Baseline(BaselineKind::Mass) => config.masses().iter().sum(),
        ScoreKind::Baseline(BaselineKind::AvgDeg) => config.masses().iter().sum::<f64>() / n,
        ScoreKind::Baseline(BaselineKind::Dens) => config.masses().iter().sum::<f64>() / v,
        ScoreKind::Baseline(BaselineKind::SingVal) => {
            let weight = config.masses().iter().sum::<f64>() / v;
            let size = config.nodes;
            let mut matrix = vec![weight; size * size];
            for i in 0..size {
                matrix[i * size + i] = 0.0;
            }
            leading_singular_value(&matrix, size).expect("uniform matrix converges")
        }
    }
}

/// A concrete pair of configurations on which a metric defied an axiom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub metric: String,
    pub axiom: String,
    /// The configuration the axiom declares more suspicious.
    pub more_suspicious: Config,
    pub less_suspicious: Config,
    pub more_score: f64,
    pub less_score: f64,
}

/// Outcome of checking one (metric, axiom) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub metric: String,
    pub axiom: String,
    pub samples: usize,
    pub violations: usize,
    pub counterexample: Option<Counterexample>,
}

impl AxiomCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn range(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// A random feasible configuration with 2–5 views.
fn sample_config(rng: &mut impl Rng) -> Config {
    let views = rng.gen_range(2..=5);
    let nodes = rng.gen_range(3..=40usize);
    let graph_nodes = (nodes + rng.gen_range(10..=1000)) as f64;
    let view_volume = graph_nodes * (graph_nodes - 1.0) / 2.0;
    let mut densities = Vec::with_capacity(views);
    let mut backgrounds = Vec::with_capacity(views);
    for _ in 0..views {
        let background = range(rng, 1e-3, 5.0);
        let uplift = range(rng, 1.5, 30.0);
        backgrounds.push(background);
        densities.push(background * uplift);
    }
    Config {
        nodes,
        densities,
        backgrounds,
        view_volume,
    }
}

/// Produce one (more suspicious, less suspicious) pair for an axiom.
fn sample_pair(axiom: Axiom, rng: &mut impl Rng) -> (Config, Config) {
    loop {
        let base = sample_config(rng);
        match axiom {
            Axiom::Mass => {
                // Raise one view's mass; everything else fixed.
                let view = rng.gen_range(0..base.densities.len());
                let mut more = base.clone();
                more.densities[view] *= range(rng, 1.1, 3.0);
                return (more, base);
            }
            Axiom::Size => {
                // Same densities, larger volume.
                let mut more = base.clone();
                more.nodes += rng.gen_range(1..=10);
                return (more, base);
            }
            Axiom::Contrast => {
                // Same block, one view's background raised while staying
                // below the block density.
                let view = rng.gen_range(0..base.densities.len());
                let headroom = base.densities[view] / base.backgrounds[view];
                let factor = range(rng, 1.05, (headroom * 0.9).max(1.06));
                let mut less = base.clone();
                less.backgrounds[view] *= factor;
                if !less.is_feasible() {
                    continue;
                }
                return (base, less);
            }
            Axiom::Concentration => {
                // Same masses, larger volume. Densities rescale by v/v'.
                let extra = rng.gen_range(1..=5usize);
                let mut less = base.clone();
                less.nodes += extra;
                let shrink = base.volume() / less.volume();
                for density in less.densities.iter_mut() {
                    *density *= shrink;
                }
                if !less.is_feasible() {
                    continue;
                }
                return (base, less);
            }
            Axiom::CrossView => {
                // Swap a large and a small mass between a sparse and a dense
                // view; the rest fixed. Both arrangements must be feasible.
                let mut more = base.clone();
                if more.backgrounds[0] == more.backgrounds[1] {
                    continue;
                }
                let (sparse, dense) = if more.backgrounds[0] < more.backgrounds[1] {
                    (0, 1)
                } else {
                    (1, 0)
                };
                let p_dense = more.backgrounds[dense];
                let small = p_dense * range(rng, 1.5, 10.0);
                let large = small * range(rng, 1.2, 5.0);
                more.densities[sparse] = large;
                more.densities[dense] = small;
                let mut less = more.clone();
                less.densities[sparse] = small;
                less.densities[dense] = large;
                debug_assert!(more.is_feasible() && less.is_feasible());
                return (more, less);
            }
        }
    }
}

/// Check one (metric, axiom) cell over `samples` random configurations.
///
/// A violation is any pair where the more-suspicious configuration fails to
/// score strictly higher. The first violating pair is kept as a concrete
/// counterexample.
pub fn check_axiom(kind: ScoreKind, axiom: Axiom, samples: usize, rng: &mut impl Rng) -> AxiomCheck {
    let mut violations = 0;
    let mut counterexample = None;
    for _ in 0..samples {
        let (more, less) = sample_pair(axiom, rng);
        let more_score = score(kind, &more);
        let less_score = score(kind, &less);
        // Adherence needs strictly greater; equality (or NaN) is a violation.
        let strictly_greater = more_score > less_score;
        if !strictly_greater {
            violations += 1;
            if counterexample.is_none() {
                counterexample = Some(Counterexample {
                    metric: kind.label().to_string(),
                    axiom: axiom.label().to_string(),
                    more_suspicious: more,
                    less_suspicious: less,
                    more_score,
                    less_score,
                });
            }
        }
    }
    AxiomCheck {
        metric: kind.label().to_string(),
        axiom: axiom.label().to_string(),
        samples,
        violations,
        counterexample,
    }
}

/// Adherence grid: which metric satisfies which axiom.
///
/// The MVERE metric satisfies all five. The alternatives each fail contrast
/// and cross-view distribution (none observes background density or
/// per-view placement); mass additionally fails concentration, and density
/// fails size.
pub fn expected_adherence(kind: ScoreKind, axiom: Axiom) -> bool {
    match kind {
        ScoreKind::Suspiciousness => true,
        ScoreKind::Baseline(BaselineKind::Mass) => {
            matches!(axiom, Axiom::Mass | Axiom::Size)
        }
        ScoreKind::Baseline(BaselineKind::AvgDeg) => {
            matches!(axiom, Axiom::Mass | Axiom::Size | Axiom::Concentration)
        }
        ScoreKind::Baseline(BaselineKind::Dens) => {
            matches!(axiom, Axiom::Mass | Axiom::Concentration)
        }
        ScoreKind::Baseline(BaselineKind::SingVal) => {
            matches!(axiom, Axiom::Mass | Axiom::Size | Axiom::Concentration)
        }
    }
}

/// One metric's row of the comparison grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub metric: String,
    pub checks: Vec<AxiomCheck>,
}

/// The full comparison grid: every metric × every axiom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridReport {
    pub samples: usize,
    pub rng_seed: u64,
    pub rows: Vec<GridRow>,
}

impl GridReport {
    /// True iff every cell matches [`expected_adherence`].
    pub fn matches_expectations(&self) -> bool {
        self.rows.iter().all(|row| {
            row.checks.iter().all(|check| {
                let kind = ScoreKind::ALL
                    .iter()
                    .find(|k| k.label() == check.metric)
                    .copied()
                    .expect("metric label");
                let axiom = Axiom::ALL
                    .iter()
                    .find(|a| a.label() == check.axiom)
                    .copied()
                    .expect("axiom label");
                check.holds() == expected_adherence(kind, axiom)
            })
        })
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample> {
        self.rows
            .iter()
            .flat_map(|row| row.checks.iter())
            .filter_map(|check| check.counterexample.as_ref())
    }
}

/// Run the whole grid with a seeded sampler.
pub fn full_grid(samples: usize, rng_seed: u64) -> GridReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let rows = ScoreKind::ALL
        .iter()
        .map(|&kind| GridRow {
            metric: kind.label().to_string(),
            checks: Axiom::ALL
                .iter()
                .map(|&axiom| check_axiom(kind, axiom, samples, &mut rng))
                .collect(),
        })
        .collect();
    GridReport {
        samples,
        rng_seed,
        rows,
    }
}
