//! Command-line front end: mine, simulate, evaluate, axioms, bench.
//!
//! Every run writes a manifest next to its outputs with the fully resolved
//! configuration, rng seed, input/output paths, output checksums and wall
//! time — enough to reproduce the run exactly. Human-readable progress goes
//! to stderr; machine output goes only to files or stdout. Partial output
//! files are removed when a command fails.
//!
//! Exit codes: 0 success, 1 input error (bad arguments, unreadable input),
//! 2 runtime failure.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::axioms;
use crate::bench;
use crate::evaluation::{self, EvalConfig, Method};
use crate::ingest::{self, Stopwords, TableSchema};
use crate::metric::ViewContribution;
use crate::mvgraph::build_graph;
use crate::search::{mine, MinedBlock, MinerConfig};
use crate::seeding::SeedConfig;
use crate::simulator::{self, Preset, SimScenario, ViewBias};

/// How the CLI failed, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable/invalid input → exit 1.
    Input(String),
    /// Failure while computing or writing → exit 2.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(msg) | CliError::Runtime(msg) => msg,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_err(err: impl std::fmt::Display) -> CliError {
    CliError::Input(err.to_string())
}

fn runtime_err(err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "slicendice",
    version,
    about = "Mine suspiciously synchronized entity groups from multi-attribute tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine suspicious groups from a delimited table.
    Mine(MineArgs),
    /// Generate a synthetic table with planted attacks.
    Simulate(SimulateArgs),
    /// Score detectors against planted ground truth.
    Evaluate(EvaluateArgs),
    /// Check the metric comparison grid and dump counterexamples.
    Axioms(AxiomsArgs),
    /// Time seeding and scaling behavior.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MineArgs {
    /// Input table (delimited text with a header row).
    pub input: PathBuf,
    /// Output path for mined blocks (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Header name of the entity-id column.
    #[arg(long, default_value = "id")]
    pub id_col: String,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    pub field_delim: char,
    /// Intra-cell value delimiter.
    #[arg(long, default_value = "|")]
    pub delim: char,
    /// Lowercase all value tokens before comparison.
    #[arg(long)]
    pub lowercase: bool,
    /// Views per block (z).
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    /// Independent seed expansions.
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    /// Frequency percentile for view sampling weights.
    #[arg(long, default_value_t = 95.0)]
    pub percentile: f64,
    /// Jaccard threshold for pruning near-duplicate blocks.
    #[arg(long, default_value_t = 0.05)]
    pub jaccard: f64,
    /// Stopword file (one token per line under [attribute] headers).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Worker threads (0 = one per logical cpu). SLICENDICE_THREADS overrides
    /// the default.
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
    /// Master rng seed.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Iteration cap per seed expansion.
    #[arg(long, default_value_t = 1000)]
    pub iteration_cap: u32,
    /// Seed-growth attempts per view before a restart.
    #[arg(long, default_value_t = 20)]
    pub attempt_cap: u32,
    /// Seed restarts before giving up.
    #[arg(long, default_value_t = 50)]
    pub restart_cap: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Output path for the generated table (delimited text).
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Output path for the ground truth (JSON).
    #[arg(long)]
    pub out_truth: PathBuf,
    /// Named scenario to start from.
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Entity count N.
    #[arg(long)]
    pub entities: Option<usize>,
    /// Attribute count K (cardinalities default to 50·i).
    #[arg(long)]
    pub attributes: Option<usize>,
    /// Entities per attack.
    #[arg(long)]
    pub attack_entities: Option<usize>,
    /// Attributes per attack.
    #[arg(long)]
    pub attack_views: Option<usize>,
    /// Number of attacks.
    #[arg(long)]
    pub attacks: Option<usize>,
    /// Mean values per normal entity-attribute (λ).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Attack temperature (τ ≥ 1).
    #[arg(long)]
    pub tau: Option<f64>,
    /// How attacks choose attributes.
    #[arg(long, value_enum)]
    pub view_bias: Option<ViewBiasArg>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    /// Directory for report files.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated presets (default: all five).
    #[arg(long, value_delimiter = ',')]
    pub presets: Vec<String>,
    /// Comma-separated methods (default: all five).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Repetitions per preset with derived seeds.
    #[arg(long, default_value_t = 5)]
    pub reps: u64,
    /// Seed expansions per mining run.
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    /// Views per block (z).
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    /// Base rng seed; repetition r simulates with base+r and mines with
    /// base+10000+r.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AxiomsArgs {
    /// Random feasible configurations per (metric, axiom) cell.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Write the grid CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump counterexamples (JSON lines) here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Directory for timing CSVs.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Trials per measurement point.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum PresetArg {
    HighSync,
    LowSync,
    HighSignal,
    LowSignal,
    HighDim,
}

impl From<PresetArg> for Preset {
    fn from(arg: PresetArg) -> Preset {
        match arg {
            PresetArg::HighSync => Preset::HighSync,
            PresetArg::LowSync => Preset::LowSync,
            PresetArg::HighSignal => Preset::HighSignal,
            PresetArg::LowSignal => Preset::LowSignal,
            PresetArg::HighDim => Preset::HighDim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ViewBiasArg {
    Uniform,
    Proportional,
    Inverse,
}

impl From<ViewBiasArg> for ViewBias {
    fn from(arg: ViewBiasArg) -> ViewBias {
        match arg {
            ViewBiasArg::Uniform => ViewBias::Uniform,
            ViewBiasArg::Proportional => ViewBias::ProportionalToCardinality,
            ViewBiasArg::Inverse => ViewBias::InverseToCardinality,
        }
    }
}

fn default_threads() -> usize {
    std::env::var("SLICENDICE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

/// FNV-1a, 64-bit; the checksum recorded for every output artifact.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    path: String,
    bytes: usize,
    fnv1a64: String,
}

/// Reproducibility record emitted for every run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub rng_seed: u64,
    pub inputs: Vec<String>,
    outputs: Vec<OutputEntry>,
    pub wall_ms: u64,
}

/// Tracks files written during a run and deletes them unless committed.
struct OutputGuard {
    written: Vec<(PathBuf, usize, u64)>,
    committed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        Self {
            written: Vec::new(),
            committed: false,
        }
    }

    /// Write through a staging file so the final path never holds a torn
    /// artifact. Staging lives next to the target, or in SLICENDICE_TMPDIR
    /// when that is set (copied over if a rename cannot cross filesystems).
    fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(runtime_err)?;
            }
        }
        let staging_dir = match std::env::var_os("SLICENDICE_TMPDIR") {
            Some(dir) => PathBuf::from(dir),
            None => path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        fs::create_dir_all(&staging_dir).map_err(runtime_err)?;
        let staging = staging_dir.join(format!(
            ".{}.{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        ));
        fs::write(&staging, contents).map_err(runtime_err)?;
        if fs::rename(&staging, path).is_err() {
            let copied = fs::copy(&staging, path);
            let _ = fs::remove_file(&staging);
            copied.map_err(runtime_err)?;
        }
        self.written
            .push((path.to_path_buf(), contents.len(), fnv1a64(contents)));
        Ok(())
    }

    fn finish(
        mut self,
        command: &str,
        config: serde_json::Value,
        rng_seed: u64,
        inputs: Vec<String>,
        started: Instant,
        manifest_path: &Path,
    ) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            rng_seed,
            inputs,
            outputs: self
                .written
                .iter()
                .map(|(path, bytes, sum)| OutputEntry {
                    path: path.display().to_string(),
                    bytes: *bytes,
                    fnv1a64: format!("{sum:016x}"),
                })
                .collect(),
            wall_ms: started.elapsed().as_millis() as u64,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(runtime_err)?;
        fs::write(manifest_path, text).map_err(runtime_err)?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.committed {
            for (path, _, _) in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// One JSONL record per mined block; field names are a stable contract.
#[derive(Debug, Serialize)]
struct BlockRecord<'a> {
    rank: usize,
    score: f64,
    views: &'a [ViewNameRecord],
    entity_ids: &'a [String],
    iterations: u32,
    seed_id: u64,
    capped: bool,
}

#[derive(Debug, Serialize)]
struct ViewNameRecord {
    view: String,
    mass: f64,
    density: f64,
    background: f64,
    contribution: f64,
}

fn view_records(block: &MinedBlock) -> Vec<ViewNameRecord> {
    block
        .view_names
        .iter()
        .zip(&block.score.per_view)
        .map(|(name, pv): (&String, &ViewContribution)| ViewNameRecord {
            view: name.clone(),
            mass: pv.mass,
            density: pv.density,
            background: pv.background,
            contribution: pv.contribution,
        })
        .collect()
}

/// Render the deduplicated block list as JSON lines.
pub fn blocks_to_jsonl(blocks: &[MinedBlock]) -> String {
    let mut out = String::new();
    for (rank, block) in blocks.iter().enumerate() {
        let views = view_records(block);
        let record = BlockRecord {
            rank: rank + 1,
            score: block.score.total,
            views: &views,
            entity_ids: &block.entity_ids,
            iterations: block.iterations,
            seed_id: block.seed_id,
            capped: block.capped,
        };
        out.push_str(&serde_json::to_string(&record).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Axioms(args) => cmd_axioms(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

pub fn cmd_mine(args: MineArgs) -> CliResult<()> {
    let started = Instant::now();
    if args.z == 0 {
        return Err(CliError::Input("--z must be at least 1".to_string()));
    }
    if args.seeds == 0 {
        return Err(CliError::Input("--seeds must be at least 1".to_string()));
    }
    if !(0.0..=1.0).contains(&args.jaccard) {
        return Err(CliError::Input(
            "--jaccard must lie in [0, 1]".to_string(),
        ));
    }

    let schema = TableSchema {
        id_column: args.id_col.clone(),
        field_delimiter: args.field_delim,
        value_delimiter: args.delim,
        lowercase: args.lowercase,
    };
    let file = fs::File::open(&args.input)
        .map_err(|err| input_err(format!("{}: {err}", args.input.display())))?;
    let table = ingest::load_attribute_table(BufReader::new(file), &schema).map_err(input_err)?;
    let stopwords = match &args.stopwords {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|err| input_err(format!("{}: {err}", path.display())))?;
            Stopwords::parse(&text).map_err(input_err)?
        }
        None => Stopwords::empty(),
    };
    let table = ingest::apply_stopwords(&table, &stopwords);
    let ief = ingest::compute_ief(&table).map_err(input_err)?;
    let graph = build_graph(&table, &ief);
    eprintln!(
        "loaded {} entities × {} attributes; {} eligible views",
        graph.entity_count(),
        graph.view_count(),
        graph.eligible_views().len()
    );

    let cfg = MinerConfig {
        num_seeds: args.seeds,
        jaccard_threshold: args.jaccard,
        threads: args.threads,
        iteration_cap: args.iteration_cap,
        rng_seed: args.rng_seed,
        seed: SeedConfig {
            views_per_block: args.z,
            frequency_percentile: args.percentile,
            attempt_cap: args.attempt_cap,
            restart_cap: args.restart_cap,
        },
    };
    let outcome = mine(&graph, &cfg);
    eprintln!(
        "{} of {} expansions converged ({} capped, {} seed failures); {} blocks after dedup",
        outcome.summary.converged,
        outcome.summary.seeds_run,
        outcome.summary.capped,
        outcome.summary.seeding_failures,
        outcome.summary.kept_after_dedup
    );

    let mut guard = OutputGuard::new();
    guard.write(&args.out, blocks_to_jsonl(&outcome.blocks).as_bytes())?;
    let manifest_path = manifest_path_for(&args.out);
    guard.finish(
        "mine",
        serde_json::to_value(&args).map_err(runtime_err)?,
        args.rng_seed,
        vec![args.input.display().to_string()],
        started,
        &manifest_path,
    )?;
    if outcome.blocks.is_empty() {
        eprintln!("warning: no blocks found; see manifest at {}", manifest_path.display());
    }
    Ok(())
}

fn scenario_from(args: &SimulateArgs) -> CliResult<SimScenario> {
    let mut scenario = match args.preset {
        Some(preset_arg) => simulator::preset(preset_arg.into()),
        None => SimScenario::defaults(),
    };
    if let Some(n) = args.entities {
        scenario.entities = n;
    }
    if let Some(k) = args.attributes {
        scenario.attributes = k;
        scenario.cardinalities = (1..=k as u64).map(|i| 50 * i).collect();
    }
    if let Some(n) = args.attack_entities {
        scenario.attack_entities = n;
    }
    if let Some(k) = args.attack_views {
        scenario.attack_views = k;
    }
    if let Some(c) = args.attacks {
        scenario.attacks = c;
    }
    if let Some(lambda) = args.lambda {
        scenario.mean_values = lambda;
    }
    if let Some(tau) = args.tau {
        scenario.temperature = tau;
    }
    if let Some(bias) = args.view_bias {
        scenario.view_bias = bias.into();
    }
    scenario.rng_seed = args.rng_seed;
    scenario.validate().map_err(input_err)?;
    Ok(scenario)
}

pub fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let started = Instant::now();
    let scenario = scenario_from(&args)?;
    let (table, truth) = simulator::generate(&scenario).map_err(runtime_err)?;
    let mut guard = OutputGuard::new();
    guard.write(
        &args.out_csv,
        table.to_delimited(&TableSchema::default()).as_bytes(),
    )?;
    guard.write(
        &args.out_truth,
        truth.to_json().map_err(runtime_err)?.as_bytes(),
    )?;
    eprintln!(
        "simulated {} entities × {} attributes with {} planted attack(s)",
        scenario.entities, scenario.attributes, scenario.attacks
    );
    let manifest_path = manifest_path_for(&args.out_csv);
    guard.finish(
        "simulate",
        serde_json::to_value(&args).map_err(runtime_err)?,
        args.rng_seed,
        Vec::new(),
        started,
        &manifest_path,
    )
}

pub fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let started = Instant::now();
    if args.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".to_string()));
    }
    let presets: Vec<Preset> = if args.presets.is_empty() {
        Preset::ALL.to_vec()
    } else {
        args.presets
            .iter()
            .map(|name| {
                Preset::parse(name)
                    .ok_or_else(|| CliError::Input(format!("unknown preset '{name}'")))
            })
            .collect::<CliResult<_>>()?
    };
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods
            .iter()
            .map(|name| {
                Method::parse(name)
                    .ok_or_else(|| CliError::Input(format!("unknown method '{name}'")))
            })
            .collect::<CliResult<_>>()?
    };

    let mut guard = OutputGuard::new();
    let mut summary = String::new();
    summary.push_str(&format!("# {}\n", evaluation::RESCORING_NOTE));
    summary.push_str("scenario,rep,method,auc_pr\n");
    for preset in &presets {
        for rep in 0..args.reps {
            let mut scenario = simulator::preset(*preset);
            scenario.rng_seed = args.rng_seed + rep;
            let cfg = EvalConfig {
                miner: MinerConfig {
                    num_seeds: args.seeds,
                    threads: args.threads,
                    rng_seed: args.rng_seed + 10_000 + rep,
                    seed: SeedConfig {
                        views_per_block: args.z,
                        ..SeedConfig::default()
                    },
                    ..MinerConfig::default()
                },
            };
            let report = evaluation::compare(&scenario, &methods, &cfg).map_err(runtime_err)?;
            for outcome in &report.methods {
                summary.push_str(&format!(
                    "{},{},{},{}\n",
                    preset.label(),
                    rep,
                    outcome.method.label(),
                    outcome.auc_pr
                ));
                let mut points = String::new();
                points.push_str(&format!("# {}\n", report.note));
                points.push_str("threshold,precision,recall\n");
                for point in &outcome.curve.points {
                    points.push_str(&format!(
                        "{},{},{}\n",
                        point.threshold, point.precision, point.recall
                    ));
                }
                let name = format!(
                    "pr_{}_r{}_{}.csv",
                    preset.label(),
                    rep,
                    outcome.method.label()
                );
                guard.write(&args.out_dir.join(name), points.as_bytes())?;
            }
            eprintln!("evaluated {} rep {rep}", preset.label());
        }
    }
    guard.write(&args.out_dir.join("auc_summary.csv"), summary.as_bytes())?;
    let manifest_path = args.out_dir.join("manifest.json");
    guard.finish(
        "evaluate",
        serde_json::to_value(&args).map_err(runtime_err)?,
        args.rng_seed,
        Vec::new(),
        started,
        &manifest_path,
    )
}

pub fn cmd_axioms(args: AxiomsArgs) -> CliResult<()> {
    let started = Instant::now();
    if args.samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".to_string()));
    }
    let report = axioms::full_grid(args.samples, args.rng_seed);
    let mut grid = String::from("metric,mass,size,contrast,concentration,cross_view\n");
    for row in &report.rows {
        grid.push_str(&row.metric);
        for check in &row.checks {
            grid.push_str(if check.holds() { ",pass" } else { ",fail" });
        }
        grid.push('\n');
    }
    let mut guard = OutputGuard::new();
    let mut outputs_written = false;
    match &args.out {
        Some(path) => {
            guard.write(path, grid.as_bytes())?;
            outputs_written = true;
        }
        None => {
            let mut stdout = std::io::stdout();
            stdout.write_all(grid.as_bytes()).map_err(runtime_err)?;
        }
    }
    if let Some(path) = &args.dump {
        let mut dump = String::new();
        for counterexample in report.counterexamples() {
            dump.push_str(&serde_json::to_string(counterexample).map_err(runtime_err)?);
            dump.push('\n');
        }
        guard.write(path, dump.as_bytes())?;
        outputs_written = true;
    }
    let consistent = report.matches_expectations();
    eprintln!(
        "grid {} the published comparison ({} samples per cell)",
        if consistent { "matches" } else { "DIVERGES FROM" },
        args.samples
    );
    if outputs_written {
        let manifest_path = args
            .out
            .as_deref()
            .map(manifest_path_for)
            .unwrap_or_else(|| manifest_path_for(args.dump.as_deref().unwrap()));
        guard.finish(
            "axioms",
            serde_json::to_value(&args).map_err(runtime_err)?,
            args.rng_seed,
            Vec::new(),
            started,
            &manifest_path,
        )?;
    } else {
        guard.committed = true;
    }
    if consistent {
        Ok(())
    } else {
        Err(CliError::Runtime(
            "axiom grid diverges from the published comparison".to_string(),
        ))
    }
}

pub fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let started = Instant::now();
    if args.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".to_string()));
    }
    let base = SimScenario {
        rng_seed: args.rng_seed,
        ..SimScenario::defaults()
    };
    let (table, _) = simulator::generate(&base).map_err(runtime_err)?;
    let ief = ingest::compute_ief(&table).map_err(runtime_err)?;
    let graph = build_graph(&table, &ief);

    // (a) seed-time comparison across z.
    let rows = bench::seed_timing(&graph, &[1, 2, 3, 4, 5], args.trials, 95.0, args.rng_seed);
    let mut seed_csv = String::from("method,z,trial,microseconds,succeeded\n");
    for row in &rows {
        seed_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method, row.z, row.trial, row.micros, row.succeeded
        ));
    }
    for z in [1usize, 2, 3, 4, 5] {
        let greedy: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == "greedy" && r.z == z)
            .map(|r| r.micros)
            .collect();
        let random: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == "random" && r.z == z)
            .map(|r| r.micros)
            .collect();
        if !greedy.is_empty() && !random.is_empty() {
            eprintln!(
                "z={z}: greedy median {:.0}µs, random median {:.0}µs",
                bench::median(&greedy),
                bench::median(&random)
            );
        }
    }

    // (b) runtime vs entity count at a fixed iteration budget.
    let entity_counts = [500usize, 1000, 2000, 4000];
    let scaling_n = bench::scaling_vs_entities(
        &entity_counts,
        100,
        args.trials.min(10),
        &base,
        args.rng_seed,
    );
    let mut scale_n_csv = String::from("entities,iterations,trial,milliseconds\n");
    for row in &scaling_n {
        scale_n_csv.push_str(&format!(
            "{},{},{},{}\n",
            row.entities, row.iterations, row.trial, row.millis
        ));
    }

    // (c) runtime vs iteration budget at fixed N.
    let budgets = [50u32, 100, 200, 400];
    let scaling_t =
        bench::scaling_vs_iterations(&budgets, args.trials.min(10), &base, args.rng_seed);
    let mut scale_t_csv = String::from("iterations,entities,trial,milliseconds\n");
    for row in &scaling_t {
        scale_t_csv.push_str(&format!(
            "{},{},{},{}\n",
            row.iterations, row.entities, row.trial, row.millis
        ));
    }

    let fit = |rows: &[bench::ScalingRow], pick: fn(&bench::ScalingRow) -> f64| {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (pick(r), r.millis)).collect();
        bench::linear_fit_r2(&points)
    };
    if scaling_n.len() >= 2 {
        eprintln!(
            "runtime vs entities: R² = {:.4}",
            fit(&scaling_n, |r| r.entities as f64)
        );
    }
    if scaling_t.len() >= 2 {
        eprintln!(
            "runtime vs iterations: R² = {:.4}",
            fit(&scaling_t, |r| r.iterations as f64)
        );
    }

    let mut guard = OutputGuard::new();
    guard.write(&args.out_dir.join("seed_times.csv"), seed_csv.as_bytes())?;
    guard.write(
        &args.out_dir.join("scaling_entities.csv"),
        scale_n_csv.as_bytes(),
    )?;
    guard.write(
        &args.out_dir.join("scaling_iterations.csv"),
        scale_t_csv.as_bytes(),
    )?;
    guard.finish(
        "bench",
        serde_json::to_value(&args).map_err(runtime_err)?,
        args.rng_seed,
        Vec::new(),
        started,
        &args.out_dir.join("manifest.json"),
    )
}
