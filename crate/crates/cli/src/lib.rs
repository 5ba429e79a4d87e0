//! The `brnet` command line: single simulations, δ-sweeps written as CSV,
//! spectra, equilibrium enumeration and named scenarios.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use brnet_core::dynamics::{
    replay_schedule_with, run, DynamicsConfig, InitialProfile, RecordLevel, ReplayConfig,
    DEFAULT_EPSILON, DEFAULT_MAX_ROUNDS,
};
use brnet_core::equilibria::{
    enumerate_path_configurations, enumerate_stable_active_sets, uniqueness_regime,
    DEFAULT_BRUTE_FORCE_CAP,
};
use brnet_core::spec::{GraphRef, GraphSpec, ResolvedGraph};
use brnet_core::spectral::{eigenvalues_sym, Threshold};
use brnet_core::sweep::{
    bundle_csv, preset, sweep_chunked, sweep_label, threshold_lines, DeltaGrid, SweepSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(brnet_core::Error),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(brnet_core::Error::Guard(_)) => EXIT_GUARD,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Io(..) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) if path.as_os_str().is_empty() => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<brnet_core::Error> for CliError {
    fn from(e: brnet_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io(PathBuf::new(), e)
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Core(brnet_core::Error::Input(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "brnet", version, about = "Best-response dynamics on networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trajectory and print its summary.
    Simulate(SimulateArgs),
    /// Sweep δ over a grid with several seeded trials each; writes CSV.
    Sweep(SweepArgs),
    /// Adjacency spectrum and stability threshold lines.
    Spectrum(GraphArg),
    /// Stable active sets at one δ.
    Equilibria(EquilibriaArgs),
    /// Print a named construction with its start and schedule.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Args)]
pub struct GraphArg {
    /// Graph spec, e.g. path:6, er:100:0.2:1, kml:4:1, p5slow:0.99, or inline JSON.
    #[arg(long)]
    pub graph: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitialArg {
    UniformRandom,
    AllZero,
    AllOne,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RecordArg {
    Summary,
    Events,
    Full,
}

impl From<RecordArg> for RecordLevel {
    fn from(r: RecordArg) -> Self {
        match r {
            RecordArg::Summary => RecordLevel::Summary,
            RecordArg::Events => RecordLevel::Events,
            RecordArg::Full => RecordLevel::Full,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: String,
    /// Defaults to the scenario's suggested value when the graph names one.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub epsilon_reshuffle: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: u64,
    /// Defaults to the scenario's start, else uniform random.
    #[arg(long, value_enum)]
    pub initial: Option<InitialArg>,
    #[arg(long, value_enum, default_value = "events")]
    pub record: RecordArg,
    /// Replay the scenario's fixed schedule instead of random order.
    #[arg(long)]
    pub replay: bool,
    /// Write the trajectory JSON here.
    #[arg(long)]
    pub traj: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, required_unless_present = "preset")]
    pub graph: Option<String>,
    #[arg(long, default_value_t = 0.0, conflicts_with = "preset")]
    pub delta_start: f64,
    #[arg(long, default_value_t = 1.0, conflicts_with = "preset")]
    pub delta_end: f64,
    #[arg(long, default_value_t = 0.005, conflicts_with = "preset")]
    pub delta_step: f64,
    /// Explicit comma-separated δ values instead of a range.
    #[arg(long, value_delimiter = ',', conflicts_with = "preset")]
    pub delta_list: Option<Vec<f64>>,
    /// Trials per δ; 10 unless a preset says otherwise.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Base seed; 0 unless a preset says otherwise.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON, conflicts_with = "preset")]
    pub epsilon: f64,
    #[arg(long, conflicts_with = "preset")]
    pub epsilon_reshuffle: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS, conflicts_with = "preset")]
    pub max_rounds: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write one JSON line per row with its full trajectory.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    /// Run a named figure bundle instead of a single graph.
    #[arg(long, conflicts_with = "graph")]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub delta: f64,
    /// Enumerate every subset, refusing graphs above --max-n vertices.
    #[arg(long)]
    pub brute_force: bool,
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    pub max_n: usize,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario spec: cospectral, p5slow:<δ>, chain:<k>:<δ>, singlecomp or union:<k>:<δ>[:len].
    #[arg(long)]
    pub name: String,
}

fn resolve(graph: &str) -> Result<(GraphSpec, ResolvedGraph), CliError> {
    let spec: GraphSpec = graph.parse()?;
    let resolved = spec.build()?;
    Ok((spec, resolved))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| stdout_err(e.into()))?;
    writeln!(out).map_err(stdout_err)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Equilibria(a) => equilibria(a, out),
        Command::Scenario(a) => scenario(a, out),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, resolved) = resolve(&a.graph)?;
    let scenario = resolved.scenario.as_ref();
    let g = &resolved.graph;
    let delta = a
        .delta
        .or(scenario.map(|s| s.delta_hint))
        .ok_or_else(|| input_err("--delta is required for this graph"))?;
    let initial = match a.initial {
        Some(InitialArg::UniformRandom) => InitialProfile::UniformRandom,
        Some(InitialArg::AllZero) => InitialProfile::AllZero,
        Some(InitialArg::AllOne) => InitialProfile::AllOne,
        None => scenario
            .map(|s| InitialProfile::Explicit(s.initial.clone()))
            .unwrap_or(InitialProfile::UniformRandom),
    };
    let cfg = DynamicsConfig {
        delta,
        epsilon: a.epsilon,
        epsilon_reshuffle: a.epsilon_reshuffle,
        max_rounds: a.max_rounds,
        seed: a.seed,
        initial,
        record: a.record.into(),
    };
    cfg.validate()?;
    let rec = if a.replay {
        let bundle = scenario.ok_or_else(|| input_err("--replay needs a scenario graph"))?;
        let schedule = bundle
            .schedule
            .as_ref()
            .ok_or_else(|| input_err(format!("scenario '{}' has no fixed schedule", bundle.name)))?;
        let x0 = match &cfg.initial {
            InitialProfile::Explicit(p) => p.clone(),
            _ => return Err(input_err("--replay needs the scenario's own start")),
        };
        let rcfg = ReplayConfig {
            delta,
            epsilon: cfg.epsilon,
            epsilon_reshuffle: cfg.epsilon_reshuffle(),
            record: cfg.record,
        };
        replay_schedule_with(g, &rcfg, &x0, schedule)?
    } else {
        run(g, &cfg)?
    };
    if let Some(path) = &a.traj {
        let mut f = create(path)?;
        serde_json::to_writer(&mut f, &rec.to_wire())
            .map_err(|e| CliError::Io(path.clone(), e.into()))?;
        f.flush().map_err(|e| CliError::Io(path.clone(), e))?;
    }
    let summary = json!({
        "graph": spec.to_string(),
        "n": rec.n,
        "delta": rec.delta,
        "seed": a.seed,
        "converged": rec.converged,
        "rounds": rec.rounds,
        "steps": rec.step_count,
        "last_change_round": rec.last_change_round,
        "active_changes": rec.active_change_count,
        "reshuffles": rec.reshuffles.iter().map(|r| (r.t, r.agent)).collect::<Vec<_>>(),
        "final_residual": rec.final_residual,
        "active_set": rec.terminal.active_set(),
    });
    write_json(out, &summary)
}

/// The sweeps a `sweep` invocation stands for.
pub fn sweep_specs(a: &SweepArgs) -> Result<Vec<SweepSpec>, CliError> {
    if let Some(name) = &a.preset {
        return Ok(preset(name)?
            .sweeps
            .into_iter()
            .map(|mut s| {
                s.base_seed = a.seed.unwrap_or(s.base_seed);
                s.trials = a.trials.unwrap_or(s.trials);
                s
            })
            .collect());
    }
    let graph = a.graph.as_deref().ok_or_else(|| input_err("--graph or --preset is required"))?;
    let grid = match &a.delta_list {
        Some(list) => DeltaGrid::List(list.clone()),
        None => DeltaGrid::Range {
            start: a.delta_start,
            end: a.delta_end,
            step: a.delta_step,
        },
    };
    let mut spec = SweepSpec::new(GraphRef::Spec(graph.to_string()), grid, a.trials.unwrap_or(10))
        .with_seed(a.seed.unwrap_or(0))
        .with_epsilon(a.epsilon);
    spec.epsilon_reshuffle = a.epsilon_reshuffle;
    spec.max_rounds = a.max_rounds;
    if a.jsonl.is_some() {
        spec.record = RecordLevel::Full;
    }
    Ok(vec![spec])
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let specs = sweep_specs(&a)?;
    let mut built = Vec::with_capacity(specs.len());
    for spec in &specs {
        spec.validate()?;
        built.push(spec.graph.parse()?.build()?.graph);
    }
    let mut jsonl = a.jsonl.as_deref().map(create).transpose()?;
    let never = AtomicBool::new(false);
    let mut tables = Vec::with_capacity(specs.len());
    for (i, (spec, g)) in specs.iter().zip(&built).enumerate() {
        let label = sweep_label(spec, i);
        let (rows, records) = sweep_chunked(g, spec, usize::MAX, jsonl.is_some(), &never, |_| {})?;
        if let (Some(f), Some(path)) = (jsonl.as_mut(), a.jsonl.as_ref()) {
            for (row, rec) in rows.iter().zip(&records) {
                let line = json!({ "sweep": label, "row": row, "trajectory": rec.to_wire() });
                writeln!(f, "{line}").map_err(|e| CliError::Io(path.clone(), e))?;
            }
        }
        tables.push((label, rows));
    }
    if let (Some(mut f), Some(path)) = (jsonl, a.jsonl.as_ref()) {
        f.flush().map_err(|e| CliError::Io(path.clone(), e))?;
    }
    let csv = bundle_csv(&tables);
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(csv.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| CliError::Io(path.clone(), e))
        }
        None => out.write_all(csv.as_bytes()).map_err(stdout_err),
    }
}

fn spectrum(a: GraphArg, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, resolved) = resolve(&a.graph)?;
    let g = &resolved.graph;
    let eig = eigenvalues_sym(g).eigenvalues;
    let lambda_min = eig.first().copied();
    let v = json!({
        "graph": spec.to_string(),
        "n": g.n(),
        "edge_count": g.edge_count(),
        "spectrum": eig,
        "lambda_min": lambda_min,
        "lambda_max": eig.last().copied(),
        "threshold": lambda_min.map(Threshold::from_lambda_min),
        "threshold_lines": threshold_lines(g),
    });
    write_json(out, &v)
}

fn equilibria(a: EquilibriaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.delta) {
        return Err(input_err(format!("delta must lie in [0,1], got {}", a.delta)));
    }
    let (spec, resolved) = resolve(&a.graph)?;
    let g = &resolved.graph;
    let regime = uniqueness_regime(g, a.delta);
    let mut v = json!({
        "graph": spec.to_string(),
        "delta": a.delta,
        "n": g.n(),
        "regime": regime,
    });
    let path_n = match spec {
        GraphSpec::Path(n) => Some(n),
        _ => None,
    };
    if a.brute_force || (path_n.is_none() && g.n() <= a.max_n) {
        let reports = enumerate_stable_active_sets(g, a.delta, a.max_n)?;
        v["method"] = json!("brute-force");
        v["count"] = json!(reports.len());
        v["reports"] = json!(reports);
    } else if let Some(n) = path_n {
        let e = enumerate_path_configurations(n, a.delta)?;
        v["method"] = json!("path-configurations");
        v["count"] = json!(e.configurations.len());
        v["configurations"] = json!(e.configurations);
        v["boundary_warnings"] = json!(e.boundary_warnings);
    } else {
        return Err(CliError::Core(brnet_core::Error::Guard(format!(
            "graph has {} vertices; enumeration is limited to {} (raise --max-n up to 32)",
            g.n(),
            a.max_n
        ))));
    }
    write_json(out, &v)
}

fn scenario(a: ScenarioArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, resolved) = resolve(&a.name)?;
    let bundle = resolved.scenario.ok_or_else(|| {
        input_err(format!(
            "'{spec}' is not a scenario; try cospectral, p5slow:<delta>, chain:<k>:<delta>, singlecomp or union:<k>:<delta>"
        ))
    })?;
    write_json(out, &json!(bundle))
}
