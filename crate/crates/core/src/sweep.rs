//! δ-sweeps: many seeded runs per δ on one graph, summarized as CSV rows.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_delta, run_cancellable, DynamicsConfig, InitialProfile, RecordLevel, TrajectoryRecord,
    DEFAULT_EPSILON, DEFAULT_MAX_ROUNDS,
};
use crate::equilibria::{solve_on_active_set, Stability};
use crate::error::{input, Error, Result};
use crate::graph::{connected_components, Graph};
use crate::rng::trial_seed;
use crate::spec::GraphRef;
use crate::spectral::eigenvalues_sym;

pub const CSV_HEADER: &str = "delta,trial,seed,rounds,converged,last_change_round,n_reshuffles,terminal_stable,active_count,largest_component,isolated_active,active_edges";

/// Grid points are rounded to this many decimals so that `start + i·step` is reproducible.
const GRID_DECIMALS: i32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaGrid {
    Range { start: f64, end: f64, step: f64 },
    List(Vec<f64>),
}

impl Default for DeltaGrid {
    fn default() -> Self {
        DeltaGrid::Range {
            start: 0.0,
            end: 1.0,
            step: 0.005,
        }
    }
}

fn round_grid(x: f64) -> f64 {
    let scale = 10f64.powi(GRID_DECIMALS);
    (x * scale).round() / scale
}

impl DeltaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            DeltaGrid::Range { start, end, step } => {
                if !(0.0 <= start && start <= end && end <= 1.0) {
                    return input(format!("need 0 <= start <= end <= 1, got {start}..{end}"));
                }
                if !(step > 0.0) {
                    return input(format!("step must be positive, got {step}"));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count)
                    .map(|i| round_grid(start + i as f64 * step).min(1.0))
                    .collect())
            }
            DeltaGrid::List(ref values) => {
                if values.is_empty() {
                    return input("delta list is empty");
                }
                for &d in values {
                    check_delta(d)?;
                }
                Ok(values.clone())
            }
        }
    }
}

fn default_trials() -> u32 {
    10
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

fn default_record() -> RecordLevel {
    RecordLevel::Summary
}

fn default_initial() -> InitialProfile {
    InitialProfile::UniformRandom
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub graph: GraphRef,
    #[serde(default)]
    pub delta_grid: DeltaGrid,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon_reshuffle: Option<f64>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default = "default_record")]
    pub record: RecordLevel,
    #[serde(default = "default_initial")]
    pub initial: InitialProfile,
    /// Short name used to tell apart the sweeps of a multi-sweep preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SweepSpec {
    pub fn new(graph: impl Into<GraphRef>, delta_grid: DeltaGrid, trials: u32) -> Self {
        SweepSpec {
            graph: graph.into(),
            delta_grid,
            trials,
            base_seed: 0,
            epsilon: DEFAULT_EPSILON,
            epsilon_reshuffle: None,
            max_rounds: DEFAULT_MAX_ROUNDS,
            record: RecordLevel::Summary,
            initial: InitialProfile::UniformRandom,
            label: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return input("trials must be at least 1");
        }
        self.delta_grid.values()?;
        self.config(0.0, 0).validate()
    }

    /// Number of `(δ, trial)` cells.
    pub fn cell_count(&self) -> Result<u64> {
        Ok(self.delta_grid.values()?.len() as u64 * u64::from(self.trials))
    }

    fn config(&self, delta: f64, seed: u64) -> DynamicsConfig {
        DynamicsConfig {
            delta,
            epsilon: self.epsilon,
            epsilon_reshuffle: self.epsilon_reshuffle,
            max_rounds: self.max_rounds,
            seed,
            initial: self.initial.clone(),
            record: self.record,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub trial: u32,
    pub seed: u64,
    pub rounds: f64,
    pub converged: bool,
    pub last_change_round: f64,
    pub n_reshuffles: usize,
    /// Whether the terminal active set supports a stable equilibrium; false when not converged.
    pub terminal_stable: bool,
    pub active_count: usize,
    pub largest_component: usize,
    pub isolated_active: usize,
    pub active_edges: usize,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.delta,
            self.trial,
            self.seed,
            self.rounds,
            self.converged,
            self.last_change_round,
            self.n_reshuffles,
            self.terminal_stable,
            self.active_count,
            self.largest_component,
            self.isolated_active,
            self.active_edges
        )
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

/// CSV for a bundle of labelled sweeps. A single sweep uses the plain header;
/// several get a leading `sweep` column holding each label.
pub fn bundle_csv(tables: &[(String, Vec<SweepRow>)]) -> String {
    if let [(_, rows)] = tables {
        return to_csv(rows);
    }
    let mut out = format!("sweep,{CSV_HEADER}\n");
    for (label, rows) in tables {
        for r in rows {
            let _ = writeln!(out, "{label},{}", r.to_csv_line());
        }
    }
    out
}

/// Label of the `index`-th sweep: its own label, else its position.
pub fn sweep_label(spec: &SweepSpec, index: usize) -> String {
    spec.label.clone().unwrap_or_else(|| index.to_string())
}

/// Row summary of one finished trajectory.
pub fn summarize(g: &Graph, rec: &TrajectoryRecord, delta: f64, trial: u32, seed: u64) -> SweepRow {
    let active = rec.terminal.active_set();
    let inside = active.indicator(g.n());
    let active_edges = g
        .edges()
        .iter()
        .filter(|&&(i, j)| inside[i] && inside[j])
        .count();
    let isolated_active = active
        .members()
        .iter()
        .filter(|&&v| g.neighbors(v).iter().all(|&w| !inside[w]))
        .count();
    let largest_component = connected_components(g, &active)
        .map(|c| c.iter().map(|s| s.len()).max().unwrap_or(0))
        .unwrap_or(0);
    let terminal_stable = rec.converged
        && !active.is_empty()
        && solve_on_active_set(g, delta, &active)
            .map(|r| r.stability == Stability::Stable)
            .unwrap_or(false);
    SweepRow {
        delta,
        trial,
        seed,
        rounds: rec.rounds,
        converged: rec.converged,
        last_change_round: rec.last_change_round,
        n_reshuffles: rec.reshuffles.len(),
        terminal_stable,
        active_count: active.len(),
        largest_component,
        isolated_active,
        active_edges,
    }
}

/// One `(δ, trial)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub delta_index: usize,
    pub delta: f64,
    pub trial: u32,
    pub seed: u64,
}

/// Cells in output order: δ-major, then trial.
pub fn cells(spec: &SweepSpec) -> Result<Vec<Cell>> {
    let deltas = spec.delta_grid.values()?;
    let mut out = Vec::with_capacity(deltas.len() * spec.trials as usize);
    for (i, &delta) in deltas.iter().enumerate() {
        for trial in 0..spec.trials {
            out.push(Cell {
                delta_index: i,
                delta,
                trial,
                seed: trial_seed(spec.base_seed, i as u64, u64::from(trial)),
            });
        }
    }
    Ok(out)
}

pub fn run_cell(
    g: &Graph,
    spec: &SweepSpec,
    cell: &Cell,
    cancel: &AtomicBool,
) -> Result<(SweepRow, TrajectoryRecord)> {
    let rec = run_cancellable(g, &spec.config(cell.delta, cell.seed), cancel)?;
    Ok((summarize(g, &rec, cell.delta, cell.trial, cell.seed), rec))
}

/// Runs all cells in parallel chunks, handing each finished chunk (in order) to
/// `on_chunk`. Records are kept only when `keep_records` is set.
pub fn sweep_chunked(
    g: &Graph,
    spec: &SweepSpec,
    chunk: usize,
    keep_records: bool,
    cancel: &AtomicBool,
    mut on_chunk: impl FnMut(&[SweepRow]),
) -> Result<(Vec<SweepRow>, Vec<TrajectoryRecord>)> {
    spec.validate()?;
    let all = cells(spec)?;
    let mut rows = Vec::with_capacity(all.len());
    let mut records = Vec::new();
    for part in all.chunks(chunk.max(1)) {
        if cancel.load(Ordering::Relaxed) {
            return Err(Error::Cancelled);
        }
        let done: Vec<(SweepRow, TrajectoryRecord)> = part
            .par_iter()
            .map(|c| run_cell(g, spec, c, cancel))
            .collect::<Result<_>>()?;
        let start = rows.len();
        for (row, rec) in done {
            rows.push(row);
            if keep_records {
                records.push(rec);
            }
        }
        on_chunk(&rows[start..]);
    }
    Ok((rows, records))
}

/// Runs the sweep described by `spec` on an already built graph.
pub fn sweep_graph(g: &Graph, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let never = AtomicBool::new(false);
    Ok(sweep_chunked(g, spec, usize::MAX, false, &never, |_| {})?.0)
}

/// Resolves the spec's graph and runs the sweep.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let g = spec.graph.parse()?.build()?.graph;
    sweep_graph(&g, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdLine {
    /// `1/|λ|`.
    pub value: f64,
    pub eigenvalue: f64,
    /// `"negative"` or `"positive"`, the sign of `λ`.
    pub sign: &'static str,
}

/// `1/|λ_i|` for every nonzero eigenvalue with the reciprocal in `(0, 1]`, ascending.
pub fn threshold_lines(g: &Graph) -> Vec<ThresholdLine> {
    let mut lines: Vec<ThresholdLine> = eigenvalues_sym(g)
        .eigenvalues
        .into_iter()
        .filter(|l| l.abs() > 1e-9)
        .map(|l| ThresholdLine {
            value: 1.0 / l.abs(),
            eigenvalue: l,
            sign: if l < 0.0 { "negative" } else { "positive" },
        })
        .filter(|t| t.value <= 1.0 + 1e-9)
        .collect();
    lines.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.eigenvalue.total_cmp(&b.eigenvalue)));
    lines
}

/// A named bundle of one or more sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub sweeps: Vec<SweepSpec>,
}

pub const PRESET_NAMES: &[&str] = &[
    "fig-cospectral",
    "fig-p2",
    "fig-p3",
    "fig-p4",
    "fig-p5",
    "fig-p6",
    "fig-p7",
    "fig-p8",
    "fig-p100",
    "fig-p100zoom",
    "fig-rr",
    "fig-er",
    "fig-ba",
    "fig-bipartite",
    "appendix-lastchange",
    "appendix-parity",
];

fn labelled(graph: &str, label: &str) -> SweepSpec {
    SweepSpec::new(graph, DeltaGrid::default(), 10).with_label(label)
}

/// Sweep bundles matching the published figure protocols: δ step 0.005 and 10
/// trials unless a figure states otherwise. Random-graph presets fix the graph
/// seed so every trial runs on the same sample.
pub fn preset(name: &str) -> Result<Preset> {
    let name = PRESET_NAMES
        .iter()
        .copied()
        .find(|&p| p == name)
        .ok_or_else(|| Error::Input(format!("unknown preset '{name}'")))?;
    let sweeps = match name {
        "fig-cospectral" => vec![labelled("cospectral:1", "star"), labelled("cospectral:2", "mate")],
        "fig-p100" => vec![labelled("path:100", "p100")],
        "fig-p100zoom" => vec![SweepSpec::new(
            "path:100",
            DeltaGrid::Range {
                start: 0.45,
                end: 0.62,
                step: 0.002,
            },
            20,
        )
        .with_label("p100zoom")],
        "fig-rr" => [5, 20, 40, 80]
            .iter()
            .map(|d| labelled(&format!("rr:100:{d}:1"), &format!("d{d}")))
            .collect(),
        "fig-er" => ["0.05", "0.2", "0.5", "0.8"]
            .iter()
            .map(|p| labelled(&format!("er:100:{p}:1"), &format!("p{p}")))
            .collect(),
        "fig-ba" => [1, 2, 5, 10]
            .iter()
            .map(|m| labelled(&format!("ba:100:{m}:1"), &format!("m{m}")))
            .collect(),
        "fig-bipartite" => [(4, 1), (60, 5), (20, 20)]
            .iter()
            .map(|(m, l)| labelled(&format!("kml:{m}:{l}"), &format!("k{m}_{l}")))
            .collect(),
        "appendix-lastchange" => [1, 2, 5]
            .iter()
            .map(|m| labelled(&format!("ba:100:{m}:1"), &format!("m{m}")).with_epsilon(1e-4))
            .collect(),
        "appendix-parity" => [100, 101, 300, 301]
            .iter()
            .map(|n| {
                SweepSpec::new(
                    format!("path:{n}").as_str(),
                    DeltaGrid::List(vec![0.499, 0.4999, 0.5, 0.502, 0.51, 0.52]),
                    1,
                )
                .with_epsilon(1e-5)
                .with_label(&format!("p{n}"))
            })
            .collect(),
        small => {
            let k = small.trim_start_matches("fig-p");
            vec![labelled(&format!("path:{k}"), &format!("p{k}"))]
        }
    };
    Ok(Preset { name, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let v = DeltaGrid::default().values().unwrap();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[37], 0.185);
        assert_eq!(*v.last().unwrap(), 1.0);
        let z = DeltaGrid::Range { start: 0.45, end: 0.62, step: 0.002 }.values().unwrap();
        assert_eq!(z.len(), 86);
        assert_eq!(z[1], 0.452);
        assert_eq!(*z.last().unwrap(), 0.62);
        assert!(DeltaGrid::Range { start: 0.5, end: 0.4, step: 0.1 }.values().is_err());
        assert!(DeltaGrid::Range { start: 0.0, end: 1.0, step: 0.0 }.values().is_err());
        assert!(DeltaGrid::List(vec![0.2, 1.2]).values().is_err());
    }

    #[test]
    fn p2_sweep_example() {
        let spec = SweepSpec::new("path:2", DeltaGrid::Range { start: 0.1, end: 0.9, step: 0.4 }, 2);
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.converged && r.terminal_stable));
        let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
        assert_eq!(deltas, vec![0.1, 0.1, 0.5, 0.5, 0.9, 0.9]);
        assert_eq!(sweep(&spec).unwrap(), rows);
    }

    #[test]
    fn row_seeds_follow_the_hash() {
        let spec = SweepSpec::new("path:3", DeltaGrid::List(vec![0.2, 0.4]), 3).with_seed(11);
        let rows = sweep(&spec).unwrap();
        for r in &rows {
            let i = if r.delta == 0.2 { 0 } else { 1 };
            assert_eq!(r.seed, trial_seed(11, i, u64::from(r.trial)));
        }
    }

    #[test]
    fn chunking_does_not_change_rows() {
        let spec = SweepSpec::new("cycle:6", DeltaGrid::List(vec![0.3, 0.6, 0.8]), 4);
        let g = Graph::cycle(6).unwrap();
        let whole = sweep_graph(&g, &spec).unwrap();
        let never = AtomicBool::new(false);
        let mut seen = Vec::new();
        let (chunked, _) =
            sweep_chunked(&g, &spec, 5, false, &never, |r| seen.extend_from_slice(r)).unwrap();
        assert_eq!(whole, chunked);
        assert_eq!(seen, whole);
    }

    #[test]
    fn zero_trials_rejected() {
        let spec = SweepSpec::new("path:2", DeltaGrid::default(), 0);
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = SweepSpec::new("path:2", DeltaGrid::List(vec![0.5]), 1);
        let csv = to_csv(&sweep(&spec).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(fields[0], "0.5");
        assert_eq!(fields[4], "true");
    }

    #[test]
    fn bundle_csv_layout() {
        let spec = SweepSpec::new("path:2", DeltaGrid::List(vec![0.5]), 2);
        let rows = sweep(&spec).unwrap();
        let single = bundle_csv(&[("a".into(), rows.clone())]);
        assert_eq!(single, to_csv(&rows));
        let double = bundle_csv(&[("a".into(), rows.clone()), ("b".into(), rows)]);
        let lines: Vec<&str> = double.lines().collect();
        assert_eq!(lines[0], format!("sweep,{CSV_HEADER}"));
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("b,0.5,0,"));
    }

    #[test]
    fn row_structure_fields() {
        let g = Graph::path(5).unwrap();
        let spec = SweepSpec::new("path:5", DeltaGrid::List(vec![0.7]), 5);
        for r in sweep_graph(&g, &spec).unwrap() {
            assert!(r.converged);
            assert_eq!(r.active_count, 3);
            assert_eq!(r.isolated_active, 3);
            assert_eq!(r.largest_component, 1);
            assert_eq!(r.active_edges, 0);
            assert!(r.terminal_stable);
        }
    }

    #[test]
    fn threshold_line_examples() {
        let lines = threshold_lines(&Graph::path(2).unwrap());
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| (l.value - 1.0).abs() < 1e-12));
        assert_eq!(lines[0].sign, "negative");
        let star = threshold_lines(&Graph::complete_bipartite(4, 1).unwrap());
        let first_negative = star.iter().find(|l| l.sign == "negative").unwrap();
        assert!((first_negative.value - 0.5).abs() < 1e-12);
        let p8 = threshold_lines(&Graph::path(8).unwrap());
        assert!(p8.iter().any(|l| (l.value - 0.532).abs() < 5e-4));
        assert!(threshold_lines(&Graph::path(1).unwrap()).is_empty());
    }

    #[test]
    fn presets() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(!p.sweeps.is_empty());
            for s in &p.sweeps {
                s.validate().unwrap();
                s.graph.parse().unwrap();
            }
        }
        let zoom = preset("fig-p100zoom").unwrap();
        assert_eq!(
            zoom.sweeps[0].delta_grid,
            DeltaGrid::Range { start: 0.45, end: 0.62, step: 0.002 }
        );
        assert_eq!(zoom.sweeps[0].trials, 20);
        assert_eq!(preset("fig-p2").unwrap().sweeps[0].graph, GraphRef::from("path:2"));
        assert_eq!(preset("fig-cospectral").unwrap().sweeps.len(), 2);
        assert!(preset("fig-p9").is_err());
    }
}
