use std::collections::HashMap;
use std::sync::atomic::AtomicBool;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use brnet_core::constructions::ScenarioBundle;
use brnet_core::dynamics::{
    run_cancellable, replay_schedule_with, DynamicsConfig, InitialProfile, RecordLevel,
    ReplayConfig, StrategyProfile, TrajectoryJson, TrajectoryRecord, DEFAULT_EPSILON,
    DEFAULT_MAX_ROUNDS,
};
use brnet_core::equilibria::{
    enumerate_path_configurations, enumerate_stable_active_sets, solve_on_active_set,
    uniqueness_regime, ActiveSetReport, Regime, DEFAULT_BRUTE_FORCE_CAP, PATH_ENUMERATION_CAP,
};
use brnet_core::graph::GraphJson;
use brnet_core::spec::{GraphRef, GraphSpec, ResolvedGraph};
use brnet_core::spectral::{eigenvalues_sym, Threshold};
use brnet_core::sweep::{
    bundle_csv, preset, sweep_chunked, sweep_label, threshold_lines, Preset, SweepSpec,
    ThresholdLine, PRESET_NAMES,
};
use brnet_core::{Error, Graph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::jobs::{JobHandle, JobKind, JobStatus, Outcome, SweepTable};
use crate::trace::{agent_traces, TRACE_POINT_CAP};
use crate::AppState;

/// Most equilibrium reports returned by one structural query.
const REPORT_CAP: usize = 1000;
/// Rows handed to the job table per progress update.
const SWEEP_CHUNK: usize = 64;

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

/// Parses (400), checks the vertex cap before building (413), then builds (422).
fn resolve(state: &AppState, graph: &GraphRef) -> ApiResult<(GraphSpec, ResolvedGraph)> {
    let spec = graph.parse()?;
    let n = spec.vertex_count();
    let cap = state.config.n_cap;
    if n > cap {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("graph has {n} vertices, the cap is {cap}"),
        ));
    }
    let resolved = spec.build()?;
    Ok((spec, resolved))
}

fn query_delta(q: &HashMap<String, String>) -> ApiResult<f64> {
    let raw = q
        .get("delta")
        .ok_or_else(|| ApiError::bad_request("missing query parameter 'delta'"))?;
    let delta: f64 = raw
        .parse()
        .map_err(|_| ApiError::bad_request(format!("cannot parse delta from '{raw}'")))?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(ApiError::bad_request(format!("delta must lie in [0,1], got {delta}")));
    }
    Ok(delta)
}

fn query_spec(q: &HashMap<String, String>) -> ApiResult<GraphRef> {
    q.get("spec")
        .map(|s| GraphRef::Spec(s.clone()))
        .ok_or_else(|| ApiError::bad_request("missing query parameter 'spec'"))
}

pub async fn presets() -> Json<Vec<Preset>> {
    Json(PRESET_NAMES.iter().filter_map(|p| preset(p).ok()).collect())
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    graph: GraphRef,
    /// Falls back to the scenario's suggested δ when the graph names one.
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    epsilon_reshuffle: Option<f64>,
    #[serde(default = "default_max_rounds")]
    max_rounds: u64,
    #[serde(default)]
    seed: u64,
    /// Falls back to the scenario's start, then to uniform random.
    #[serde(default)]
    initial: Option<InitialProfile>,
    #[serde(default)]
    record: RecordLevel,
    /// Replay the scenario's fixed schedule instead of random order.
    #[serde(default)]
    replay: bool,
    /// Always run as a job.
    #[serde(default, rename = "async")]
    run_async: bool,
}

enum Plan {
    Random(DynamicsConfig),
    Replay {
        cfg: ReplayConfig,
        x0: StrategyProfile,
        schedule: Vec<usize>,
    },
}

#[derive(Serialize)]
struct SimulationPayload {
    #[serde(flatten)]
    trajectory: TrajectoryJson,
    n: usize,
    delta: f64,
    epsilon: f64,
    epsilon_reshuffle: f64,
    seed: u64,
    step_count: u64,
    final_residual: f64,
    initial: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Vec<Vec<(u64, f64)>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<String>,
}

fn payload(rec: &TrajectoryRecord, seed: u64, scenario: Option<String>) -> Value {
    let p = SimulationPayload {
        trajectory: rec.to_wire(),
        n: rec.n,
        delta: rec.delta,
        epsilon: rec.epsilon,
        epsilon_reshuffle: rec.epsilon_reshuffle,
        seed,
        step_count: rec.step_count,
        final_residual: rec.final_residual,
        initial: rec.initial.as_slice().to_vec(),
        traces: agent_traces(rec, TRACE_POINT_CAP),
        scenario,
    };
    serde_json::to_value(p).expect("simulation payload serializes")
}

fn plan(req: SimulateRequest, scenario: Option<&ScenarioBundle>) -> ApiResult<Plan> {
    let delta = req
        .delta
        .or(scenario.map(|s| s.delta_hint))
        .ok_or_else(|| ApiError::bad_request("missing field 'delta'"))?;
    let initial = req
        .initial
        .or_else(|| scenario.map(|s| InitialProfile::Explicit(s.initial.clone())))
        .unwrap_or(InitialProfile::UniformRandom);
    let cfg = DynamicsConfig {
        delta,
        epsilon: req.epsilon,
        epsilon_reshuffle: req.epsilon_reshuffle,
        max_rounds: req.max_rounds,
        seed: req.seed,
        initial,
        record: req.record,
    };
    cfg.validate()?;
    if !req.replay {
        return Ok(Plan::Random(cfg));
    }
    let schedule = scenario
        .and_then(|s| s.schedule.clone())
        .ok_or_else(|| ApiError::bad_request("replay needs a scenario with a fixed schedule"))?;
    let x0 = match &cfg.initial {
        InitialProfile::Explicit(p) => p.clone(),
        _ => return Err(ApiError::bad_request("replay needs an explicit initial profile")),
    };
    Ok(Plan::Replay {
        cfg: ReplayConfig {
            delta,
            epsilon: cfg.epsilon,
            epsilon_reshuffle: cfg.epsilon_reshuffle(),
            record: cfg.record,
        },
        x0,
        schedule,
    })
}

fn execute(g: &Graph, plan: &Plan, seed: u64, scenario: Option<String>, cancel: &AtomicBool) -> brnet_core::Result<Value> {
    let rec = match plan {
        Plan::Random(cfg) => run_cancellable(g, cfg, cancel)?,
        Plan::Replay { cfg, x0, schedule } => replay_schedule_with(g, cfg, x0, schedule)?,
    };
    Ok(payload(&rec, seed, scenario))
}

pub async fn simulate(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: SimulateRequest = parse_body(&body)?;
    let (_, resolved) = resolve(&state, &req.graph)?;
    let seed = req.seed;
    let force_async = req.run_async;
    let work = (resolved.graph.n() as u64).saturating_mul(req.max_rounds);
    let scenario_name = resolved.scenario.as_ref().map(|s| s.name.clone());
    let plan = plan(req, resolved.scenario.as_ref())?;
    let g = resolved.graph;

    if !force_async && work <= state.config.sync_step_limit {
        let never = AtomicBool::new(false);
        let value = state
            .compute(move || execute(&g, &plan, seed, scenario_name, &never))
            .await?;
        return Ok(Json(value).into_response());
    }

    let (handle, cancel) = state.jobs.create(JobKind::Simulate, Vec::new(), 1);
    let jobs = state.jobs.clone();
    let id = handle.id.clone();
    state.spawn(move || {
        jobs.start(&id);
        match execute(&g, &plan, seed, scenario_name, &cancel) {
            Ok(v) => jobs.finish(&id, Outcome::Simulation(v)),
            Err(e) => jobs.fail(&id, failure_reason(e)),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(handle)).into_response())
}

fn failure_reason(e: Error) -> String {
    match e {
        Error::Cancelled => "cancelled".to_string(),
        other => other.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SweepRequest {
    Preset {
        preset: String,
        #[serde(default)]
        base_seed: Option<u64>,
        #[serde(default)]
        trials: Option<u32>,
    },
    Spec(SweepSpec),
}

pub async fn sweep(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: SweepRequest = parse_body(&body)?;
    let specs = match req {
        SweepRequest::Spec(spec) => vec![spec],
        SweepRequest::Preset {
            preset: name,
            base_seed,
            trials,
        } => preset(&name)?
            .sweeps
            .into_iter()
            .map(|mut s| {
                s.base_seed = base_seed.unwrap_or(s.base_seed);
                s.trials = trials.unwrap_or(s.trials);
                s
            })
            .collect(),
    };
    let mut work = Vec::with_capacity(specs.len());
    let mut tables = Vec::with_capacity(specs.len());
    let mut total: u64 = 0;
    for (i, spec) in specs.into_iter().enumerate() {
        spec.validate()?;
        let (_, resolved) = resolve(&state, &spec.graph)?;
        total = total.saturating_add(spec.cell_count()?);
        tables.push(SweepTable {
            label: sweep_label(&spec, i),
            graph: spec.graph.to_string(),
            rows: Vec::new(),
        });
        work.push((spec, resolved.graph));
    }
    let budget = state.config.sweep_budget;
    if total > budget {
        return Err(ApiError::new(
            StatusCode::TOO_MANY_REQUESTS,
            format!("sweep needs {total} runs, the budget is {budget}"),
        ));
    }

    let (handle, cancel) = state.jobs.create(JobKind::Sweep, tables, total);
    let jobs = state.jobs.clone();
    let id = handle.id.clone();
    state.spawn(move || {
        jobs.start(&id);
        for (i, (spec, g)) in work.iter().enumerate() {
            let done = sweep_chunked(g, spec, SWEEP_CHUNK, false, &cancel, |rows| {
                jobs.append_rows(&id, i, rows)
            });
            if let Err(e) = done {
                jobs.fail(&id, failure_reason(e));
                return;
            }
        }
        jobs.finish(&id, Outcome::Sweep);
    });
    Ok((StatusCode::ACCEPTED, Json(handle)).into_response())
}

#[derive(Serialize)]
pub struct JobView {
    #[serde(flatten)]
    handle: JobHandle,
    total_cells: u64,
    done_cells: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial: Option<Vec<SweepTable>>,
}

pub async fn job_status(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JobView>> {
    let with_rows = q.get("rows").map(|v| v != "false").unwrap_or(true);
    state
        .jobs
        .with(&id, |job| JobView {
            handle: job.handle.clone(),
            total_cells: job.total_cells,
            done_cells: job.done_cells,
            partial: (with_rows && job.handle.kind == JobKind::Sweep).then(|| job.tables.clone()),
        })
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))
}

enum Ready {
    Simulation(Value),
    Sweep(Vec<SweepTable>),
}

pub async fn job_result(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let ready = state
        .jobs
        .with(&id, |job| match (job.handle.status, &job.outcome) {
            (JobStatus::Done, Some(Outcome::Simulation(v))) => Ok(Ready::Simulation(v.clone())),
            (JobStatus::Done, Some(Outcome::Sweep)) => Ok(Ready::Sweep(job.tables.clone())),
            (JobStatus::Failed, _) => Err(ApiError::conflict(format!(
                "job failed: {}",
                job.handle.reason.as_deref().unwrap_or("unknown")
            ))),
            (status, _) => Err(ApiError::conflict(format!(
                "job is {}",
                serde_json::to_value(status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
            ))),
        })
        .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))??;
    let format = q.get("format").map(String::as_str);
    match (ready, format) {
        (Ready::Simulation(v), None | Some("json")) => Ok(Json(v).into_response()),
        (Ready::Sweep(tables), None | Some("csv")) => {
            let pairs: Vec<_> = tables.into_iter().map(|t| (t.label, t.rows)).collect();
            Ok(([(header::CONTENT_TYPE, "text/csv")], bundle_csv(&pairs)).into_response())
        }
        (Ready::Sweep(tables), Some("json")) => Ok(Json(json!({ "tables": tables })).into_response()),
        (_, Some(f)) => Err(ApiError::bad_request(format!("unsupported format '{f}' for this job"))),
    }
}

pub async fn job_cancel(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<JobHandle>> {
    state
        .jobs
        .cancel(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))
}

#[derive(Serialize)]
pub struct GraphView {
    spec: String,
    n: usize,
    edge_count: usize,
    graph: GraphJson,
    degrees: Vec<usize>,
    spectrum: Vec<f64>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    threshold: Option<Threshold>,
    threshold_lines: Vec<ThresholdLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<ScenarioBundle>,
}

pub async fn graph(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<GraphView>> {
    let spec = query_spec(&q)?;
    let (_, resolved) = resolve(&state, &spec)?;
    let view = state
        .compute(move || {
            let g = resolved.graph;
            let spectrum = eigenvalues_sym(&g).eigenvalues;
            let lambda_min = spectrum.first().copied();
            GraphView {
                spec: spec.to_string(),
                n: g.n(),
                edge_count: g.edge_count(),
                graph: g.to_json(),
                degrees: g.degree_sequence(),
                lambda_max: spectrum.last().copied(),
                threshold: lambda_min.map(Threshold::from_lambda_min),
                lambda_min,
                threshold_lines: threshold_lines(&g),
                spectrum,
                scenario: resolved.scenario,
            }
        })
        .await;
    Ok(Json(view))
}

#[derive(Serialize)]
pub struct EquilibriaView {
    spec: String,
    delta: f64,
    n: usize,
    /// `"brute-force"` or `"structural"`.
    method: &'static str,
    regime: Regime,
    count: usize,
    truncated: bool,
    reports: Vec<ActiveSetReport>,
}

fn structural_reports(spec: &GraphSpec, g: &Graph, delta: f64) -> brnet_core::Result<Vec<ActiveSetReport>> {
    match *spec {
        GraphSpec::Path(n) if n <= PATH_ENUMERATION_CAP => enumerate_path_configurations(n, delta)?
            .active_sets()
            .iter()
            .map(|s| solve_on_active_set(g, delta, s))
            .collect(),
        _ => Ok(Vec::new()),
    }
}

pub async fn equilibria(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<EquilibriaView>> {
    let spec_ref = query_spec(&q)?;
    let delta = query_delta(&q)?;
    let (spec, resolved) = resolve(&state, &spec_ref)?;
    let view = state
        .compute(move || -> brnet_core::Result<EquilibriaView> {
            let g = resolved.graph;
            let brute = g.n() <= DEFAULT_BRUTE_FORCE_CAP;
            let mut reports = if brute {
                enumerate_stable_active_sets(&g, delta, DEFAULT_BRUTE_FORCE_CAP)?
            } else {
                structural_reports(&spec, &g, delta)?
            };
            let count = reports.len();
            reports.truncate(REPORT_CAP);
            Ok(EquilibriaView {
                spec: spec_ref.to_string(),
                delta,
                n: g.n(),
                method: if brute { "brute-force" } else { "structural" },
                regime: uniqueness_regime(&g, delta),
                count,
                truncated: count > REPORT_CAP,
                reports,
            })
        })
        .await?;
    Ok(Json(view))
}
