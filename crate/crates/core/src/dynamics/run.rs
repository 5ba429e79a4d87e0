use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;

use super::record::{Recorder, RunMeta};
use super::{
    check_delta, default_epsilon_reshuffle, DynamicsConfig, Engine, RecordLevel, StrategyProfile,
    TrajectoryRecord,
};
use crate::error::{input, Error, Result};
use crate::graph::Graph;
use crate::rng::seeded;

/// Runs the random-order dynamics until `d(x) < ε` or `max_rounds · n` steps.
///
/// The initial profile and then the agent sequence are drawn from one ChaCha8
/// stream seeded with `cfg.seed`, so a run is a pure function of `(g, cfg)`.
pub fn run(g: &Graph, cfg: &DynamicsConfig) -> Result<TrajectoryRecord> {
    run_cancellable(g, cfg, &AtomicBool::new(false))
}

/// [`run`] that polls `cancel` once per round.
pub fn run_cancellable(
    g: &Graph,
    cfg: &DynamicsConfig,
    cancel: &AtomicBool,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let n = g.n();
    let mut rng = seeded(cfg.seed);
    let initial = cfg.initial.realize(n, &mut rng)?;
    let mut engine = Engine::new(g, cfg.delta, initial.as_slice().to_vec());
    let initial_residual = engine.residual();
    let mut recorder = Recorder::new(n, cfg.record, cfg.epsilon_reshuffle(), initial_residual);

    let max_steps = cfg.max_rounds.saturating_mul(n as u64);
    let mut t = 0u64;
    let mut residual = initial_residual;
    while residual >= cfg.epsilon && t < max_steps {
        if t.is_multiple_of(n as u64) && cancel.load(Ordering::Relaxed) {
            return Err(Error::Cancelled);
        }
        let agent = rng.random_range(0..n);
        t += 1;
        let report = engine.step(agent);
        residual = engine.residual();
        recorder.observe(t, &report, residual);
    }
    Ok(recorder.finish(RunMeta {
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        initial,
        initial_residual,
        step_count: t,
        converged: residual < cfg.epsilon,
        terminal: StrategyProfile::new(engine.profile().to_vec())?,
        final_residual: residual,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon_reshuffle: f64,
    pub record: RecordLevel,
}

impl ReplayConfig {
    pub fn new(delta: f64, epsilon: f64) -> Self {
        ReplayConfig {
            delta,
            epsilon,
            epsilon_reshuffle: default_epsilon_reshuffle(epsilon),
            record: RecordLevel::Full,
        }
    }
}

/// Replays a fixed update order from `x0`; stops at the end of `schedule` or at `d(x) < ε`.
pub fn replay_schedule(
    g: &Graph,
    delta: f64,
    x0: &StrategyProfile,
    schedule: &[usize],
    epsilon: f64,
) -> Result<TrajectoryRecord> {
    replay_schedule_with(g, &ReplayConfig::new(delta, epsilon), x0, schedule)
}

pub fn replay_schedule_with(
    g: &Graph,
    cfg: &ReplayConfig,
    x0: &StrategyProfile,
    schedule: &[usize],
) -> Result<TrajectoryRecord> {
    check_delta(cfg.delta)?;
    let n = g.n();
    if schedule.is_empty() {
        return input("replay schedule is empty");
    }
    if let Some(&v) = schedule.iter().find(|&&v| v >= n) {
        return input(format!("schedule vertex {v} out of range for n={n}"));
    }
    if x0.len() != n {
        return input(format!("initial profile has {} entries, graph has {n}", x0.len()));
    }
    let mut engine = Engine::new(g, cfg.delta, x0.as_slice().to_vec());
    let initial_residual = engine.residual();
    let mut recorder = Recorder::new(n, cfg.record, cfg.epsilon_reshuffle, initial_residual);
    let mut residual = initial_residual;
    let mut t = 0u64;
    for &agent in schedule {
        if residual < cfg.epsilon {
            break;
        }
        t += 1;
        let report = engine.step(agent);
        residual = engine.residual();
        recorder.observe(t, &report, residual);
    }
    Ok(recorder.finish(RunMeta {
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        initial: x0.clone(),
        initial_residual,
        step_count: t,
        converged: residual < cfg.epsilon,
        terminal: StrategyProfile::new(engine.profile().to_vec())?,
        final_residual: residual,
    }))
}
