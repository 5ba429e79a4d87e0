use serde::{Deserialize, Serialize};

use super::engine::{StepReport, Transition};
use super::{RecordLevel, StrategyProfile};
use crate::error::{input, Result};

/// Maximum number of `(t, d)` points kept in a residual history.
pub const RESIDUAL_HISTORY_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub agent: usize,
    pub value: f64,
    /// `d(x)` right after this step.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveChange {
    pub t: u64,
    pub agent: usize,
    pub transition: Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reshuffle {
    pub t: u64,
    pub agent: usize,
}

/// Everything observed along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon_reshuffle: f64,
    pub record: RecordLevel,
    pub initial: StrategyProfile,
    pub initial_residual: f64,
    /// Every step, only at [`RecordLevel::Full`].
    pub steps: Vec<StepRecord>,
    pub step_count: u64,
    /// `step_count / n`.
    pub rounds: f64,
    pub converged: bool,
    pub terminal: StrategyProfile,
    pub final_residual: f64,
    /// Every activation/deactivation; empty at [`RecordLevel::Summary`].
    pub active_set_changes: Vec<ActiveChange>,
    pub active_change_count: u64,
    pub last_change_round: f64,
    pub reshuffles: Vec<Reshuffle>,
    pub residual_history: Vec<(u64, f64)>,
}

impl TrajectoryRecord {
    pub fn to_wire(&self) -> TrajectoryJson {
        TrajectoryJson {
            converged: self.converged,
            rounds: self.rounds,
            last_change_round: self.last_change_round,
            reshuffles: self.reshuffles.iter().map(|r| (r.t, r.agent)).collect(),
            active_changes: self
                .active_set_changes
                .iter()
                .map(|c| (c.t, c.agent, c.transition.symbol().to_string()))
                .collect(),
            terminal: self.terminal.as_slice().to_vec(),
            residuals: self.residual_history.clone(),
        }
    }

    /// Profile after each step, starting with the initial one; needs a full record.
    pub fn profiles(&self) -> Result<impl Iterator<Item = Vec<f64>> + '_> {
        if self.record != RecordLevel::Full {
            return input("per-step profiles need a full trajectory record");
        }
        let mut x = self.initial.as_slice().to_vec();
        let first = std::iter::once(x.clone());
        let rest = self.steps.iter().map(move |s| {
            x[s.agent] = s.value;
            x.clone()
        });
        Ok(first.chain(rest))
    }
}

/// JSON wire form of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub converged: bool,
    pub rounds: f64,
    pub last_change_round: f64,
    pub reshuffles: Vec<(u64, usize)>,
    pub active_changes: Vec<(u64, usize, String)>,
    pub terminal: Vec<f64>,
    pub residuals: Vec<(u64, f64)>,
}

/// Reshuffle bookkeeping: an activation counts as a reshuffle when the residual
/// dropped below the quasi-convergence tolerance at some earlier step since the
/// most recent active-set change.
#[derive(Debug, Clone)]
struct ReshuffleDetector {
    tolerance: f64,
    quasi_converged: bool,
}

impl ReshuffleDetector {
    fn new(tolerance: f64, initial_residual: f64) -> Self {
        ReshuffleDetector {
            tolerance,
            quasi_converged: initial_residual < tolerance,
        }
    }

    /// Returns whether this step is a reshuffle.
    fn observe(&mut self, transition: Option<Transition>, residual: f64) -> bool {
        let reshuffle = transition == Some(Transition::Activated) && self.quasi_converged;
        if transition.is_some() {
            self.quasi_converged = residual < self.tolerance;
        } else if residual < self.tolerance {
            self.quasi_converged = true;
        }
        reshuffle
    }
}

/// Keeps at most [`RESIDUAL_HISTORY_CAP`] evenly strided points, doubling the stride on overflow.
#[derive(Debug, Clone)]
struct Downsampler {
    stride: u64,
    points: Vec<(u64, f64)>,
}

impl Downsampler {
    fn new() -> Self {
        Downsampler {
            stride: 1,
            points: Vec::new(),
        }
    }

    fn push(&mut self, t: u64, d: f64) {
        if !t.is_multiple_of(self.stride) {
            return;
        }
        self.points.push((t, d));
        if self.points.len() > RESIDUAL_HISTORY_CAP {
            self.decimate();
        }
    }

    fn decimate(&mut self) {
        self.stride *= 2;
        let stride = self.stride;
        self.points.retain(|(t, _)| t % stride == 0);
    }

    fn finish(mut self, t: u64, d: f64) -> Vec<(u64, f64)> {
        if self.points.last().map(|p| p.0) != Some(t) {
            if self.points.len() >= RESIDUAL_HISTORY_CAP {
                self.decimate();
            }
            self.points.push((t, d));
        }
        self.points
    }
}

/// Accumulates a [`TrajectoryRecord`] step by step.
pub(crate) struct Recorder {
    n: usize,
    level: RecordLevel,
    steps: Vec<StepRecord>,
    changes: Vec<ActiveChange>,
    change_count: u64,
    last_change_t: u64,
    reshuffles: Vec<Reshuffle>,
    detector: ReshuffleDetector,
    history: Downsampler,
}

impl Recorder {
    pub(crate) fn new(
        n: usize,
        level: RecordLevel,
        epsilon_reshuffle: f64,
        initial_residual: f64,
    ) -> Self {
        let mut history = Downsampler::new();
        history.push(0, initial_residual);
        Recorder {
            n,
            level,
            steps: Vec::new(),
            changes: Vec::new(),
            change_count: 0,
            last_change_t: 0,
            reshuffles: Vec::new(),
            detector: ReshuffleDetector::new(epsilon_reshuffle, initial_residual),
            history,
        }
    }

    pub(crate) fn observe(&mut self, t: u64, report: &StepReport, residual: f64) {
        if self.level == RecordLevel::Full {
            self.steps.push(StepRecord {
                t,
                agent: report.agent,
                value: report.new,
                residual,
            });
        }
        if let Some(transition) = report.transition {
            self.change_count += 1;
            self.last_change_t = t;
            if self.level != RecordLevel::Summary {
                self.changes.push(ActiveChange {
                    t,
                    agent: report.agent,
                    transition,
                });
            }
        }
        if self.detector.observe(report.transition, residual) {
            self.reshuffles.push(Reshuffle {
                t,
                agent: report.agent,
            });
        }
        self.history.push(t, residual);
    }

    pub(crate) fn finish(self, meta: RunMeta) -> TrajectoryRecord {
        let n = self.n as f64;
        TrajectoryRecord {
            n: self.n,
            delta: meta.delta,
            epsilon: meta.epsilon,
            epsilon_reshuffle: self.detector.tolerance,
            record: self.level,
            initial: meta.initial,
            initial_residual: meta.initial_residual,
            steps: self.steps,
            step_count: meta.step_count,
            rounds: meta.step_count as f64 / n,
            converged: meta.converged,
            terminal: meta.terminal,
            final_residual: meta.final_residual,
            active_set_changes: self.changes,
            active_change_count: self.change_count,
            last_change_round: self.last_change_t as f64 / n,
            reshuffles: self.reshuffles,
            residual_history: self.history.finish(meta.step_count, meta.final_residual),
        }
    }
}

pub(crate) struct RunMeta {
    pub delta: f64,
    pub epsilon: f64,
    pub initial: StrategyProfile,
    pub initial_residual: f64,
    pub step_count: u64,
    pub converged: bool,
    pub terminal: StrategyProfile,
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSummary {
    pub last_change_round: f64,
    pub reshuffles: Vec<Reshuffle>,
    pub active_set_changes: Vec<ActiveChange>,
}

/// Recomputes the active-set changes, the final-change round and the reshuffles
/// of a full record from its raw steps, using `epsilon_reshuffle` as the
/// quasi-convergence tolerance.
pub fn classify_events(rec: &TrajectoryRecord, epsilon_reshuffle: f64) -> Result<EventSummary> {
    if rec.record != RecordLevel::Full {
        return input("event classification needs a full trajectory record");
    }
    let mut active: Vec<bool> = rec.initial.as_slice().iter().map(|&v| v > 0.0).collect();
    let mut detector = ReshuffleDetector::new(epsilon_reshuffle, rec.initial_residual);
    let mut changes = Vec::new();
    let mut reshuffles = Vec::new();
    for s in &rec.steps {
        let now = s.value > 0.0;
        let transition = match (active[s.agent], now) {
            (false, true) => Some(Transition::Activated),
            (true, false) => Some(Transition::Deactivated),
            _ => None,
        };
        active[s.agent] = now;
        if let Some(transition) = transition {
            changes.push(ActiveChange {
                t: s.t,
                agent: s.agent,
                transition,
            });
        }
        if detector.observe(transition, s.residual) {
            reshuffles.push(Reshuffle {
                t: s.t,
                agent: s.agent,
            });
        }
    }
    let last = changes.last().map_or(0, |c| c.t);
    Ok(EventSummary {
        last_change_round: last as f64 / rec.n as f64,
        reshuffles,
        active_set_changes: changes,
    })
}
