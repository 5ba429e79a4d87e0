//! Random-order best-response dynamics for the game with payoff
//! `U_i = x_i - x_i^2/2 - δ Σ_j g_ij x_i x_j`, whose best response is
//! `max(0, 1 - δ Σ_j g_ij x_j)`.

mod engine;
mod record;
mod run;

pub use engine::{Transition, Engine, StepReport};
pub use record::{
    classify_events, ActiveChange, EventSummary, Reshuffle, StepRecord, TrajectoryJson,
    TrajectoryRecord, RESIDUAL_HISTORY_CAP,
};
pub use run::{replay_schedule, replay_schedule_with, run, run_cancellable, ReplayConfig};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::{Graph, VertexSet};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MAX_ROUNDS: u64 = 100_000;
/// Lower bound of the default quasi-convergence tolerance used for reshuffle detection.
pub const RESHUFFLE_TOLERANCE_FLOOR: f64 = 1e-3;

pub fn default_epsilon_reshuffle(epsilon: f64) -> f64 {
    epsilon.max(RESHUFFLE_TOLERANCE_FLOOR)
}

/// Activity vector with every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StrategyProfile(Vec<f64>);

impl StrategyProfile {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return input(format!("activity x[{i}] = {v} not in [0,1]"));
        }
        Ok(StrategyProfile(x))
    }

    pub fn zeros(n: usize) -> Self {
        StrategyProfile(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Agents with strictly positive activity.
    pub fn active_set(&self) -> VertexSet {
        VertexSet::from_sorted((0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect())
    }
}

impl TryFrom<Vec<f64>> for StrategyProfile {
    type Error = crate::Error;
    fn try_from(x: Vec<f64>) -> Result<Self> {
        StrategyProfile::new(x)
    }
}

impl From<StrategyProfile> for Vec<f64> {
    fn from(p: StrategyProfile) -> Vec<f64> {
        p.0
    }
}

impl std::ops::Index<usize> for StrategyProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialProfile {
    /// i.i.d. uniform on `[0,1]`, drawn from the run seed.
    UniformRandom,
    AllZero,
    AllOne,
    Explicit(StrategyProfile),
}

impl InitialProfile {
    pub(crate) fn realize(&self, n: usize, rng: &mut crate::rng::Rng) -> Result<StrategyProfile> {
        use rand::Rng;
        Ok(match self {
            InitialProfile::UniformRandom => {
                StrategyProfile((0..n).map(|_| rng.random::<f64>()).collect())
            }
            InitialProfile::AllZero => StrategyProfile::zeros(n),
            InitialProfile::AllOne => StrategyProfile(vec![1.0; n]),
            InitialProfile::Explicit(p) => {
                if p.len() != n {
                    return input(format!("initial profile has {} entries, graph has {n}", p.len()));
                }
                p.clone()
            }
        })
    }
}

/// How much of a trajectory to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordLevel {
    /// Outcome, reshuffles and the downsampled residual history.
    Summary,
    /// Adds every active-set change.
    #[default]
    Events,
    /// Adds every step with its post-step residual.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub delta: f64,
    pub epsilon: f64,
    /// Defaults to [`default_epsilon_reshuffle`] of `epsilon` when unset.
    pub epsilon_reshuffle: Option<f64>,
    pub max_rounds: u64,
    pub seed: u64,
    pub initial: InitialProfile,
    pub record: RecordLevel,
}

impl DynamicsConfig {
    pub fn new(delta: f64) -> Self {
        DynamicsConfig {
            delta,
            epsilon: DEFAULT_EPSILON,
            epsilon_reshuffle: None,
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed: 0,
            initial: InitialProfile::UniformRandom,
            record: RecordLevel::Events,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_epsilon_reshuffle(mut self, epsilon_reshuffle: f64) -> Self {
        self.epsilon_reshuffle = Some(epsilon_reshuffle);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: u64) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn with_initial(mut self, initial: InitialProfile) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_record(mut self, record: RecordLevel) -> Self {
        self.record = record;
        self
    }

    pub fn epsilon_reshuffle(&self) -> f64 {
        self.epsilon_reshuffle
            .unwrap_or_else(|| default_epsilon_reshuffle(self.epsilon))
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if !(self.epsilon > 0.0) {
            return input(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.epsilon_reshuffle() < self.epsilon {
            return input("epsilon_reshuffle must be at least epsilon");
        }
        if self.max_rounds == 0 {
            return input("max_rounds must be at least 1");
        }
        Ok(())
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return input(format!("delta = {delta} not in [0,1]"));
    }
    Ok(())
}

/// Clamped linear response to a neighbour activity sum; exactly `0.0` when the clamp binds.
#[inline]
pub(crate) fn respond(delta: f64, neighbor_sum: f64) -> f64 {
    let v = 1.0 - delta * neighbor_sum;
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

pub(crate) fn neighbor_sum(g: &Graph, x: &[f64], i: usize) -> f64 {
    g.neighbors(i).iter().map(|&j| x[j]).sum()
}

/// `max(0, 1 - δ Σ_j g_ij x_j)`.
pub fn best_response(g: &Graph, delta: f64, x: &[f64], i: usize) -> f64 {
    respond(delta, neighbor_sum(g, x, i))
}

pub fn payoff(g: &Graph, delta: f64, x: &[f64], i: usize) -> f64 {
    let xi = x[i];
    xi - xi * xi / 2.0 - delta * xi * neighbor_sum(g, x, i)
}

/// `d(x) = ‖x − max(0, 1 − δGx)‖_∞`.
pub fn residual_d(g: &Graph, delta: f64, x: &[f64]) -> f64 {
    (0..g.n())
        .map(|i| (x[i] - best_response(g, delta, x, i)).abs())
        .fold(0.0, f64::max)
}

/// `V(x) = xᵀ1 − ½ xᵀ(I + δG)x`.
pub fn potential(g: &Graph, delta: f64, x: &[f64]) -> f64 {
    let linear: f64 = x.iter().sum();
    let square: f64 = x.iter().map(|v| v * v).sum();
    let cross: f64 = g.edges().iter().map(|&(i, j)| x[i] * x[j]).sum();
    linear - 0.5 * square - delta * cross
}

/// `V(y) − V(x)` evaluated as `(y − x)ᵀ(1 − ½(I + δG)(x + y))`, which avoids
/// cancellation between two large potentials when `y − x` is sparse.
pub fn potential_delta(g: &Graph, delta: f64, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..g.n() {
        let diff = y[i] - x[i];
        if diff == 0.0 {
            continue;
        }
        let nb: f64 = g.neighbors(i).iter().map(|&j| x[j] + y[j]).sum();
        total += diff * (1.0 - 0.5 * (x[i] + y[i] + delta * nb));
    }
    total
}

/// `fᵀ(I + δG_S)f` over the coordinates in `s`; entries of `f` outside `s` are ignored.
pub fn weighted_error_norm_sq(g: &Graph, delta: f64, s: &VertexSet, f: &[f64]) -> f64 {
    let inside = s.indicator(g.n());
    let mut total = 0.0;
    for &i in s.members() {
        let cross: f64 = g
            .neighbors(i)
            .iter()
            .filter(|&&j| inside[j])
            .map(|&j| f[j])
            .sum();
        total += f[i] * f[i] + delta * f[i] * cross;
    }
    total
}

/// Agent `i` switches to its best response; returns the new profile and a change report.
pub fn step(g: &Graph, delta: f64, x: &StrategyProfile, i: usize) -> (StrategyProfile, StepReport) {
    let old = x[i];
    let new = best_response(g, delta, x.as_slice(), i);
    let mut next = x.clone();
    next.0[i] = new;
    (next, StepReport::new(i, old, new))
}
