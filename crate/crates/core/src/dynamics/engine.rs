use serde::{Deserialize, Serialize};

use super::{neighbor_sum, respond};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    Activated,
    Deactivated,
}

impl Transition {
    pub fn symbol(self) -> &'static str {
        match self {
            Transition::Activated => "+",
            Transition::Deactivated => "-",
        }
    }
}

/// Outcome of one best-response update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub agent: usize,
    pub old: f64,
    pub new: f64,
    pub transition: Option<Transition>,
}

impl StepReport {
    pub(crate) fn new(agent: usize, old: f64, new: f64) -> Self {
        let transition = match (old > 0.0, new > 0.0) {
            (false, true) => Some(Transition::Activated),
            (true, false) => Some(Transition::Deactivated),
            _ => None,
        };
        StepReport {
            agent,
            old,
            new,
            transition,
        }
    }

    pub fn changed(&self) -> bool {
        self.old != self.new
    }
}

/// Mutable dynamics state with incrementally maintained neighbour sums and
/// per-agent residuals, so one update costs O(deg · log n).
pub struct Engine<'g> {
    graph: &'g Graph,
    delta: f64,
    x: Vec<f64>,
    sums: Vec<f64>,
    residuals: MaxTree,
    updates_since_refresh: usize,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Graph, delta: f64, x0: Vec<f64>) -> Self {
        assert_eq!(x0.len(), graph.n(), "profile length must match the graph");
        let n = graph.n();
        let mut engine = Engine {
            graph,
            delta,
            x: x0,
            sums: vec![0.0; n],
            residuals: MaxTree::new(n),
            updates_since_refresh: 0,
        };
        engine.refresh();
        engine
    }

    /// Recomputes neighbour sums and residuals from scratch.
    pub fn refresh(&mut self) {
        for i in 0..self.graph.n() {
            self.sums[i] = neighbor_sum(self.graph, &self.x, i);
        }
        for i in 0..self.graph.n() {
            let r = self.local_residual(i);
            self.residuals.set(i, r);
        }
        self.updates_since_refresh = 0;
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn profile(&self) -> &[f64] {
        &self.x
    }

    /// Current `d(x)`.
    pub fn residual(&self) -> f64 {
        self.residuals.max()
    }

    pub fn best_response(&self, i: usize) -> f64 {
        respond(self.delta, self.sums[i])
    }

    fn local_residual(&self, i: usize) -> f64 {
        (self.x[i] - respond(self.delta, self.sums[i])).abs()
    }

    /// Agent `i` plays its best response.
    pub fn step(&mut self, i: usize) -> StepReport {
        let old = self.x[i];
        let new = respond(self.delta, self.sums[i]);
        let diff = new - old;
        if diff != 0.0 {
            self.x[i] = new;
            for &j in self.graph.neighbors(i) {
                self.sums[j] += diff;
                let r = self.local_residual(j);
                self.residuals.set(j, r);
            }
        }
        self.residuals.set(i, 0.0);
        self.updates_since_refresh += 1;
        if self.updates_since_refresh >= self.graph.n() {
            self.refresh();
        }
        StepReport::new(i, old, new)
    }
}

/// Segment tree of residuals with O(1) maximum.
struct MaxTree {
    size: usize,
    nodes: Vec<f64>,
}

impl MaxTree {
    fn new(n: usize) -> Self {
        let size = n.next_power_of_two();
        MaxTree {
            size,
            nodes: vec![0.0; 2 * size],
        }
    }

    fn set(&mut self, i: usize, value: f64) {
        let mut k = i + self.size;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            let v = self.nodes[2 * k].max(self.nodes[2 * k + 1]);
            if self.nodes[k] == v {
                break;
            }
            self.nodes[k] = v;
        }
    }

    fn max(&self) -> f64 {
        self.nodes[1]
    }
}
