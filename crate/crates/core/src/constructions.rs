//! Named example graphs with their initial profiles and update schedules.
//!
//! Vertices are 0-based throughout. In the chain constructions copy `j`
//! (0-based) occupies vertices `5j..5j+5`, so the 1-based path vertex `v_i^j`
//! of copy `j+1` is vertex `5j + i − 1` here.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::{Engine, StrategyProfile};
use crate::error::{domain, input, Error, Result};
use crate::graph::Graph;

/// Sweeps allowed while driving one chain copy to its alternating equilibrium.
const CHAIN_SWEEP_LIMIT: usize = 100_000;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioBundle {
    pub name: String,
    pub graph: Graph,
    /// Second graph of a pair scenario (the cospectral mate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<Graph>,
    pub initial: StrategyProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    pub delta_hint: f64,
    pub narrative: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, f64>,
}

impl ScenarioBundle {
    fn new(name: impl Into<String>, graph: Graph, initial: StrategyProfile, delta_hint: f64) -> Self {
        ScenarioBundle {
            name: name.into(),
            graph,
            companion: None,
            initial,
            schedule: None,
            delta_hint,
            narrative: String::new(),
            metadata: BTreeMap::new(),
        }
    }
}

/// `K_{1,4}` (centre 0) and `C4 ∪ K1`: non-isomorphic with equal spectra.
pub fn cospectral_pair() -> (Graph, Graph) {
    let star = Graph::complete_bipartite(1, 4).expect("fixed sizes");
    let mate = Graph::cycle(4)
        .expect("fixed sizes")
        .disjoint_union(&Graph::path(1).expect("fixed sizes"));
    (star, mate)
}

pub fn cospectral_scenario() -> ScenarioBundle {
    let (star, mate) = cospectral_pair();
    let mut b = ScenarioBundle::new("cospectral", star, StrategyProfile::zeros(5), 0.5);
    b.companion = Some(mate);
    b.narrative = "K_{1,4} with centre 0; companion C4 on 0..4 plus isolated vertex 4".into();
    b
}

/// Fastest update order on P5 from the all-zero start that reactivates the middle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlowSchedule {
    pub x0: StrategyProfile,
    /// `[1, 3]`, then `[0, 1, 4, 3]` repeated `side_cycles` times, then the middle `2`.
    pub schedule: Vec<usize>,
    pub side_cycles: usize,
    /// `(ln(1−δ) − ln 2) / (10 ln δ)`, in rounds.
    pub bound_rounds: f64,
    /// `10 · bound_rounds − 4`, the same bound as a step count.
    pub bound_steps: f64,
}

/// Side updates per pair needed before the middle of P5 can reactivate:
/// the least `t` with `2δ(1 + δ^{2t+1})/(1 + δ) < 1`.
fn p5_side_cycles(delta: f64) -> usize {
    let mut t = 0usize;
    while 2.0 * delta * (1.0 + delta.powi(2 * t as i32 + 1)) / (1.0 + delta) >= 1.0 {
        t += 1;
    }
    t
}

pub fn p5_slow_schedule(delta: f64) -> Result<SlowSchedule> {
    if !(delta > 0.5 && delta < 1.0) {
        return domain(format!("delta = {delta} outside (1/2, 1)"));
    }
    let side_cycles = p5_side_cycles(delta);
    let mut schedule = vec![1, 3];
    for _ in 0..side_cycles {
        schedule.extend([0, 1, 4, 3]);
    }
    schedule.push(2);
    let bound_rounds = ((1.0 - delta).ln() - 2f64.ln()) / (10.0 * delta.ln());
    Ok(SlowSchedule {
        x0: StrategyProfile::zeros(5),
        schedule,
        side_cycles,
        bound_rounds,
        bound_steps: 10.0 * bound_rounds - 4.0,
    })
}

pub fn p5_slow_scenario(delta: f64) -> Result<ScenarioBundle> {
    let s = p5_slow_schedule(delta)?;
    let mut b = ScenarioBundle::new("p5slow", Graph::path(5)?, s.x0, delta);
    b.schedule = Some(s.schedule);
    b.narrative = "P5 from all-zero; first updates at vertices 1 and 3, then alternating side pairs".into();
    b.metadata.insert("bound_rounds".into(), s.bound_rounds);
    b.metadata.insert("bound_steps".into(), s.bound_steps);
    b.metadata.insert("side_cycles".into(), s.side_cycles as f64);
    Ok(b)
}

fn check_chain_args(k: usize, delta: f64) -> Result<()> {
    if k == 0 {
        return input("chain needs at least one copy");
    }
    if !(delta > golden() && delta < 1.0) {
        return domain(format!("delta = {delta} outside (1/φ, 1)"));
    }
    Ok(())
}

/// `k` copies of P5 joined by the edges `(5(j−1)+3, 5j)`.
pub fn chain_graph(k: usize) -> Result<Graph> {
    if k == 0 {
        return input("chain needs at least one copy");
    }
    let mut edges = Vec::with_capacity(5 * k);
    for j in 0..k {
        let o = 5 * j;
        edges.extend([(o, o + 1), (o + 1, o + 2), (o + 2, o + 3), (o + 3, o + 4)]);
        if j > 0 {
            edges.push((o - 2, o));
        }
    }
    Graph::new(5 * k, &edges)
}

/// Copy 0 starts at `(0,1,0,1,0)`, later copies at `(0,1,0,1/(1+δ),1/(1+δ))`.
pub fn chain_initial(k: usize, delta: f64) -> Result<StrategyProfile> {
    let c = 1.0 / (1.0 + delta);
    let mut x = Vec::with_capacity(5 * k);
    for j in 0..k {
        if j == 0 {
            x.extend([0.0, 1.0, 0.0, 1.0, 0.0]);
        } else {
            x.extend([0.0, 1.0, 0.0, c, c]);
        }
    }
    StrategyProfile::new(x)
}

/// Update order that walks the chain copy by copy: converge the side pairs until
/// the middle's best response turns positive, update the middle, sweep the copy
/// to `(1,0,1,0,1)`, then wake vertex 0 of the next copy.
fn chain_schedule(g: &Graph, delta: f64, x0: &StrategyProfile, k: usize) -> Result<Vec<usize>> {
    let mut engine = Engine::new(g, delta, x0.as_slice().to_vec());
    let mut schedule = Vec::new();
    let mut update = |engine: &mut Engine, v: usize| {
        engine.step(v);
        schedule.push(v);
    };
    for j in 0..k {
        let o = 5 * j;
        let mut guard = 0;
        while engine.best_response(o + 2) <= 0.0 {
            update(&mut engine, o);
            update(&mut engine, o + 1);
            if j == 0 {
                update(&mut engine, o + 4);
                update(&mut engine, o + 3);
            }
            guard += 1;
            if guard > CHAIN_SWEEP_LIMIT {
                return Err(Error::Generation(format!("copy {j}: middle never reactivates")));
            }
        }
        update(&mut engine, o + 2);
        let target = [1.0, 0.0, 1.0, 0.0, 1.0];
        let mut sweeps = 0;
        while engine.profile()[o..o + 5] != target {
            for r in [2, 1, 3, 0, 4] {
                update(&mut engine, o + r);
            }
            sweeps += 1;
            if sweeps > CHAIN_SWEEP_LIMIT {
                return Err(Error::Generation(format!("copy {j}: no alternating profile")));
            }
        }
        if j + 1 < k {
            update(&mut engine, o + 5);
        }
    }
    Ok(schedule)
}

/// `k` bridged copies of P5 whose deterministic replay produces one reshuffle per copy.
pub fn reshuffle_chain(k: usize, delta: f64) -> Result<ScenarioBundle> {
    check_chain_args(k, delta)?;
    let graph = chain_graph(k)?;
    let initial = chain_initial(k, delta)?;
    let schedule = chain_schedule(&graph, delta, &initial, k)?;
    let mut b = ScenarioBundle::new("chain", graph, initial, delta);
    b.schedule = Some(schedule);
    b.narrative = "copy j on vertices 5j..5j+4 (paper v_1..v_5); bridge 5j+3 -> 5(j+1)".into();
    b.metadata.insert("copies".into(), k as f64);
    Ok(b)
}

/// P6 on `0..6` plus hub 6 joined to `{0, 2, 4}`; path vertices `0, 2, 4` start at 1.
pub fn single_component_reshuffle() -> ScenarioBundle {
    let graph = Graph::new(
        7,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (6, 0), (6, 2), (6, 4)],
    )
    .expect("fixed graph");
    let initial =
        StrategyProfile::new(vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).expect("values in range");
    let mut b = ScenarioBundle::new("singlecomp", graph, initial, 0.55);
    b.narrative = "path vertices 0..5 (paper 1..6), hub 6 on paper's odd vertices".into();
    b
}

/// Disjoint union of `k` reshuffle chains of `chain_len` copies, started at all-zero.
pub fn expected_slow_union(k: usize, delta: f64, chain_len: usize) -> Result<ScenarioBundle> {
    check_chain_args(chain_len, delta)?;
    if k == 0 {
        return input("union needs at least one chain");
    }
    let chain = chain_graph(chain_len)?;
    let mut graph = chain.clone();
    for _ in 1..k {
        graph = graph.disjoint_union(&chain);
    }
    let n = graph.n();
    let mut b = ScenarioBundle::new("union", graph, StrategyProfile::zeros(n), delta);
    b.narrative = format!("{k} disjoint chains of {chain_len} P5 copies, random order from zero");
    b.metadata.insert("chains".into(), k as f64);
    b.metadata.insert("chain_len".into(), chain_len as f64);
    // Crude lower bound p = (5n)^(-2n) on the per-chain slow event, as log10.
    let m = (5 * chain_len) as f64;
    b.metadata
        .insert("log10_probability_bound".into(), -2.0 * m * (5.0 * m).log10());
    Ok(b)
}
