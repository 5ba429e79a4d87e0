//! Equilibria of the game: the linear system on a candidate active set,
//! stability verdicts, path configurations and brute-force enumeration.

mod paths;

pub use paths::{
    allowed_block_pairs, b_endpoint, block_pair_regime, count_path_equilibria_golden,
    enumerate_path_configurations, BlockPairRule, PathConfiguration, PathEnumeration,
    PATH_ENUMERATION_CAP,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dynamics::{check_delta, residual_d};
use crate::error::{domain, input, Error, Result};
use crate::graph::{is_disjoint_clique_union, Graph, VertexSet};
use crate::spectral::{induced_lambda_min, lambda_min, stability_threshold, Threshold};

/// Slack for the strict inequalities of the stability conditions.
pub const STRICTNESS_TOL: f64 = 1e-12;
/// Tolerance on `‖(I + δG_S)x − 1‖_∞` for a solve to count as successful.
pub const SOLVE_TOL: f64 = 1e-10;
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 20;
const BRUTE_FORCE_HARD_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Pass,
    Boundary,
    Fail,
}

/// Classifies a quantity that must be strictly positive.
fn positive(q: f64) -> Check {
    if q > STRICTNESS_TOL {
        Check::Pass
    } else if q >= -STRICTNESS_TOL {
        Check::Boundary
    } else {
        Check::Fail
    }
}

fn combine(checks: impl IntoIterator<Item = Check>) -> Stability {
    let mut boundary = false;
    for c in checks {
        match c {
            Check::Fail => return Stability::Unstable,
            Check::Boundary => boundary = true,
            Check::Pass => {}
        }
    }
    if boundary {
        Stability::Boundary
    } else {
        Stability::Stable
    }
}

/// The candidate equilibrium supported on `set` and its stability verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSetReport {
    pub set: VertexSet,
    /// Full-length profile, zero off `set`; may leave `[0,1]` when the set is not an equilibrium.
    pub profile: Vec<f64>,
    pub solve_ok: bool,
    pub positivity_ok: bool,
    /// `Σ_j g_ij x_j − 1/δ` for every vertex outside `set`.
    pub inactivity_margins: BTreeMap<usize, f64>,
    pub stability: Stability,
    pub threshold: Threshold,
}

impl ActiveSetReport {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    /// Values on `set`, in set order.
    pub fn levels(&self) -> Vec<f64> {
        self.set.members().iter().map(|&v| self.profile[v]).collect()
    }
}

impl Serialize for ActiveSetReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ActiveSetReport", 5)?;
        st.serialize_field("set", &self.set)?;
        st.serialize_field("levels", &self.levels())?;
        st.serialize_field("stable", &self.stability)?;
        st.serialize_field("threshold", &self.threshold)?;
        st.serialize_field("margins", &self.inactivity_margins)?;
        st.end()
    }
}

/// Solves `(I + δG_S)x = 1`; `None` if the factorization fails or the residual is too large.
fn solve_levels(g: &Graph, delta: f64, s: &VertexSet) -> Option<Vec<f64>> {
    let k = s.len();
    let mut index = vec![usize::MAX; g.n()];
    for (a, &v) in s.members().iter().enumerate() {
        index[v] = a;
    }
    let mut m = DMatrix::<f64>::identity(k, k);
    for (a, &v) in s.members().iter().enumerate() {
        for &w in g.neighbors(v) {
            if index[w] != usize::MAX {
                m[(a, index[w])] = delta;
            }
        }
    }
    let ones = DVector::from_element(k, 1.0);
    let x = m.clone().lu().solve(&ones)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let err = (&m * &x - ones).amax();
    (err <= SOLVE_TOL).then(|| x.iter().copied().collect())
}

fn full_profile(n: usize, s: &VertexSet, levels: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (&v, &l) in s.members().iter().zip(levels) {
        x[v] = l;
    }
    x
}

fn margins(g: &Graph, delta: f64, s: &VertexSet, x: &[f64]) -> BTreeMap<usize, f64> {
    let inside = s.indicator(g.n());
    (0..g.n())
        .filter(|&i| !inside[i])
        .map(|i| {
            let sum: f64 = g.neighbors(i).iter().map(|&j| x[j]).sum();
            (i, sum - 1.0 / delta)
        })
        .collect()
}

fn check_set(g: &Graph, s: &VertexSet) -> Result<()> {
    if s.is_empty() {
        return input("active set must be nonempty");
    }
    if let Some(&v) = s.members().last() {
        if v >= g.n() {
            return input(format!("vertex {v} out of range for n={}", g.n()));
        }
    }
    Ok(())
}

/// Solves the active-set system on `s` and classifies the resulting profile as a
/// stable equilibrium: `δ < 1/|λ_min(G_S)|`, positive levels on `s`, and every
/// outside vertex strictly inactive. Quantities within [`STRICTNESS_TOL`] of
/// their boundary give [`Stability::Boundary`].
pub fn solve_on_active_set(g: &Graph, delta: f64, s: &VertexSet) -> Result<ActiveSetReport> {
    check_delta(delta)?;
    check_set(g, s)?;
    let threshold = stability_threshold(g, s)?;
    let Some(levels) = solve_levels(g, delta, s) else {
        return Ok(ActiveSetReport {
            set: s.clone(),
            profile: vec![f64::NAN; g.n()],
            solve_ok: false,
            positivity_ok: false,
            inactivity_margins: BTreeMap::new(),
            stability: Stability::Boundary,
            threshold,
        });
    };
    let profile = full_profile(g.n(), s, &levels);
    let inactivity_margins = margins(g, delta, s, &profile);
    let stability = combine(
        std::iter::once(positive(threshold.value() - delta))
            .chain(levels.iter().map(|&v| positive(v)))
            .chain(inactivity_margins.values().map(|&m| positive(m))),
    );
    Ok(ActiveSetReport {
        set: s.clone(),
        positivity_ok: levels.iter().all(|&v| v > STRICTNESS_TOL),
        profile,
        solve_ok: true,
        inactivity_margins,
        stability,
        threshold,
    })
}

/// True iff every agent is within `tol` of its best response.
pub fn verify_equilibrium(g: &Graph, delta: f64, x: &[f64], tol: f64) -> bool {
    x.len() == g.n() && residual_d(g, delta, x) <= tol
}

/// Cheap filter used by the brute force: levels and margins first, spectrum last.
fn stable_report(g: &Graph, delta: f64, s: VertexSet) -> Option<ActiveSetReport> {
    let levels = solve_levels(g, delta, &s)?;
    if levels.iter().any(|&v| positive(v) != Check::Pass) {
        return None;
    }
    let profile = full_profile(g.n(), &s, &levels);
    let inactivity_margins = margins(g, delta, &s, &profile);
    if inactivity_margins.values().any(|&m| positive(m) != Check::Pass) {
        return None;
    }
    let threshold = Threshold::from_lambda_min(induced_lambda_min(g, &s).ok()?);
    if positive(threshold.value() - delta) != Check::Pass {
        return None;
    }
    Some(ActiveSetReport {
        set: s,
        profile,
        solve_ok: true,
        positivity_ok: true,
        inactivity_margins,
        stability: Stability::Stable,
        threshold,
    })
}

/// Every nonempty subset whose report is stable, sorted by member list.
pub fn enumerate_stable_active_sets(
    g: &Graph,
    delta: f64,
    max_n: usize,
) -> Result<Vec<ActiveSetReport>> {
    check_delta(delta)?;
    let n = g.n();
    if n > max_n.min(BRUTE_FORCE_HARD_CAP) {
        return Err(Error::Guard(format!(
            "brute-force enumeration needs n <= {}, got {n}",
            max_n.min(BRUTE_FORCE_HARD_CAP)
        )));
    }
    let mut reports: Vec<ActiveSetReport> = (1u64..(1u64 << n))
        .into_par_iter()
        .filter_map(|mask| stable_report(g, delta, VertexSet::from_mask(mask, n)))
        .collect();
    reports.sort_by(|a, b| a.set.members().cmp(b.set.members()));
    Ok(reports)
}

fn golden_interval() -> (f64, f64) {
    ((5f64.sqrt() - 1.0) / 2.0, 1.0)
}

/// Outcome of the large-δ structural check on a candidate active set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeDeltaVerdict {
    pub pass: bool,
    pub is_clique_union: bool,
    pub clique_sizes: Vec<usize>,
    /// `Σ_k δ n_k^i / (1 + (k−1)δ)` for each vertex outside the set.
    pub inactivity_sums: BTreeMap<usize, f64>,
    /// Smallest vertex whose inactivity sum falls below 1.
    pub failing_vertex: Option<usize>,
}

/// For `δ ∈ (1/φ, 1)`: `s` must induce disjoint cliques and every outside vertex
/// `i` must satisfy `Σ_k δ n_k^i / (1 + (k−1)δ) ≥ 1`, where `n_k^i` counts the
/// neighbours of `i` lying in active cliques of size `k`.
pub fn verify_large_delta_structure(
    g: &Graph,
    delta: f64,
    s: &VertexSet,
) -> Result<LargeDeltaVerdict> {
    let (lo, hi) = golden_interval();
    if !(delta > lo && delta < hi) {
        return domain(format!("delta = {delta} outside (1/φ, 1)"));
    }
    check_set(g, s)?;
    let union = is_disjoint_clique_union(g, s)?;
    if !union.is_clique_union {
        return Ok(LargeDeltaVerdict {
            pass: false,
            is_clique_union: false,
            clique_sizes: Vec::new(),
            inactivity_sums: BTreeMap::new(),
            failing_vertex: None,
        });
    }
    let mut clique_size = vec![0usize; g.n()];
    for comp in crate::graph::connected_components(g, s)? {
        for &v in comp.members() {
            clique_size[v] = comp.len();
        }
    }
    let mut sums = BTreeMap::new();
    let mut failing = None;
    for i in (0..g.n()).filter(|&i| clique_size[i] == 0) {
        let sum: f64 = g
            .neighbors(i)
            .iter()
            .filter(|&&j| clique_size[j] > 0)
            .map(|&j| delta / (1.0 + (clique_size[j] - 1) as f64 * delta))
            .sum();
        if failing.is_none() && sum < 1.0 - STRICTNESS_TOL {
            failing = Some(i);
        }
        sums.insert(i, sum);
    }
    Ok(LargeDeltaVerdict {
        pass: failing.is_none(),
        is_clique_union: true,
        clique_sizes: union.sizes,
        inactivity_sums: sums,
        failing_vertex: failing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Unique,
    PossiblyMultiple,
}

/// Unique equilibrium whenever `δ < 1/|λ_min(G)|`.
pub fn uniqueness_regime(g: &Graph, delta: f64) -> Regime {
    if Threshold::from_lambda_min(lambda_min(g)).admits(delta) {
        Regime::Unique
    } else {
        Regime::PossiblyMultiple
    }
}
