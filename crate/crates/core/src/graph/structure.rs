use std::collections::VecDeque;

use serde::Serialize;

use super::{Graph, VertexSet};
use crate::error::{input, Result};

/// Default cap on |V| for the exhaustive 4-subset search.
pub const DEFAULT_FORBIDDEN_CAP: usize = 64;

/// Induced subgraph together with the map from new labels to original ones.
#[derive(Debug, Clone)]
pub struct InducedSubgraph {
    pub graph: Graph,
    /// `original[k]` is the vertex of the parent graph relabelled to `k`.
    pub original: Vec<usize>,
}

/// Subgraph induced by `s`, relabelled in ascending original order.
pub fn induced_subgraph(g: &Graph, s: &VertexSet) -> Result<InducedSubgraph> {
    check_members(g, s)?;
    if s.is_empty() {
        return input("induced subgraph of an empty vertex set");
    }
    let mut index = vec![usize::MAX; g.n()];
    for (k, &v) in s.members().iter().enumerate() {
        index[v] = k;
    }
    let mut edges = Vec::new();
    for &v in s.members() {
        for &w in g.neighbors(v) {
            if v < w && index[w] != usize::MAX {
                edges.push((index[v], index[w]));
            }
        }
    }
    Ok(InducedSubgraph {
        graph: Graph::from_canonical(s.len(), edges),
        original: s.members().to_vec(),
    })
}

/// Maximal connected components of the subgraph induced by `s`, ordered by smallest member.
pub fn connected_components(g: &Graph, s: &VertexSet) -> Result<Vec<VertexSet>> {
    check_members(g, s)?;
    let inside = s.indicator(g.n());
    let mut seen = vec![false; g.n()];
    let mut components = Vec::new();
    for &root in s.members() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(VertexSet::from_sorted(comp));
    }
    Ok(components)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueUnion {
    pub is_clique_union: bool,
    /// Component clique sizes in component order; empty when not a clique union.
    pub sizes: Vec<usize>,
}

/// Whether every component of the subgraph induced by `s` is complete.
pub fn is_disjoint_clique_union(g: &Graph, s: &VertexSet) -> Result<CliqueUnion> {
    let components = connected_components(g, s)?;
    let mut sizes = Vec::with_capacity(components.len());
    for comp in &components {
        let k = comp.len();
        let complete = comp.members().iter().all(|&v| {
            g.neighbors(v).iter().filter(|w| comp.contains(**w)).count() == k - 1
        });
        if !complete {
            return Ok(CliqueUnion {
                is_clique_union: false,
                sizes: Vec::new(),
            });
        }
        sizes.push(k);
    }
    Ok(CliqueUnion {
        is_clique_union: true,
        sizes,
    })
}

/// First witness of each induced pattern, if any.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ForbiddenReport {
    /// Vertices in path order.
    pub p4: Option<[usize; 4]>,
    /// Vertices in cyclic order starting at the smallest.
    pub c4: Option<[usize; 4]>,
    /// Centre first, then the three leaves ascending.
    pub claw: Option<[usize; 4]>,
}

impl ForbiddenReport {
    pub fn is_free(&self) -> bool {
        self.p4.is_none() && self.c4.is_none() && self.claw.is_none()
    }
}

/// Exhaustive search over 4-subsets for induced P4, C4 and K_{1,3}.
pub fn forbidden_subgraph_check(g: &Graph, cap: usize) -> Result<ForbiddenReport> {
    let n = g.n();
    if n > cap {
        return Err(crate::Error::Guard(format!(
            "forbidden-subgraph search limited to {cap} vertices, graph has {n}"
        )));
    }
    let mut report = ForbiddenReport::default();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    classify_quad(g, [a, b, c, d], &mut report);
                    if report.p4.is_some() && report.c4.is_some() && report.claw.is_some() {
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn classify_quad(g: &Graph, quad: [usize; 4], report: &mut ForbiddenReport) {
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for p in 0..4 {
        for q in p + 1..4 {
            if g.has_edge(quad[p], quad[q]) {
                deg[p] += 1;
                deg[q] += 1;
                edges += 1;
            }
        }
    }
    let mut sorted = deg;
    sorted.sort_unstable();
    match (edges, sorted) {
        (3, [1, 1, 2, 2]) if report.p4.is_none() => {
            let start = (0..4).find(|&p| deg[p] == 1).unwrap();
            report.p4 = Some(walk(g, &quad, start));
        }
        (4, [2, 2, 2, 2]) if report.c4.is_none() => {
            report.c4 = Some(walk(g, &quad, 0));
        }
        (3, [1, 1, 1, 3]) if report.claw.is_none() => {
            let centre = (0..4).find(|&p| deg[p] == 3).unwrap();
            let mut w = [quad[centre]; 4];
            let mut k = 1;
            for p in 0..4 {
                if p != centre {
                    w[k] = quad[p];
                    k += 1;
                }
            }
            report.claw = Some(w);
        }
        _ => {}
    }
}

/// Orders the quad along a path/cycle starting at position `start`.
fn walk(g: &Graph, quad: &[usize; 4], start: usize) -> [usize; 4] {
    let mut order = [quad[start]; 4];
    let mut used = [false; 4];
    used[start] = true;
    for k in 1..4 {
        let prev = order[k - 1];
        let next = (0..4)
            .filter(|&p| !used[p] && g.has_edge(prev, quad[p]))
            .min_by_key(|&p| quad[p])
            .expect("quad is connected");
        used[next] = true;
        order[k] = quad[next];
    }
    order
}

fn check_members(g: &Graph, s: &VertexSet) -> Result<()> {
    match s.members().last() {
        Some(&v) if v >= g.n() => input(format!("vertex {v} out of range for n={}", g.n())),
        _ => Ok(()),
    }
}
