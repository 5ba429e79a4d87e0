//! Undirected simple graphs and the structural queries the equilibrium
//! criteria are phrased in.

mod random;
mod structure;

pub use random::{generate_random, RandomModel, MAX_REGULAR_ATTEMPTS};
pub use structure::{
    connected_components, forbidden_subgraph_check, induced_subgraph, is_disjoint_clique_union,
    CliqueUnion, ForbiddenReport, InducedSubgraph, DEFAULT_FORBIDDEN_CAP,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Immutable undirected simple graph on vertices `0..n`.
///
/// Stores the canonical edge list (`i < j`, sorted) and sorted neighbor lists;
/// the dense adjacency matrix is built on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphJson", try_from = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, symmetrizing and deduplicating `edges`.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return input("graph must have at least one vertex");
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i >= n || j >= n {
                return input(format!("edge ({i},{j}) out of range for n={n}"));
            }
            if i == j {
                return input(format!("self-loop at vertex {i}"));
            }
            canon.push((i.min(j), i.max(j)));
        }
        Ok(Self::from_canonical(n, canon))
    }

    /// `edges` must already be in range and loop-free.
    pub(crate) fn from_canonical(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph { n, edges, neighbors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// Dense symmetric 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
        m
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let edges: Vec<_> = json.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(json.n, &edges)
    }

    // Deterministic families.

    pub fn path(n: usize) -> Result<Self> {
        check_size("path", n)?;
        Ok(Self::from_canonical(n, (1..n).map(|i| (i - 1, i)).collect()))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        check_size("cycle", n)?;
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Ok(Self::from_canonical(n, edges))
    }

    pub fn clique(n: usize) -> Result<Self> {
        check_size("clique", n)?;
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Ok(Self::from_canonical(n, edges))
    }

    /// Parts are `0..m` and `m..m+l`.
    pub fn complete_bipartite(m: usize, l: usize) -> Result<Self> {
        check_size("complete_bipartite part", m)?;
        check_size("complete_bipartite part", l)?;
        let mut edges = Vec::with_capacity(m * l);
        for i in 0..m {
            for j in m..m + l {
                edges.push((i, j));
            }
        }
        Ok(Self::from_canonical(m + l, edges))
    }

    /// The star with `m` leaves; identical to `complete_bipartite(m, 1)`, centre is vertex `m`.
    pub fn star(m: usize) -> Result<Self> {
        Self::complete_bipartite(m, 1)
    }

    /// Places `other` after `self`, shifting its labels by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let offset = self.n;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(i, j)| (i + offset, j + offset)))
            .collect();
        Self::from_canonical(self.n + other.n, edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> GraphJson {
        g.to_json()
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = crate::Error;
    fn try_from(json: GraphJson) -> Result<Graph> {
        Graph::from_json(&json)
    }
}

fn check_size(kind: &str, n: usize) -> Result<()> {
    if n == 0 {
        return input(format!("{kind} size must be at least 1"));
    }
    Ok(())
}

/// Wire form `{"n": int, "edges": [[i, j], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Canonical vertex subset: sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    /// Canonicalizes `members` and checks they lie in `0..n`.
    pub fn new(mut members: Vec<usize>, n: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&v) = members.last() {
            if v >= n {
                return input(format!("vertex {v} out of range for n={n}"));
            }
        }
        Ok(VertexSet(members))
    }

    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        VertexSet(members)
    }

    pub fn all(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    /// Members of the bitmask `mask` over `0..n`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        VertexSet((0..n).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Membership flags over `0..n`.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &v in &self.0 {
            flags[v] = true;
        }
        flags
    }
}
