//! Adjacency spectra and the stability thresholds derived from them.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{input, Result};
use crate::graph::{connected_components, induced_subgraph, Graph, VertexSet};

/// Sorted adjacency eigenvalues of a graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub source_n: usize,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// All eigenvalues of the adjacency matrix, ascending.
pub fn eigenvalues_sym(g: &Graph) -> Spectrum {
    Spectrum {
        eigenvalues: sorted_eigenvalues(g.adjacency_matrix()),
        source_n: g.n(),
    }
}

pub(crate) fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn lambda_min(g: &Graph) -> f64 {
    if g.edge_count() == 0 {
        return 0.0;
    }
    eigenvalues_sym(g).min()
}

/// Smallest adjacency eigenvalue of the path on `k` vertices, `2cos(kπ/(k+1))`.
pub fn path_lambda_min_closed_form(k: usize) -> f64 {
    assert!(k >= 1, "path length must be positive");
    if k == 1 {
        return 0.0;
    }
    2.0 * (k as f64 * PI / (k as f64 + 1.0)).cos()
}

/// `1/|λ_min|` of some induced subgraph, or unbounded when that subgraph has no
/// negative eigenvalue (an independent set).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub const UNBOUNDED: Threshold = Threshold(f64::INFINITY);

    pub fn from_lambda_min(lambda: f64) -> Self {
        if lambda < 0.0 {
            Threshold(1.0 / lambda.abs())
        } else {
            Self::UNBOUNDED
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_unbounded(self) -> bool {
        self.0.is_infinite()
    }

    /// `delta < threshold`; always true when unbounded.
    pub fn admits(self, delta: f64) -> bool {
        delta < self.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unbounded() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_unbounded() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// `1/|λ_min(G_S)|` for the subgraph induced by `s`.
pub fn stability_threshold(g: &Graph, s: &VertexSet) -> Result<Threshold> {
    if s.is_empty() {
        return input("stability threshold of an empty set");
    }
    Ok(Threshold::from_lambda_min(induced_lambda_min(g, s)?))
}

/// λ_min of the induced subgraph, computed per connected component.
pub(crate) fn induced_lambda_min(g: &Graph, s: &VertexSet) -> Result<f64> {
    let mut lambda = 0.0f64;
    for comp in connected_components(g, s)? {
        if comp.len() < 2 {
            continue;
        }
        let sub = induced_subgraph(g, &comp)?;
        lambda = lambda.min(lambda_min(&sub.graph));
    }
    Ok(lambda)
}

/// Same order and sorted spectra equal entrywise within `tol`.
pub fn is_cospectral(g: &Graph, h: &Graph, tol: f64) -> bool {
    if g.n() != h.n() {
        return false;
    }
    let (a, b) = (eigenvalues_sym(g), eigenvalues_sym(h));
    a.eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .all(|(x, y)| (x - y).abs() <= tol)
}
