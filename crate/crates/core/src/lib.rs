//! Random-order best-response dynamics for network games with linear best
//! responses and strategic substitutes: simulation, spectral stability
//! thresholds, equilibrium enumeration, named constructions and δ-sweeps.

pub mod constructions;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod graph;
pub mod rng;
pub mod spec;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
