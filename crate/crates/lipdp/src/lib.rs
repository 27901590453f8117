//! Lipschitz-continuous dynamic programming for weighted vertex-subset
//! optimization on bounded-treewidth graphs.
//!
//! The solve path is: heuristic tree decomposition, rebalancing to binary
//! shape with logarithmic height, conversion to a parse tree over
//! k-graphs, exact bottom-up value tables for a hand-instantiated
//! transition system, and randomized top-down extraction where every
//! branch choice goes through the exponential mechanism. Replacing hard
//! argmax by soft selection is what makes the output distribution stable
//! under small weight perturbations.
//!
//! The [`lab`] module measures that stability empirically: coupled-run and
//! optimal-transport estimates of the earth mover's distance between
//! output distributions, approximation sweeps against brute-force oracles,
//! and the layered planar-style solver in [`baker`].

pub mod baker;
pub mod dp_engine;
pub mod error;
pub mod gen;
pub mod graph;
pub mod hr_algebra;
pub mod lab;
pub mod pipeline;
pub mod problems;
pub mod soft_select;
pub mod tree_decomp;

pub use error::{Error, Result};
pub use graph::{bfs_layers, weighted_hamming, Graph, Label, VertexSet, WeightVector};
pub use problems::Problem;
