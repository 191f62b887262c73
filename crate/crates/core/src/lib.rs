//! KMS states for the gauge dynamics on the Toeplitz algebra and the graph
//! algebra of a finite directed graph.
//!
//! Conventions: an edge `e` has source `s(e)` and range `r(e)`, and the vertex
//! matrix is `A(v, w) = |vE¹w|`, the number of edges with range `v` and source
//! `w`. Paths compose right to left.

pub mod graph;
pub mod kms;
pub mod oracle;
pub mod spectral;

/// Tolerance for comparing inverse temperatures on the log scale.
pub const TAU: f64 = 1e-9;

pub use graph::{
    parse_graph, Component, Condensation, DirectedGraph, Edge, EdgeRef, GraphError, ParseError, Path,
    QuotientGraph, VertexSet,
};
pub use spectral::{SpectralData, SpectralError};
pub use kms::{
    eval_state, perron_check, state_type, BetaSpec, KmsError, KmsSystem, SimplexCase, SimplexDescriptor,
    StateLabel, StateMeasure, StateType,
};
