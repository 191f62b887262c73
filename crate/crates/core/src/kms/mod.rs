//! KMS states of the gauge dynamics, described by their vertex measures.
//!
//! A KMS_β state `φ` of the Toeplitz algebra is determined by the vector
//! `m_v = φ(p_v)` through `φ(s_μ s_ν*) = δ_{μ,ν} e^{-β|μ|} m_{s(μ)}`, so every
//! state here is a [`StateMeasure`] carrying that vector.

mod perron;
mod system;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Path, VertexSet};
use crate::spectral::SpectralError;

pub use perron::{perron_analysis, perron_check, PerronAnalysis, PerronError, ROOT_MATCH_TOLERANCE};
pub use system::KmsSystem;

/// An inverse temperature. `CriticalOf(c)` is exactly `ln ρ(A_C)` for the
/// component with id `c`, so comparisons against `C` need no float equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaSpec {
    Numeric(f64),
    CriticalOf(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateLabel {
    /// The state built from the Perron vector of a minimal critical component.
    PsiC { component: usize },
    /// The state concentrated on paths with source `vertex`.
    PhiBetaV { vertex: usize },
    /// `r·φ_ε + (1-r)·Σ t_C ψ_C`; `epsilon` is indexed by vertex and `t` pairs
    /// component ids with weights.
    Mixture { r: f64, epsilon: Vec<f64>, t: Vec<(usize, f64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateType {
    Finite,
    Infinite,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMeasure {
    pub beta: BetaSpec,
    /// The numeric value of `beta`.
    pub beta_value: f64,
    /// `m_v = φ(p_v)` for every vertex.
    pub m: Vec<f64>,
    pub label: StateLabel,
    pub factors_through_graph_algebra: bool,
    pub state_type: StateType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimplexCase {
    Empty,
    Subcritical,
    Critical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexDescriptor {
    pub beta: BetaSpec,
    pub beta_value: f64,
    pub case: SimplexCase,
    pub h_beta: VertexSet,
    /// Present in the critical case.
    pub k_beta: Option<VertexSet>,
    /// ψ states by component id, then φ states by vertex.
    pub extremes: Vec<StateMeasure>,
}

impl SimplexDescriptor {
    /// Number of extreme points minus one; `-1` when there are no states.
    pub fn dimension(&self) -> i64 {
        self.extremes.len() as i64 - 1
    }

    /// Dimension of the face of states that factor through the graph algebra.
    pub fn graph_algebra_dimension(&self) -> i64 {
        self.extremes.iter().filter(|s| s.factors_through_graph_algebra).count() as i64 - 1
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KmsError {
    #[error("beta must be finite, got {0}")]
    NonFiniteBeta(f64),
    #[error("component {0} does not exist")]
    NoSuchComponent(usize),
    #[error("component {0} is trivial and has no critical temperature")]
    TrivialComponent(usize),
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("the graph has no cycles")]
    Acyclic,
    #[error("component {0} is not minimal critical at this inverse temperature")]
    NotMinimalCritical(usize),
    #[error("beta does not exceed beta_v for vertex {0}")]
    BelowBetaV(usize),
    #[error("hereditary set contains vertex {0}")]
    VertexInHereditarySet(usize),
    #[error("this inverse temperature is not critical")]
    NotCritical,
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("paths must share a source")]
    SourcesDiffer,
    #[error("state has {got} vertex weights but the graph has {expected} vertices")]
    StateMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `φ(s_μ s_ν*) = δ_{μ,ν} e^{-β|μ|} m_{s(μ)}`.
pub fn eval_state(state: &StateMeasure, mu: &Path, nu: &Path) -> Result<f64, KmsError> {
    if mu.source() != nu.source() {
        return Err(KmsError::SourcesDiffer);
    }
    let s = mu.source();
    if s >= state.m.len() {
        return Err(KmsError::StateMismatch { expected: s + 1, got: state.m.len() });
    }
    if mu != nu {
        return Ok(0.0);
    }
    Ok((-state.beta_value * mu.len() as f64).exp() * state.m[s])
}

pub fn state_type(state: &StateMeasure) -> StateType {
    state.state_type
}
