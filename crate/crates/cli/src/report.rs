//! Serializable reports assembled from a [`KmsSystem`]. Every real is rounded
//! to 12 significant digits before it lands here.

use graphkms::spectral::characteristic_polynomial;
use graphkms::{BetaSpec, KmsSystem, SimplexCase, SimplexDescriptor, StateLabel, StateMeasure, StateType};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub graph: GraphSummary,
    pub criticals: Vec<CriticalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplex: Option<SimplexReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeReport>,
    pub components: Vec<ComponentReport>,
    /// Component ids, each placed after every component it talks to.
    pub seneta_order: Vec<usize>,
    pub minimal_critical: Vec<usize>,
    /// `null` for vertices that sit above no cycle.
    pub beta_v: IndexMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub source: String,
    pub range: String,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub id: usize,
    pub members: Vec<String>,
    pub trivial: bool,
    pub spectral_radius: f64,
    pub log_radius: Option<f64>,
    pub period: Option<u32>,
    /// `det(xI - A_C)`, highest degree first.
    pub characteristic_polynomial: Vec<i128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub beta: f64,
    pub component: usize,
    pub members: Vec<String>,
    pub beta_definition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexReport {
    pub beta: f64,
    pub beta_definition: Option<String>,
    pub case: String,
    pub dimension: i64,
    pub graph_algebra_dimension: i64,
    pub h_beta: Vec<String>,
    pub k_beta: Option<Vec<String>>,
    pub extremes: Vec<StateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub label: String,
    pub m: IndexMap<String, f64>,
    pub factors_through_graph_algebra: bool,
    pub state_type: String,
}

/// `x` rounded to 12 significant digits; negative zero becomes zero.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn case_name(case: SimplexCase) -> &'static str {
    match case {
        SimplexCase::Empty => "empty",
        SimplexCase::Subcritical => "subcritical",
        SimplexCase::Critical => "critical",
    }
}

fn type_name(t: StateType) -> &'static str {
    match t {
        StateType::Finite => "finite",
        StateType::Infinite => "infinite",
        StateType::Mixed => "mixed",
    }
}

pub fn beta_definition(beta: &BetaSpec) -> Option<String> {
    match beta {
        BetaSpec::CriticalOf(c) => Some(format!("ln rho(component {c})")),
        BetaSpec::Numeric(_) => None,
    }
}

fn member_names(system: &KmsSystem, component: usize) -> Vec<String> {
    let g = system.graph();
    system.structure().component(component).members.iter().map(|&v| g.name(v).to_owned()).collect()
}

pub fn label(system: &KmsSystem, state: &StateMeasure) -> String {
    match &state.label {
        StateLabel::PsiC { component } => format!("psi_{{{}}}", member_names(system, *component).join(",")),
        StateLabel::PhiBetaV { vertex } => format!("phi_{}", system.graph().name(*vertex)),
        StateLabel::Mixture { r, .. } => format!("mixture(r={})", round12(*r)),
    }
}

pub fn graph_summary(system: &KmsSystem) -> GraphSummary {
    let g = system.graph();
    let s = system.structure();
    let components = s
        .components()
        .iter()
        .map(|c| {
            let block = g.matrix().select_rows(&c.members).select_columns(&c.members);
            ComponentReport {
                id: c.id,
                members: member_names(system, c.id),
                trivial: c.trivial,
                spectral_radius: round12(c.spectral_radius),
                log_radius: (!c.trivial).then(|| round12(c.log_radius())),
                period: c.period,
                characteristic_polynomial: characteristic_polynomial(&block),
            }
        })
        .collect();
    let beta_v = (0..g.vertex_count())
        .map(|v| {
            let value = system.beta_v(v).expect("vertex in range").map(round12);
            (g.name(v).to_owned(), value)
        })
        .collect();
    GraphSummary {
        vertices: g.names().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeReport {
                source: g.name(e.source).to_owned(),
                range: g.name(e.range).to_owned(),
                multiplicity: e.multiplicity,
            })
            .collect(),
        components,
        seneta_order: s.seneta_order(),
        minimal_critical: system.minimal_critical_components().unwrap_or_default(),
        beta_v,
    }
}

pub fn criticals(system: &KmsSystem) -> Vec<CriticalReport> {
    system
        .critical_temperatures()
        .iter()
        .map(|beta| {
            let BetaSpec::CriticalOf(c) = *beta else { unreachable!("critical temperatures name a component") };
            CriticalReport {
                beta: round12(system.beta_value(beta).expect("nontrivial component")),
                component: c,
                members: member_names(system, c),
                beta_definition: beta_definition(beta).expect("critical"),
            }
        })
        .collect()
}

pub fn simplex_report(system: &KmsSystem, simplex: &SimplexDescriptor) -> SimplexReport {
    let g = system.graph();
    let names = |set: &graphkms::VertexSet| set.iter().map(|v| g.name(v).to_owned()).collect::<Vec<_>>();
    SimplexReport {
        beta: round12(simplex.beta_value),
        beta_definition: beta_definition(&simplex.beta),
        case: case_name(simplex.case).to_owned(),
        dimension: simplex.dimension(),
        graph_algebra_dimension: simplex.graph_algebra_dimension(),
        h_beta: names(&simplex.h_beta),
        k_beta: simplex.k_beta.as_ref().map(names),
        extremes: simplex
            .extremes
            .iter()
            .map(|state| StateReport {
                label: label(system, state),
                m: state.m.iter().enumerate().map(|(v, &x)| (g.name(v).to_owned(), round12(x))).collect(),
                factors_through_graph_algebra: state.factors_through_graph_algebra,
                state_type: type_name(state.state_type).to_owned(),
            })
            .collect(),
    }
}

pub fn analysis(system: &KmsSystem, simplex: Option<&SimplexDescriptor>) -> AnalysisReport {
    AnalysisReport {
        graph: graph_summary(system),
        criticals: criticals(system),
        simplex: simplex.map(|s| simplex_report(system, s)),
    }
}
