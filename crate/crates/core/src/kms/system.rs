use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use super::{
    BetaSpec, KmsError, SimplexCase, SimplexDescriptor, StateLabel, StateMeasure, StateType,
};
use crate::graph::{Condensation, DirectedGraph, VertexSet};
use crate::spectral;
use crate::TAU;

/// A graph together with its component structure, ready to answer questions
/// about KMS states at any inverse temperature.
#[derive(Debug, Clone)]
pub struct KmsSystem {
    graph: DirectedGraph,
    structure: Condensation,
    a: DMatrix<f64>,
}

/// Everything that depends only on `β`.
struct Regime {
    beta: BetaSpec,
    value: f64,
    h: VertexSet,
    k: VertexSet,
    case: SimplexCase,
    /// Minimal critical components of `E \ H_β`, by id.
    minimal_critical: Vec<usize>,
}

impl KmsSystem {
    pub fn new(graph: DirectedGraph) -> Self {
        let structure = Condensation::new(&graph);
        let a = graph.real_matrix();
        Self { graph, structure, a }
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn structure(&self) -> &Condensation {
        &self.structure
    }

    /// `ρ(A)`, the largest radius over the components.
    pub fn spectral_radius(&self) -> f64 {
        self.structure.components().iter().map(|c| c.spectral_radius).fold(0.0, f64::max)
    }

    pub fn beta_value(&self, beta: &BetaSpec) -> Result<f64, KmsError> {
        match *beta {
            BetaSpec::Numeric(b) if b.is_finite() => Ok(b),
            BetaSpec::Numeric(b) => Err(KmsError::NonFiniteBeta(b)),
            BetaSpec::CriticalOf(c) => {
                let comp = self
                    .structure
                    .components()
                    .get(c)
                    .ok_or(KmsError::NoSuchComponent(c))?;
                if comp.trivial {
                    return Err(KmsError::TrivialComponent(c));
                }
                Ok(comp.log_radius())
            }
        }
    }

    /// Compares `ln ρ(A_C)` with `β`. Trivial components are always `Less`.
    fn classify(&self, beta: &BetaSpec, value: f64, c: usize) -> Ordering {
        let comp = self.structure.component(c);
        if comp.trivial {
            return Ordering::Less;
        }
        if *beta == BetaSpec::CriticalOf(c) {
            return Ordering::Equal;
        }
        let diff = comp.log_radius() - value;
        if diff > TAU {
            Ordering::Greater
        } else if diff >= -TAU {
            Ordering::Equal
        } else {
            Ordering::Less
        }
    }

    fn closure_of(&self, components: impl Iterator<Item = usize>) -> VertexSet {
        let seeds: Vec<usize> = components
            .flat_map(|c| self.structure.component(c).members.clone())
            .collect();
        self.graph.hereditary_closure(seeds)
    }

    fn regime(&self, beta: &BetaSpec) -> Result<Regime, KmsError> {
        let value = self.beta_value(beta)?;
        let count = self.structure.components().len();
        let class: Vec<Ordering> = (0..count).map(|c| self.classify(beta, value, c)).collect();
        let h = self.closure_of((0..count).filter(|&c| class[c] == Ordering::Greater));
        let k = self.closure_of((0..count).filter(|&c| class[c] != Ordering::Less));

        let member = |c: usize| self.structure.component(c).members[0];
        let equal_outside: Vec<usize> = (0..count)
            .filter(|&c| class[c] == Ordering::Equal && !h.contains(member(c)))
            .collect();
        let case = if h.len() == self.graph.vertex_count() {
            SimplexCase::Empty
        } else if equal_outside.is_empty() {
            SimplexCase::Subcritical
        } else {
            SimplexCase::Critical
        };
        let minimal_critical = equal_outside
            .iter()
            .copied()
            .filter(|&c| !equal_outside.iter().any(|&d| d != c && self.structure.talks_to(d, c)))
            .collect();
        let k = if case == SimplexCase::Critical { k } else { h.clone() };
        Ok(Regime { beta: *beta, value, h, k, case, minimal_critical })
    }

    /// Hereditary closure of the components with `ln ρ(A_C) > β`.
    pub fn h_beta(&self, beta: &BetaSpec) -> Result<VertexSet, KmsError> {
        Ok(self.regime(beta)?.h)
    }

    /// Hereditary closure of the components with `ln ρ(A_C) ≥ β`.
    pub fn k_beta(&self, beta: &BetaSpec) -> Result<VertexSet, KmsError> {
        let value = self.beta_value(beta)?;
        let count = self.structure.components().len();
        Ok(self.closure_of((0..count).filter(|&c| self.classify(beta, value, c) != Ordering::Less)))
    }

    pub fn case(&self, beta: &BetaSpec) -> Result<SimplexCase, KmsError> {
        Ok(self.regime(beta)?.case)
    }

    /// Components attaining `ρ(A)` that are minimal among such components.
    pub fn minimal_critical_components(&self) -> Result<Vec<usize>, KmsError> {
        let top = self
            .structure
            .components()
            .iter()
            .filter(|c| !c.trivial)
            .max_by(|a, b| a.spectral_radius.total_cmp(&b.spectral_radius))
            .ok_or(KmsError::Acyclic)?;
        Ok(self.regime(&BetaSpec::CriticalOf(top.id))?.minimal_critical)
    }

    /// Minimal critical components of `E \ H_β` at a critical `β`.
    pub fn minimal_critical_at(&self, beta: &BetaSpec) -> Result<Vec<usize>, KmsError> {
        Ok(self.regime(beta)?.minimal_critical)
    }

    /// The critical inverse temperatures in ascending order, each named by the
    /// smallest-id component of `E \ H_β` attaining it.
    pub fn critical_temperatures(&self) -> Vec<BetaSpec> {
        let mut found = BTreeSet::new();
        for comp in self.structure.components().iter().filter(|c| !c.trivial) {
            let regime = self
                .regime(&BetaSpec::CriticalOf(comp.id))
                .expect("nontrivial component ids are valid");
            if regime.case == SimplexCase::Critical {
                found.insert(regime.minimal_critical[0]);
            }
        }
        let mut out: Vec<usize> = found.into_iter().collect();
        out.sort_by(|&a, &b| {
            let (ra, rb) = (self.structure.component(a), self.structure.component(b));
            ra.spectral_radius.total_cmp(&rb.spectral_radius).then(a.cmp(&b))
        });
        out.into_iter().map(BetaSpec::CriticalOf).collect()
    }

    /// `max ln ρ(A_C)` over nontrivial `C ≤ v`, or `None` when `v` sits above no cycle.
    pub fn beta_v(&self, v: usize) -> Result<Option<f64>, KmsError> {
        self.check_vertex(v)?;
        let home = self.structure.component_of(v);
        Ok(self
            .structure
            .components()
            .iter()
            .filter(|c| !c.trivial && self.structure.talks_to(c.id, home))
            .map(|c| c.log_radius())
            .reduce(f64::max))
    }

    fn check_vertex(&self, v: usize) -> Result<(), KmsError> {
        if v < self.graph.vertex_count() {
            Ok(())
        } else {
            Err(KmsError::NoSuchVertex(v))
        }
    }

    fn outside(&self, set: &VertexSet) -> Vec<usize> {
        (0..self.graph.vertex_count()).filter(|&v| !set.contains(v)).collect()
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        self.a.select_rows(rows).select_columns(cols)
    }

    /// `z^C = ρ⁻¹(1 - ρ⁻¹A_L)⁻¹ A_{L,C} x^C` with `L = E⁰ \ K_β`, keyed by vertex of `L`.
    fn z_for(&self, regime: &Regime, c: usize) -> Result<BTreeMap<usize, f64>, KmsError> {
        if regime.case != SimplexCase::Critical || !regime.minimal_critical.contains(&c) {
            return Err(KmsError::NotMinimalCritical(c));
        }
        let comp = self.structure.component(c);
        let rho = comp.spectral_radius;
        let x = DVector::from_vec(comp.perron_vector.clone().expect("nontrivial component"));
        let l = self.outside(&regime.k);
        if l.is_empty() {
            return Ok(BTreeMap::new());
        }
        let rhs = self.block(&l, &comp.members) * x;
        let solved = spectral::resolvent_solve(&self.block(&l, &l), rho.ln(), rhs.as_slice())?;
        Ok(l.into_iter().zip(solved.into_iter().map(|s| s / rho)).collect())
    }

    /// `z^C` for `C ∈ mc(E)`, over the complement of the hereditary closure of `⋃ mc(E)`.
    pub fn z_vector(&self, c: usize) -> Result<BTreeMap<usize, f64>, KmsError> {
        if !self.minimal_critical_components()?.contains(&c) {
            return Err(KmsError::NotMinimalCritical(c));
        }
        self.z_vector_at(&BetaSpec::CriticalOf(c), c)
    }

    /// `z^C` for `C ∈ mc(E \ H_β)`.
    pub fn z_vector_at(&self, beta: &BetaSpec, c: usize) -> Result<BTreeMap<usize, f64>, KmsError> {
        let regime = self.regime(beta)?;
        self.z_for(&regime, c)
    }

    fn psi_for(&self, regime: &Regime, c: usize) -> Result<StateMeasure, KmsError> {
        let z = self.z_for(regime, c)?;
        let comp = self.structure.component(c);
        let x = comp.perron_vector.as_ref().expect("nontrivial component");
        let scale = 1.0 + z.values().sum::<f64>();
        let mut m = vec![0.0; self.graph.vertex_count()];
        for (&v, &zv) in &z {
            m[v] = zv / scale;
        }
        for (&v, &xv) in comp.members.iter().zip(x) {
            m[v] = xv / scale;
        }
        Ok(StateMeasure {
            beta: BetaSpec::CriticalOf(c),
            beta_value: comp.log_radius(),
            m,
            label: StateLabel::PsiC { component: c },
            factors_through_graph_algebra: true,
            state_type: StateType::Infinite,
        })
    }

    /// `ψ_C` for `C ∈ mc(E)` at `β = ln ρ(A)`.
    pub fn psi_measure(&self, c: usize) -> Result<StateMeasure, KmsError> {
        if !self.minimal_critical_components()?.contains(&c) {
            return Err(KmsError::NotMinimalCritical(c));
        }
        self.psi_measure_at(&BetaSpec::CriticalOf(c), c)
    }

    /// `ψ_C` for `C ∈ mc(E \ H_β)`, composed with the quotient map.
    pub fn psi_measure_at(&self, beta: &BetaSpec, c: usize) -> Result<StateMeasure, KmsError> {
        let regime = self.regime(beta)?;
        self.psi_for(&regime, c)
    }

    /// Whether `v` receives no edges in `E \ ΣK_β`.
    fn is_source_after_saturation(&self, regime: &Regime, v: usize) -> bool {
        let saturated = self.graph.saturation(&regime.k).expect("K_β is hereditary");
        !saturated.contains(v)
            && (0..self.graph.vertex_count())
                .all(|w| self.graph.entry(v, w) == 0 || saturated.contains(w))
    }

    fn phi_for(&self, regime: &Regime, v: usize) -> Result<StateMeasure, KmsError> {
        self.check_vertex(v)?;
        if regime.k.contains(v) {
            return Err(KmsError::BelowBetaV(v));
        }
        let m = self.phi_vector(&regime.k, regime.value, v)?;
        Ok(StateMeasure {
            beta: regime.beta,
            beta_value: regime.value,
            m,
            label: StateLabel::PhiBetaV { vertex: v },
            factors_through_graph_algebra: self.is_source_after_saturation(regime, v),
            state_type: StateType::Finite,
        })
    }

    /// `m_w = Σ_{λ ∈ wE*v} e^{-β|λ|} / y_v`, summed over paths in `E \ H`.
    fn phi_vector(&self, h: &VertexSet, beta: f64, v: usize) -> Result<Vec<f64>, KmsError> {
        let l = self.outside(h);
        let pos = l.iter().position(|&w| w == v).ok_or(KmsError::VertexInHereditarySet(v))?;
        let mut unit = vec![0.0; l.len()];
        unit[pos] = 1.0;
        let column = spectral::resolvent_solve(&self.block(&l, &l), beta, &unit)?;
        let y: f64 = column.iter().sum();
        let mut m = vec![0.0; self.graph.vertex_count()];
        for (&w, c) in l.iter().zip(column) {
            m[w] = c / y;
        }
        Ok(m)
    }

    /// `φ_{β,v}`, which exists exactly when `β > β_v`.
    pub fn phi_measure(&self, beta: &BetaSpec, v: usize) -> Result<StateMeasure, KmsError> {
        let regime = self.regime(beta)?;
        self.phi_for(&regime, v)
    }

    /// The vertex measure of `φ_{β,v}` computed in `E \ H` for a caller-chosen
    /// hereditary `H` not containing `v`.
    pub fn phi_measure_through(&self, beta: &BetaSpec, v: usize, h: &VertexSet) -> Result<Vec<f64>, KmsError> {
        self.check_vertex(v)?;
        if !h.is_hereditary() {
            return Err(crate::graph::GraphError::NotHereditary.into());
        }
        let value = self.beta_value(beta)?;
        self.phi_vector(h, value, v)
    }

    /// `y` of the quotient `E \ H`, indexed by the complement of `H` in increasing order.
    fn quotient_y(&self, h: &VertexSet, beta: f64) -> Result<(Vec<usize>, Vec<f64>), KmsError> {
        let l = self.outside(h);
        let block = self.block(&l, &l);
        let y = spectral::resolvent_solve(&block.transpose(), beta, &vec![1.0; l.len()])?;
        Ok((l, y))
    }

    /// `r·φ_ε + (1-r)·Σ t_C ψ_C` at a critical `β`, where `φ_ε` has vertex
    /// measure `(1 - e^{-β}A_L)⁻¹ε` on `L = E⁰ \ K_β`. `epsilon` is indexed by
    /// vertex, vanishes on `K_β`, and satisfies `ε·y = 1`; `t` is a probability
    /// vector over `mc(E \ H_β)`.
    pub fn general_state_measure(
        &self,
        beta: &BetaSpec,
        r: f64,
        epsilon: &[f64],
        t: &[(usize, f64)],
    ) -> Result<StateMeasure, KmsError> {
        let regime = self.regime(beta)?;
        if regime.case != SimplexCase::Critical {
            return Err(KmsError::NotCritical);
        }
        let n = self.graph.vertex_count();
        let invalid = |msg: &str| Err(KmsError::InvalidWeights(msg.to_owned()));
        if !(0.0..=1.0).contains(&r) {
            return invalid("r must lie in [0, 1]");
        }
        if epsilon.len() != n {
            return Err(KmsError::StateMismatch { expected: n, got: epsilon.len() });
        }
        if epsilon.iter().any(|&e| e < 0.0 || !e.is_finite()) {
            return invalid("epsilon must be nonnegative");
        }
        if regime.k.iter().any(|v| epsilon[v] != 0.0) {
            return invalid("epsilon must vanish on K_beta");
        }
        if t.iter().any(|&(_, w)| w < 0.0 || !w.is_finite()) {
            return invalid("t must be nonnegative");
        }
        if (t.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs() > TAU {
            return invalid("t must sum to 1");
        }
        let mut seen = BTreeSet::new();
        for &(c, _) in t {
            if !seen.insert(c) {
                return invalid("t repeats a component");
            }
            if !regime.minimal_critical.contains(&c) {
                return Err(KmsError::NotMinimalCritical(c));
            }
        }

        let (l, y) = self.quotient_y(&regime.k, regime.value)?;
        let eps_l: Vec<f64> = l.iter().map(|&v| epsilon[v]).collect();
        let pairing: f64 = eps_l.iter().zip(&y).map(|(e, y)| e * y).sum();
        if (pairing - 1.0).abs() > TAU {
            return invalid("epsilon must pair with y to 1");
        }

        let mut m = vec![0.0; n];
        if r > 0.0 && !l.is_empty() {
            let finite = spectral::resolvent_solve(&self.block(&l, &l), regime.value, &eps_l)?;
            for (&v, f) in l.iter().zip(finite) {
                m[v] += r * f;
            }
        }
        let mut factors = true;
        if r < 1.0 {
            for &(c, w) in t {
                let psi = self.psi_for(&regime, c)?;
                for (slot, p) in m.iter_mut().zip(&psi.m) {
                    *slot += (1.0 - r) * w * p;
                }
            }
        }
        if r > 0.0 {
            for (&v, &e) in l.iter().zip(&eps_l) {
                if e > 0.0 && !self.is_source_after_saturation(&regime, v) {
                    factors = false;
                }
            }
        }
        let finite_weight = r > 0.0;
        let infinite_weight = r < 1.0 && t.iter().any(|&(_, w)| w > 0.0);
        let state_type = match (finite_weight, infinite_weight) {
            (true, true) => StateType::Mixed,
            (false, _) => StateType::Infinite,
            (true, false) => StateType::Finite,
        };
        Ok(StateMeasure {
            beta: regime.beta,
            beta_value: regime.value,
            m,
            label: StateLabel::Mixture { r, epsilon: epsilon.to_vec(), t: t.to_vec() },
            factors_through_graph_algebra: factors,
            state_type,
        })
    }

    /// The extreme points of the KMS_β simplex.
    pub fn simplex(&self, beta: &BetaSpec) -> Result<SimplexDescriptor, KmsError> {
        let regime = self.regime(beta)?;
        let mut extremes = Vec::new();
        if regime.case == SimplexCase::Critical {
            for &c in &regime.minimal_critical {
                extremes.push(self.psi_for(&regime, c)?);
            }
        }
        if regime.case != SimplexCase::Empty {
            for v in self.outside(&regime.k) {
                extremes.push(self.phi_for(&regime, v)?);
            }
        }
        Ok(SimplexDescriptor {
            beta: regime.beta,
            beta_value: regime.value,
            case: regime.case,
            k_beta: (regime.case == SimplexCase::Critical).then(|| regime.k.clone()),
            h_beta: regime.h,
            extremes,
        })
    }

    /// Recomputes whether `state` factors through the graph algebra from its label.
    pub fn factors_through_graph_algebra(&self, state: &StateMeasure) -> Result<bool, KmsError> {
        let n = self.graph.vertex_count();
        if state.m.len() != n {
            return Err(KmsError::StateMismatch { expected: n, got: state.m.len() });
        }
        match &state.label {
            StateLabel::PsiC { .. } => Ok(true),
            StateLabel::PhiBetaV { vertex } => {
                let regime = self.regime(&state.beta)?;
                self.check_vertex(*vertex)?;
                Ok(!regime.k.contains(*vertex) && self.is_source_after_saturation(&regime, *vertex))
            }
            StateLabel::Mixture { r, epsilon, .. } => {
                let regime = self.regime(&state.beta)?;
                Ok(*r == 0.0
                    || epsilon.iter().enumerate().all(|(v, &e)| {
                        e == 0.0 || (!regime.k.contains(v) && self.is_source_after_saturation(&regime, v))
                    }))
            }
        }
    }
}
