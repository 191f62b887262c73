//! Strongly connected components and the order in which they talk to each other.

use serde::{Deserialize, Serialize};

use super::DirectedGraph;
use crate::spectral;

/// A strongly connected component together with the Perron-Frobenius data
/// of its diagonal block `A_C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    /// Vertex indices in increasing order.
    pub members: Vec<usize>,
    /// A single vertex without a loop.
    pub trivial: bool,
    pub spectral_radius: f64,
    pub period: Option<u32>,
    /// Unimodular Perron-Frobenius eigenvector of `A_C`, aligned with `members`.
    pub perron_vector: Option<Vec<f64>>,
}

impl Component {
    /// `ln ρ(A_C)`, which is `-∞` for a trivial component.
    pub fn log_radius(&self) -> f64 {
        if self.trivial {
            f64::NEG_INFINITY
        } else {
            self.spectral_radius.ln()
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Tarjan's algorithm over an adjacency list. Components come out in
/// reverse topological order of the condensation.
pub(crate) fn tarjan(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adjacency: &'a [Vec<usize>],
        next_index: usize,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
    }

    fn visit(state: &mut State<'_>, v: usize) {
        state.index[v] = Some(state.next_index);
        state.low[v] = state.next_index;
        state.next_index += 1;
        state.stack.push(v);
        state.on_stack[v] = true;

        for &w in &state.adjacency[v] {
            match state.index[w] {
                None => {
                    visit(state, w);
                    state.low[v] = state.low[v].min(state.low[w]);
                }
                Some(iw) if state.on_stack[w] => state.low[v] = state.low[v].min(iw),
                Some(_) => {}
            }
        }

        if Some(state.low[v]) == state.index[v] {
            let mut component = Vec::new();
            loop {
                let w = state.stack.pop().expect("tarjan stack underflow");
                state.on_stack[w] = false;
                component.push(w);
                if w == v {
                    break;
                }
            }
            component.sort_unstable();
            state.out.push(component);
        }
    }

    let n = adjacency.len();
    let mut state = State {
        adjacency,
        next_index: 0,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        out: Vec::new(),
    };
    for v in 0..n {
        if state.index[v].is_none() {
            visit(&mut state, v);
        }
    }
    state.out
}

/// The component structure of a graph: the components (ids ordered by
/// smallest member), the component of each vertex, and the reflexive,
/// transitive relation `C ≤ D` meaning some path has range in `C` and
/// source in `D` ("`D` talks to `C`").
#[derive(Debug, Clone)]
pub struct Condensation {
    components: Vec<Component>,
    component_of: Vec<usize>,
    below: Vec<Vec<bool>>,
}

impl Condensation {
    pub fn new(graph: &DirectedGraph) -> Self {
        let n = graph.vertex_count();
        let adjacency: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..n).filter(|&w| graph.entry(v, w) > 0).collect())
            .collect();
        let mut parts = tarjan(&adjacency);
        parts.sort_by_key(|c| c[0]);

        let matrix = graph.real_matrix();
        let mut component_of = vec![0; n];
        let components: Vec<Component> = parts
            .into_iter()
            .enumerate()
            .map(|(id, members)| {
                for &v in &members {
                    component_of[v] = id;
                }
                let trivial = members.len() == 1 && graph.entry(members[0], members[0]) == 0;
                if trivial {
                    return Component {
                        id,
                        members,
                        trivial,
                        spectral_radius: 0.0,
                        period: None,
                        perron_vector: None,
                    };
                }
                let block = matrix.select_rows(&members).select_columns(&members);
                let data = spectral::spectral_data(&block)
                    .expect("a nontrivial strongly connected block is irreducible");
                Component {
                    id,
                    members,
                    trivial,
                    spectral_radius: data.radius,
                    period: Some(data.period),
                    perron_vector: Some(data.perron_vector),
                }
            })
            .collect();

        // below[c][d]: walk edges from source to range starting inside d.
        let k = components.len();
        let mut below = vec![vec![false; k]; k];
        for (d, comp) in components.iter().enumerate() {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = comp.members.clone();
            for &v in &stack {
                seen[v] = true;
            }
            while let Some(s) = stack.pop() {
                below[component_of[s]][d] = true;
                for r in 0..n {
                    if graph.entry(r, s) > 0 && !seen[r] {
                        seen[r] = true;
                        stack.push(r);
                    }
                }
            }
        }

        Self { components, component_of, below }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: usize) -> &Component {
        &self.components[id]
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// `C ≤ D`: `D` talks to `C`.
    pub fn talks_to(&self, c: usize, d: usize) -> bool {
        self.below[c][d]
    }

    /// A Seneta ordering of the components: permuting the vertices into this
    /// order makes the vertex matrix block upper-triangular.
    ///
    /// Each round first places every trivial component whose lower components
    /// are all placed, then every component that is minimal among those left.
    /// Ties go to the component holding the smallest vertex index.
    pub fn seneta_order(&self) -> Vec<usize> {
        let k = self.components.len();
        let mut placed = vec![false; k];
        let mut order = Vec::with_capacity(k);
        let available = |placed: &[bool], c: usize| {
            !placed[c] && (0..k).all(|p| p == c || !self.below[p][c] || placed[p])
        };
        while order.len() < k {
            // Trivial components one at a time, so chains of them resolve in order.
            while let Some(c) = (0..k).find(|&c| self.components[c].trivial && available(&placed, c)) {
                placed[c] = true;
                order.push(c);
            }
            let minimal: Vec<usize> = (0..k).filter(|&c| available(&placed, c)).collect();
            for &c in &minimal {
                placed[c] = true;
            }
            order.extend(minimal);
        }
        order
    }
}

pub fn strongly_connected_components(graph: &DirectedGraph) -> Vec<Component> {
    Condensation::new(graph).components
}

/// Whether `d` talks to `c`, i.e. `c ≤ d`. Both must be components of `graph`.
pub fn talks_to(graph: &DirectedGraph, c: &Component, d: &Component) -> bool {
    let structure = Condensation::new(graph);
    let find = |x: &Component| structure.component_of(x.members[0]);
    structure.talks_to(find(c), find(d))
}

pub fn seneta_order(graph: &DirectedGraph) -> Vec<Component> {
    let structure = Condensation::new(graph);
    structure
        .seneta_order()
        .into_iter()
        .map(|id| structure.components[id].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn ids(structure: &Condensation, names: &[&[usize]]) -> Vec<usize> {
        names.iter().map(|m| structure.component_of(m[0])).collect()
    }

    #[test]
    fn dumbbell_components_are_both_nontrivial() {
        let g = parse_graph("vertices: v w\nedge v v 2\nedge w w 3\nedge v w\n").unwrap();
        let comps = strongly_connected_components(&g);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| !c.trivial));
        assert_eq!(comps[1].spectral_radius, 3.0);
        assert_eq!(comps[1].perron_vector, Some(vec![1.0]));
    }

    #[test]
    fn two_vertex_component_is_grouped() {
        let g = parse_graph(
            "vertices: v w u\nedge v v 2\nedge w v\nedge w w 2\nedge w u 2\nedge u w 2\n",
        )
        .unwrap();
        let comps = strongly_connected_components(&g);
        let members: Vec<_> = comps.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0], vec![1, 2]]);
        assert!((comps[1].spectral_radius - (1.0 + 5f64.sqrt())).abs() < 1e-12);
        assert_eq!(comps[1].period, Some(1));
    }

    #[test]
    fn acyclic_edge_gives_trivial_components() {
        let g = parse_graph("vertices: a b\nedge a b\n").unwrap();
        let comps = strongly_connected_components(&g);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.trivial && c.spectral_radius == 0.0));
    }

    #[test]
    fn talks_to_follows_edge_from_source_component() {
        let g = parse_graph("vertices: v w\nedge v v 2\nedge w w 3\nedge w v\n").unwrap();
        let comps = strongly_connected_components(&g);
        assert!(talks_to(&g, &comps[0], &comps[1]));
        assert!(!talks_to(&g, &comps[1], &comps[0]));
        assert!(talks_to(&g, &comps[0], &comps[0]));
    }

    #[test]
    fn seneta_order_is_block_upper_triangular() {
        let g = parse_graph("vertices: v w\nedge v v 2\nedge w w 3\nedge w v\n").unwrap();
        let order = seneta_order(&g);
        assert_eq!(order.iter().map(|c| c.members.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1]]);

        // w -> v, so v must precede w even though w is declared first.
        let dag = parse_graph("vertices: w v\nedge w v\n").unwrap();
        let structure = Condensation::new(&dag);
        assert_eq!(structure.seneta_order(), ids(&structure, &[&[1], &[0]]));
    }

    #[test]
    fn trivial_components_not_above_cycles_come_first() {
        // u1 -> v with v looped; t is an isolated trivial vertex, x feeds t.
        let g = parse_graph("vertices: v u1 t x\nedge v v 2\nedge u1 v\nedge x t\n").unwrap();
        let structure = Condensation::new(&g);
        let order = structure.seneta_order();
        // t, x talk to no cycle: listed first (t before x since x -> t).
        assert_eq!(order, ids(&structure, &[&[2], &[3], &[0], &[1]]));
    }
}
