//! Finite directed multigraphs, their vertex matrices, and vertex-set closures.
//!
//! Edges follow the range/source convention used throughout the crate: an
//! edge `e` with source `s(e)` and range `r(e)` contributes to the vertex
//! matrix entry `A(r(e), s(e))`. Paths compose like morphisms, so `ef` is a
//! path when `s(e) = r(f)`, and `A^n(v, w)` counts the paths of length `n`
//! with range `v` and source `w`.
//!
//! A set `H` is *hereditary* when `v ∈ H` and a path with range `v` and
//! source `w` force `w ∈ H`; closing a set under this rule walks edges from
//! range to source.

mod components;
mod parse;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use thiserror::Error;

pub use components::{
    seneta_order, strongly_connected_components, talks_to, Component, Condensation,
};
pub(crate) use components::tarjan;
pub use parse::{parse_graph, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("vertex `{0}` is declared twice")]
    DuplicateVertex(String),
    #[error("edge {edge} refers to vertex index {vertex}, but the graph has {count} vertices")]
    VertexOutOfRange { edge: usize, vertex: usize, count: usize },
    #[error("edge {0} has multiplicity zero")]
    ZeroMultiplicity(usize),
    #[error("the vertex set is not hereditary")]
    NotHereditary,
    #[error("cannot form a quotient by the full vertex set")]
    QuotientByEverything,
    #[error("edge {edge} copy {copy} does not exist")]
    NoSuchEdge { edge: usize, copy: u32 },
    #[error("an edge path needs at least one edge")]
    EmptyPath,
    #[error("edges {0} and {1} do not compose: the source of the first is not the range of the second")]
    BrokenPath(usize, usize),
}

/// A block of parallel edges sharing a source and a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: usize,
    pub range: usize,
    pub multiplicity: u32,
}

/// A finite directed multigraph with named vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    matrix: DMatrix<u64>,
}

impl DirectedGraph {
    pub fn new(names: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if names.is_empty() {
            return Err(GraphError::NoVertices);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        let n = names.len();
        let mut matrix = DMatrix::<u64>::zeros(n, n);
        for (i, e) in edges.iter().enumerate() {
            for vertex in [e.source, e.range] {
                if vertex >= n {
                    return Err(GraphError::VertexOutOfRange { edge: i, vertex, count: n });
                }
            }
            if e.multiplicity == 0 {
                return Err(GraphError::ZeroMultiplicity(i));
            }
            matrix[(e.range, e.source)] += u64::from(e.multiplicity);
        }
        Ok(Self { names, edges, matrix })
    }

    /// Builds the graph whose vertex matrix is `matrix`, one edge block per
    /// nonzero entry.
    pub fn from_matrix(names: Vec<String>, matrix: &DMatrix<u64>) -> Result<Self, GraphError> {
        assert!(matrix.is_square(), "vertex matrix must be square");
        assert_eq!(names.len(), matrix.nrows(), "one name per matrix row");
        let n = matrix.nrows();
        let mut edges = Vec::new();
        for source in 0..n {
            for range in 0..n {
                let count = matrix[(range, source)];
                if count > 0 {
                    let multiplicity = u32::try_from(count).expect("multiplicity fits in u32");
                    edges.push(Edge { source, range, multiplicity });
                }
            }
        }
        Self::new(names, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The vertex matrix, `A(v, w)` = number of edges with range `v` and source `w`.
    pub fn matrix(&self) -> &DMatrix<u64> {
        &self.matrix
    }

    pub fn real_matrix(&self) -> DMatrix<f64> {
        self.matrix.map(|x| x as f64)
    }

    pub fn entry(&self, range: usize, source: usize) -> u64 {
        self.matrix[(range, source)]
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::new(self, 0..self.vertex_count())
    }

    /// `A^n(v, w)`, the number of paths of length `n` with range `v` and
    /// source `w`. Saturates at `u128::MAX`.
    pub fn path_count(&self, v: usize, w: usize, n: usize) -> u128 {
        let size = self.vertex_count();
        let mut counts = vec![0u128; size];
        counts[w] = 1;
        for _ in 0..n {
            let mut next = vec![0u128; size];
            for (r, slot) in next.iter_mut().enumerate() {
                for (s, &c) in counts.iter().enumerate() {
                    let a = u128::from(self.matrix[(r, s)]);
                    if a != 0 && c != 0 {
                        *slot = slot.saturating_add(a.saturating_mul(c));
                    }
                }
            }
            counts = next;
        }
        counts[v]
    }

    /// Smallest hereditary set containing `seeds`.
    pub fn hereditary_closure(&self, seeds: impl IntoIterator<Item = usize>) -> VertexSet {
        let n = self.vertex_count();
        let mut inside = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for v in seeds {
            if !inside[v] {
                inside[v] = true;
                stack.push(v);
            }
        }
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if self.matrix[(v, w)] > 0 && !inside[w] {
                    inside[w] = true;
                    stack.push(w);
                }
            }
        }
        VertexSet::new(self, (0..n).filter(|&v| inside[v]))
    }

    pub fn is_hereditary(&self, set: &BTreeSet<usize>) -> bool {
        set.iter()
            .all(|&v| (0..self.vertex_count()).all(|w| self.matrix[(v, w)] == 0 || set.contains(&w)))
    }

    /// Saturated in the regular-vertex sense: a vertex receiving at least one
    /// edge, all of whose incoming edges have sources in the set, belongs to
    /// the set. Sources are never forced in.
    pub fn is_saturated(&self, set: &BTreeSet<usize>) -> bool {
        (0..self.vertex_count()).all(|v| set.contains(&v) || !self.forced_into(v, set))
    }

    fn forced_into(&self, v: usize, set: &BTreeSet<usize>) -> bool {
        let mut receives = false;
        for w in 0..self.vertex_count() {
            if self.matrix[(v, w)] > 0 {
                receives = true;
                if !set.contains(&w) {
                    return false;
                }
            }
        }
        receives
    }

    /// The saturation `ΣH = ⋃ S_k H`, where `S_{k+1} H` adds every vertex
    /// that receives an edge and whose incoming edges all come from `S_k H`.
    pub fn saturation(&self, h: &VertexSet) -> Result<VertexSet, GraphError> {
        if !h.is_hereditary() {
            return Err(GraphError::NotHereditary);
        }
        let mut current = h.members().clone();
        loop {
            let added: Vec<usize> = (0..self.vertex_count())
                .filter(|v| !current.contains(v) && self.forced_into(*v, &current))
                .collect();
            if added.is_empty() {
                break;
            }
            current.extend(added);
        }
        Ok(VertexSet::new(self, current))
    }

    /// The graph `E \ H` on the complement of a hereditary set, keeping the
    /// edges whose source lies outside `H`.
    pub fn quotient(&self, h: &VertexSet) -> Result<QuotientGraph, GraphError> {
        if !h.is_hereditary() {
            return Err(GraphError::NotHereditary);
        }
        if h.len() == self.vertex_count() {
            return Err(GraphError::QuotientByEverything);
        }
        let kept: Vec<usize> = (0..self.vertex_count()).filter(|v| !h.contains(*v)).collect();
        let mut position = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in kept.iter().enumerate() {
            position[v] = i;
        }
        let names = kept.iter().map(|&v| self.names[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| !h.contains(e.source))
            .map(|e| Edge {
                source: position[e.source],
                range: position[e.range],
                multiplicity: e.multiplicity,
            })
            .collect();
        let graph = DirectedGraph::new(names, edges)?;
        Ok(QuotientGraph { graph, original: kept })
    }

    /// Vertices that receive no edges.
    pub fn sources(&self) -> BTreeSet<usize> {
        (0..self.vertex_count())
            .filter(|&v| (0..self.vertex_count()).all(|w| self.matrix[(v, w)] == 0))
            .collect()
    }

    /// Serializes the graph in the line format accepted by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let mut out = format!("vertices: {}\n", self.names.join(" "));
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                self.names[e.source], self.names[e.range], e.multiplicity
            ));
        }
        out
    }
}

impl std::str::FromStr for DirectedGraph {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

/// `E \ H` together with the original index of each of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub graph: DirectedGraph,
    pub original: Vec<usize>,
}

/// A set of vertices of a particular graph, with its hereditary and
/// saturated flags computed against that graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    members: BTreeSet<usize>,
    hereditary: bool,
    saturated: bool,
}

impl VertexSet {
    pub fn new(graph: &DirectedGraph, members: impl IntoIterator<Item = usize>) -> Self {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&last) = members.last() {
            assert!(last < graph.vertex_count(), "vertex {last} out of range");
        }
        let hereditary = graph.is_hereditary(&members);
        let saturated = graph.is_saturated(&members);
        Self { members, hereditary, saturated }
    }

    pub fn empty(graph: &DirectedGraph) -> Self {
        Self::new(graph, std::iter::empty())
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_hereditary(&self) -> bool {
        self.hereditary
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn names<'g>(&self, graph: &'g DirectedGraph) -> Vec<&'g str> {
        self.iter().map(|v| graph.name(v)).collect()
    }
}

/// One of the parallel edges in an [`Edge`] block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub edge: usize,
    pub copy: u32,
}

/// A finite path `μ = μ_1 μ_2 ⋯ μ_n` with `s(μ_i) = r(μ_{i+1})`; a path of
/// length zero is a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    range: usize,
    source: usize,
    edges: Vec<EdgeRef>,
}

impl Path {
    pub fn vertex(v: usize) -> Self {
        Self { range: v, source: v, edges: Vec::new() }
    }

    pub fn new(graph: &DirectedGraph, edges: Vec<EdgeRef>) -> Result<Self, GraphError> {
        let lookup = |r: &EdgeRef| -> Result<Edge, GraphError> {
            graph
                .edges()
                .get(r.edge)
                .filter(|e| r.copy < e.multiplicity)
                .copied()
                .ok_or(GraphError::NoSuchEdge { edge: r.edge, copy: r.copy })
        };
        let first = edges.first().ok_or(GraphError::EmptyPath)?;
        let mut prev = lookup(first)?;
        let range = prev.range;
        for pair in edges.windows(2) {
            let next = lookup(&pair[1])?;
            if prev.source != next.range {
                return Err(GraphError::BrokenPath(pair[0].edge, pair[1].edge));
            }
            prev = next;
        }
        Ok(Self { range, source: prev.source, edges })
    }

    /// Appends an edge `e` with `r(e) = s(self)`.
    pub fn extend(&self, graph: &DirectedGraph, e: EdgeRef) -> Result<Self, GraphError> {
        let mut edges = self.edges.clone();
        edges.push(e);
        let extended = Path::new(graph, edges)?;
        if !self.edges.is_empty() || extended.range == self.range {
            Ok(extended)
        } else {
            Err(GraphError::BrokenPath(usize::MAX, e.edge))
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reversed_dumbbell() -> DirectedGraph {
        parse_graph(
            "vertices: v w\n\
             edge v v 2\n\
             edge w w 3\n\
             edge w v\n",
        )
        .unwrap()
    }

    fn sourced_chain() -> DirectedGraph {
        parse_graph(
            "vertices: u1 v u2 w\n\
             edge v v 2\nedge w w 3\n\
             edge w u2\nedge u2 v\nedge u1 v\n",
        )
        .unwrap()
    }

    #[test]
    fn matrix_uses_range_source_convention() {
        let g = reversed_dumbbell();
        assert_eq!(g.matrix(), &DMatrix::from_row_slice(2, 2, &[2, 1, 0, 3]));
    }

    #[test]
    fn path_counts() {
        let g = reversed_dumbbell();
        assert_eq!(g.path_count(0, 1, 2), 5);
        assert_eq!(g.path_count(1, 0, 1), 0);
        assert_eq!(g.path_count(1, 1, 0), 1);
        assert_eq!(g.path_count(0, 1, 0), 0);
    }

    #[test]
    fn closures_on_dumbbells() {
        let g = reversed_dumbbell();
        assert_eq!(g.hereditary_closure([1]).members(), &BTreeSet::from([1]));
        assert!(g.hereditary_closure([]).is_empty());
        let forward = parse_graph("vertices: v w\nedge v v 2\nedge w w 3\nedge v w\n").unwrap();
        assert_eq!(forward.hereditary_closure([1]).len(), 2);
    }

    #[test]
    fn saturation_absorbs_chain_but_not_sources() {
        let g = sourced_chain();
        let w = g.hereditary_closure([3]);
        let sat = g.saturation(&w).unwrap();
        assert_eq!(sat.names(&g), vec!["u2", "w"]);
        assert!(sat.is_hereditary() && sat.is_saturated());
        assert_eq!(g.saturation(&sat).unwrap(), sat);
        assert_eq!(g.sources(), BTreeSet::from([0]));
    }

    #[test]
    fn saturation_rejects_non_hereditary() {
        let g = reversed_dumbbell();
        let v = VertexSet::new(&g, [0]);
        assert_eq!(g.saturation(&v), Err(GraphError::NotHereditary));
    }

    #[test]
    fn quotient_drops_hereditary_part() {
        let g = reversed_dumbbell();
        let q = g.quotient(&VertexSet::new(&g, [1])).unwrap();
        assert_eq!(q.graph.names(), &["v".to_string()]);
        assert_eq!(q.graph.matrix()[(0, 0)], 2);
        assert_eq!(q.original, vec![0]);
        assert_eq!(g.quotient(&VertexSet::empty(&g)).unwrap().graph, g);
        assert_eq!(g.quotient(&g.all_vertices()), Err(GraphError::QuotientByEverything));
        assert_eq!(g.quotient(&VertexSet::new(&g, [0])), Err(GraphError::NotHereditary));
    }

    #[test]
    fn looped_graph_has_no_sources() {
        let g = reversed_dumbbell();
        assert!(g.sources().is_empty());
    }

    #[test]
    fn paths_validate_composition() {
        let g = reversed_dumbbell();
        // edges: 0 = v loops, 1 = w loops, 2 = w -> v
        let p = Path::new(&g, vec![EdgeRef { edge: 2, copy: 0 }, EdgeRef { edge: 1, copy: 2 }]).unwrap();
        assert_eq!((p.range(), p.source(), p.len()), (0, 1, 2));
        assert!(Path::new(&g, vec![EdgeRef { edge: 1, copy: 0 }, EdgeRef { edge: 2, copy: 0 }]).is_err());
        assert!(Path::new(&g, vec![EdgeRef { edge: 1, copy: 3 }]).is_err());
        let ext = Path::vertex(0).extend(&g, EdgeRef { edge: 2, copy: 0 }).unwrap();
        assert_eq!(ext.source(), 1);
        assert!(Path::vertex(1).extend(&g, EdgeRef { edge: 2, copy: 0 }).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(DirectedGraph::new(vec![], vec![]), Err(GraphError::NoVertices));
        let names = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(DirectedGraph::new(names, vec![]), Err(GraphError::DuplicateVertex(_))));
        let one = vec!["a".to_string()];
        let bad = Edge { source: 0, range: 1, multiplicity: 1 };
        assert!(matches!(DirectedGraph::new(one.clone(), vec![bad]), Err(GraphError::VertexOutOfRange { .. })));
        let zero = Edge { source: 0, range: 0, multiplicity: 0 };
        assert_eq!(DirectedGraph::new(one, vec![zero]), Err(GraphError::ZeroMultiplicity(0)));
    }
}
