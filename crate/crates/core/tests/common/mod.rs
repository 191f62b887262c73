#![allow(dead_code)]

use std::path::PathBuf;

use graphkms::oracle::eigenvalue_radius;
use graphkms::{parse_graph, DirectedGraph, KmsSystem, StateLabel, StateMeasure};
use nalgebra::DMatrix;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(format!("{name}.graph"))
}

pub fn graph(name: &str) -> DirectedGraph {
    let text = std::fs::read_to_string(data_path(name)).expect("test graph exists");
    parse_graph(&text).expect("test graph parses")
}

pub fn system(name: &str) -> KmsSystem {
    KmsSystem::new(graph(name))
}

pub fn vertex(system: &KmsSystem, name: &str) -> usize {
    system.graph().index_of(name).unwrap_or_else(|| panic!("no vertex {name}"))
}

pub fn component_of(system: &KmsSystem, name: &str) -> usize {
    system.structure().component_of(vertex(system, name))
}

pub fn phi<'a>(states: &'a [StateMeasure], v: usize) -> Option<&'a StateMeasure> {
    states.iter().find(|s| s.label == StateLabel::PhiBetaV { vertex: v })
}

pub fn psi<'a>(states: &'a [StateMeasure], c: usize) -> Option<&'a StateMeasure> {
    states.iter().find(|s| s.label == StateLabel::PsiC { component: c })
}

/// A graph on 1 to `max_vertices` vertices where each ordered pair carries
/// edges with probability `density`, each with multiplicity 1 to `max_mult`.
pub fn random_graph(rng: &mut impl Rng, max_vertices: usize, max_mult: u64, density: f64) -> DirectedGraph {
    let n = rng.gen_range(1..=max_vertices);
    let matrix = DMatrix::from_fn(n, n, |_, _| {
        if rng.gen_bool(density) {
            rng.gen_range(1..=max_mult)
        } else {
            0
        }
    });
    let names = (0..n).map(|i| format!("v{i}")).collect();
    DirectedGraph::from_matrix(names, &matrix).expect("valid matrix")
}

/// Extreme-point count predicted directly from the component radii, using
/// dense eigenvalues and a transitive closure rather than the library's
/// component machinery. `beta` is compared with tolerance `tau`; `exact`
/// names a vertex whose component is compared as exactly equal.
pub struct CountOracle {
    n: usize,
    reach: Vec<Vec<bool>>,
    radius: Vec<f64>,
}

impl CountOracle {
    pub fn new(graph: &DirectedGraph) -> Self {
        let n = graph.vertex_count();
        let mut reach: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| i == j || graph.entry(i, j) > 0).collect()).collect();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let a = DMatrix::from_fn(n, n, |i, j| graph.entry(i, j) as f64);
        let radius = (0..n)
            .map(|v| {
                let piece: Vec<usize> = (0..n).filter(|&u| reach[u][v] && reach[v][u]).collect();
                let block = a.select_rows(&piece).select_columns(&piece);
                eigenvalue_radius(&block).expect("eigenvalues converge")
            })
            .collect();
        Self { n, reach, radius }
    }

    fn same_piece(&self, u: usize, v: usize) -> bool {
        self.reach[u][v] && self.reach[v][u]
    }

    /// Distinct values `ln ρ` over pieces with a cycle.
    pub fn log_radii(&self) -> Vec<f64> {
        let mut out: Vec<f64> =
            self.radius.iter().filter(|&&r| r > 0.5).map(|r| r.ln()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }

    /// `(extremes, critical)` at `beta`.
    pub fn count(&self, beta: f64, exact: Option<usize>, tau: f64) -> (usize, bool) {
        let n = self.n;
        // -1 less, 0 equal, 1 greater
        let class: Vec<i32> = (0..n)
            .map(|v| {
                if self.radius[v] < 0.5 {
                    return -1;
                }
                if let Some(e) = exact {
                    if self.same_piece(v, e) {
                        return 0;
                    }
                }
                let d = self.radius[v].ln() - beta;
                if d > tau {
                    1
                } else if d >= -tau {
                    0
                } else {
                    -1
                }
            })
            .collect();
        let closure = |seed: &dyn Fn(usize) -> bool| -> Vec<bool> {
            (0..n).map(|w| (0..n).any(|u| seed(u) && self.reach[u][w])).collect()
        };
        let h = closure(&|u| class[u] == 1);
        if h.iter().all(|&x| x) {
            return (0, false);
        }
        let critical: Vec<usize> = (0..n).filter(|&u| class[u] == 0 && !h[u]).collect();
        if critical.is_empty() {
            return (h.iter().filter(|&&x| !x).count(), false);
        }
        let k = closure(&|u| class[u] >= 0);
        // Minimal pieces: no critical u outside the piece with a path from the piece into u.
        let mut minimal_pieces: Vec<usize> = Vec::new();
        for &c in &critical {
            let minimal = !critical.iter().any(|&u| !self.same_piece(u, c) && self.reach[u][c]);
            if minimal && !minimal_pieces.iter().any(|&p| self.same_piece(p, c)) {
                minimal_pieces.push(c);
            }
        }
        (minimal_pieces.len() + k.iter().filter(|&&x| !x).count(), true)
    }
}
