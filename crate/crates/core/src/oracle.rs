//! Brute-force cross-checks for the closed forms used elsewhere in the crate.
//!
//! Nothing here calls into [`crate::spectral`] or the component machinery:
//! radii come from dense eigenvalues, reachability from a transitive closure,
//! and every infinite sum is summed term by term over paths.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, EdgeRef, Path};
use crate::kms::{eval_state, KmsSystem, SimplexDescriptor, StateLabel, StateMeasure};

/// Longest path length [`enumerate_paths`] will list.
pub const MAX_ENUMERATION_LENGTH: usize = 12;
/// Required gap, on the log scale, between `β` and the divergence threshold.
pub const CONVERGENCE_MARGIN: f64 = 0.05;
const TERM_CAP: usize = 1_000_000;

/// Tolerance used by [`verify_simplex`] for every equality check.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("path length {0} exceeds the enumeration guard of {MAX_ENUMERATION_LENGTH}")]
    TooLong(usize),
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("beta {beta} is within {CONVERGENCE_MARGIN} of the divergence threshold {threshold}")]
    NearDivergence { beta: f64, threshold: f64 },
    #[error("vertex set is not a strongly connected component with a cycle")]
    NotACycleComponent,
    #[error("component is not minimal critical")]
    NotMinimalCritical,
    #[error("vertex {0} lies in the hereditary closure of the minimal critical components")]
    InsideClosure(usize),
    #[error("eigenvalue computation did not converge")]
    NoConvergence,
    #[error("series did not settle within {TERM_CAP} terms")]
    TooManyTerms,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnumeration {
    pub paths: Vec<Path>,
    pub length_bound: usize,
    /// Bound on the series mass of omitted paths; zero for an exhaustive list.
    pub tail_bound: f64,
}

/// Every path with range `v`, source `w` and length `n`, parallel edges distinct.
pub fn enumerate_paths(graph: &DirectedGraph, v: usize, w: usize, n: usize) -> Result<PathEnumeration, OracleError> {
    if n > MAX_ENUMERATION_LENGTH {
        return Err(OracleError::TooLong(n));
    }
    for x in [v, w] {
        if x >= graph.vertex_count() {
            return Err(OracleError::NoSuchVertex(x));
        }
    }
    let mut paths = Vec::new();
    let mut stack = Vec::new();
    extend_backwards(graph, v, w, n, &mut stack, &mut paths);
    Ok(PathEnumeration { paths, length_bound: n, tail_bound: 0.0 })
}

fn extend_backwards(
    graph: &DirectedGraph,
    at: usize,
    target: usize,
    remaining: usize,
    stack: &mut Vec<EdgeRef>,
    out: &mut Vec<Path>,
) {
    if remaining == 0 {
        if at == target {
            let path = if stack.is_empty() {
                Path::vertex(at)
            } else {
                Path::new(graph, stack.clone()).expect("edges chained by construction")
            };
            out.push(path);
        }
        return;
    }
    for (index, edge) in graph.edges().iter().enumerate() {
        if edge.range != at {
            continue;
        }
        for copy in 0..edge.multiplicity {
            stack.push(EdgeRef { edge: index, copy });
            extend_backwards(graph, edge.source, target, remaining - 1, stack, out);
            stack.pop();
        }
    }
}

fn matrix(graph: &DirectedGraph) -> DMatrix<f64> {
    DMatrix::from_fn(graph.vertex_count(), graph.vertex_count(), |i, j| graph.entry(i, j) as f64)
}

/// `reach[(u, w)]`: some path (possibly empty) has range `u` and source `w`.
fn reachability(graph: &DirectedGraph) -> DMatrix<bool> {
    let n = graph.vertex_count();
    let mut reach = DMatrix::from_fn(n, n, |i, j| i == j || graph.entry(i, j) > 0);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[(i, k)] && reach[(k, j)] {
                    reach[(i, j)] = true;
                }
            }
        }
    }
    reach
}

/// Eigenvalues of a dense matrix from its real Schur form. Francis iteration
/// can stall when every eigenvalue has the same modulus (a cyclic permutation,
/// say), so the matrix is shifted by a multiple of the identity,
/// which separates the moduli, and the shift is subtracted afterwards;
/// other shifts are tried if one fails.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, OracleError> {
    let n = m.nrows();
    for shift in [1.0, -1.7, 2.9, 0.0] {
        let shifted = m + DMatrix::identity(n, n) * shift;
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 1_000) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| z - shift).collect());
        }
    }
    Err(OracleError::NoConvergence)
}

/// Largest eigenvalue modulus of a dense matrix.
pub fn eigenvalue_radius(m: &DMatrix<f64>) -> Result<f64, OracleError> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(dense_eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `ρ(A)` as the largest dense eigenvalue modulus over the strongly connected
/// pieces found by boolean reachability. Schur on the whole matrix loses
/// accuracy to about `√ε` at defective eigenvalues (nilpotent parts, chained
/// pieces of equal radius); the Perron root of each piece is simple.
pub fn dense_spectral_radius(graph: &DirectedGraph) -> Result<f64, OracleError> {
    Ok(piece_radii(graph, &reachability(graph))?.into_iter().fold(0.0, f64::max))
}

/// Radius of the strongly connected piece of `graph` around each vertex.
fn piece_radii(graph: &DirectedGraph, reach: &DMatrix<bool>) -> Result<Vec<f64>, OracleError> {
    let a = matrix(graph);
    (0..graph.vertex_count())
        .map(|v| {
            let piece: Vec<usize> =
                (0..graph.vertex_count()).filter(|&u| reach[(u, v)] && reach[(v, u)]).collect();
            eigenvalue_radius(&a.select_rows(&piece).select_columns(&piece))
        })
        .collect()
}

/// Sums `Σ_n t_n` for `t_{n+1} = T t_n` with `T ≥ 0`, stopping once the tail is
/// below `tol`. When the largest column sum `q` of `T` is below 1 the tail is
/// at most `‖t_N‖₁ q/(1-q)`; otherwise the same bound is applied with
/// `q` halfway between `ρ(T)` and 1 once successive terms shrink by that factor.
fn nonnegative_series(t: &DMatrix<f64>, start: DVector<f64>, tol: f64) -> Result<DVector<f64>, OracleError> {
    let column_max = (0..t.ncols()).map(|j| t.column(j).sum()).fold(0.0, f64::max);
    let (q, rigorous) = if column_max < 1.0 {
        (column_max, true)
    } else {
        ((eigenvalue_radius(t)? + 1.0) / 2.0, false)
    };
    let mut sum = start.clone();
    let mut term = start;
    let mut previous = term.sum();
    for _ in 0..TERM_CAP {
        term = t * term;
        sum += &term;
        let size = term.sum();
        let shrinking = rigorous || size <= q * previous;
        if shrinking && size * q / (1.0 - q) < tol {
            return Ok(sum);
        }
        previous = size;
    }
    Err(OracleError::TooManyTerms)
}

/// `Σ_{μ ∈ E*v} e^{-β|μ|}` summed over path lengths, with the number of
/// paths of each length counted by range vertex.
pub fn series_y_oracle(graph: &DirectedGraph, beta: f64, v: usize, tol: f64) -> Result<f64, OracleError> {
    Ok(path_series_from(graph, beta, v, tol)?.sum())
}

/// `Σ_{λ ∈ wE*v} e^{-β|λ|}` for every range `w`.
fn path_series_from(graph: &DirectedGraph, beta: f64, v: usize, tol: f64) -> Result<DVector<f64>, OracleError> {
    let n = graph.vertex_count();
    if v >= n {
        return Err(OracleError::NoSuchVertex(v));
    }
    let reach = reachability(graph);
    let radii = piece_radii(graph, &reach)?;
    let threshold = (0..n)
        .filter(|&u| reach[(u, v)] && radii[u] > 0.0)
        .map(|u| radii[u].ln())
        .fold(f64::NEG_INFINITY, f64::max);
    if beta <= threshold + CONVERGENCE_MARGIN {
        return Err(OracleError::NearDivergence { beta, threshold });
    }
    // Restrict to vertices reachable from v so unrelated cycles do not matter.
    let kept: Vec<usize> = (0..n).filter(|&u| reach[(u, v)]).collect();
    let t = matrix(graph).select_rows(&kept).select_columns(&kept) * (-beta).exp();
    let mut start = DVector::zeros(kept.len());
    start[kept.iter().position(|&u| u == v).expect("v reaches itself")] = 1.0;
    let partial = nonnegative_series(&t, start, tol)?;
    let mut out = DVector::zeros(n);
    for (i, &u) in kept.iter().enumerate() {
        out[u] = partial[i];
    }
    Ok(out)
}

/// The minimal-critical data of `component` in `graph`: its radius, Perron
/// vector, and the complement `L` of the hereditary closure of every
/// component attaining the top radius.
struct CriticalData {
    rho: f64,
    perron: DVector<f64>,
    outside: Vec<usize>,
}

fn critical_data(graph: &DirectedGraph, component: &[usize]) -> Result<CriticalData, OracleError> {
    let n = graph.vertex_count();
    let reach = reachability(graph);
    let first = *component.first().ok_or(OracleError::NotACycleComponent)?;
    let piece: Vec<usize> = (0..n).filter(|&u| reach[(u, first)] && reach[(first, u)]).collect();
    if piece != component {
        return Err(OracleError::NotACycleComponent);
    }
    let radii = piece_radii(graph, &reach)?;
    let rho = radii[first];
    if rho == 0.0 {
        return Err(OracleError::NotACycleComponent);
    }
    let top = radii.iter().copied().fold(0.0, f64::max);
    let critical = |u: usize| radii[u] > 0.0 && (radii[u] / top).ln().abs() <= crate::TAU;
    if !critical(first) {
        return Err(OracleError::NotMinimalCritical);
    }
    // Minimal: no other critical vertex u with a path from first's side into u.
    if (0..n).any(|u| critical(u) && !piece.contains(&u) && reach[(u, first)]) {
        return Err(OracleError::NotMinimalCritical);
    }
    let outside: Vec<usize> = (0..n).filter(|&w| !(0..n).any(|u| critical(u) && reach[(u, w)])).collect();

    // Perron vector: null vector of A_C - ρI from the SVD.
    let a_c = matrix(graph).select_rows(component).select_columns(component);
    let shifted = &a_c - DMatrix::identity(component.len(), component.len()) * rho;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(OracleError::NoConvergence)?;
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("component is non-empty");
    let mut perron: DVector<f64> = v_t.row(smallest).transpose();
    if perron.sum() < 0.0 {
        perron = -perron;
    }
    perron /= perron.sum();
    Ok(CriticalData { rho, perron, outside })
}

/// `z^C_v = Σ_{λ ∈ v QE(C)} ρ^{-|λ|} x^C_{s(λ)}`, summed over quick-exit paths:
/// a first edge leaving `C` into `L`, then any path inside `L`.
pub fn quick_exit_series_oracle(
    graph: &DirectedGraph,
    component: &[usize],
    v: usize,
    tol: f64,
) -> Result<f64, OracleError> {
    if v >= graph.vertex_count() {
        return Err(OracleError::NoSuchVertex(v));
    }
    let data = critical_data(graph, component)?;
    let Some(pos) = data.outside.iter().position(|&u| u == v) else {
        return Err(OracleError::InsideClosure(v));
    };
    Ok(quick_exit_vector(graph, component, &data, tol)?[pos])
}

fn quick_exit_vector(
    graph: &DirectedGraph,
    component: &[usize],
    data: &CriticalData,
    tol: f64,
) -> Result<DVector<f64>, OracleError> {
    let a = matrix(graph);
    let l = &data.outside;
    if l.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let a_l = a.select_rows(l).select_columns(l);
    let inner = eigenvalue_radius(&a_l)?;
    if inner > 0.0 && data.rho.ln() - inner.ln() < CONVERGENCE_MARGIN {
        return Err(OracleError::NearDivergence { beta: data.rho.ln(), threshold: inner.ln() });
    }
    // Paths of length one: the exit edge, weighted by x^C at its source.
    let first = a.select_rows(l).select_columns(component) * &data.perron / data.rho;
    nonnegative_series(&(a_l / data.rho), first, tol)
}

/// `(A m)_v ≤ e^β m_v + 1e-9` for every vertex.
pub fn subinvariance_check(graph: &DirectedGraph, beta: f64, m: &[f64]) -> bool {
    subinvariance_excess(graph, beta, m) <= CHECK_TOLERANCE
}

fn subinvariance_excess(graph: &DirectedGraph, beta: f64, m: &[f64]) -> f64 {
    let am = matrix(graph) * DVector::from_column_slice(m);
    am.iter()
        .zip(m)
        .map(|(lhs, rhs)| lhs - beta.exp() * rhs)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    /// Index into the simplex's extremes.
    pub state: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub results: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| !matches!(r.outcome, Outcome::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| matches!(r.outcome, Outcome::Fail(_)))
    }

    fn record(&mut self, state: usize, check: &str, outcome: Outcome) {
        self.results.push(CheckResult { check: check.to_owned(), state, outcome });
    }

    fn bound(&mut self, state: usize, check: &str, error: f64) {
        let outcome = if error <= CHECK_TOLERANCE {
            Outcome::Pass
        } else {
            Outcome::Fail(format!("error {error:.3e} exceeds {CHECK_TOLERANCE:e}"))
        };
        self.record(state, check, outcome);
    }
}

/// Longest path used when checking that path-measure atoms vanish.
const ATOM_PATH_LENGTH: usize = 2;
const SERIES_TOLERANCE: f64 = 1e-12;

/// Runs every applicable check against each extreme state of `simplex`.
pub fn verify_simplex(system: &KmsSystem, simplex: &SimplexDescriptor) -> VerificationReport {
    let graph = system.graph();
    let mut report = VerificationReport::default();
    for (i, state) in simplex.extremes.iter().enumerate() {
        let m = &state.m;
        report.bound(i, "normalization", (m.iter().sum::<f64>() - 1.0).abs());
        report.bound(i, "nonnegativity", m.iter().map(|x| -x).fold(0.0, f64::max));
        report.bound(i, "subinvariance", subinvariance_excess(graph, state.beta_value, m).max(0.0));
        report.bound(i, "vanishing on H_beta", simplex.h_beta.iter().map(|v| m[v].abs()).fold(0.0, f64::max));
        match state.label {
            StateLabel::PsiC { component } => {
                report.bound(i, "eigen-identity", eigen_residual(graph, state));
                report.bound(i, "path-measure atoms", atom_error(graph, state));
                let outcome = psi_against_quick_exit(system, simplex, component, m);
                report.record(i, "quick-exit series", outcome);
            }
            StateLabel::PhiBetaV { vertex } => {
                let outcome = match path_series_from(graph, state.beta_value, vertex, SERIES_TOLERANCE) {
                    Ok(series) => {
                        let total = series.sum();
                        let error = series.iter().zip(m).map(|(s, x)| (s / total - x).abs()).fold(0.0, f64::max);
                        if error <= CHECK_TOLERANCE {
                            Outcome::Pass
                        } else {
                            Outcome::Fail(format!("error {error:.3e} exceeds {CHECK_TOLERANCE:e}"))
                        }
                    }
                    Err(e) => Outcome::Skipped(e.to_string()),
                };
                report.record(i, "path series", outcome);
            }
            StateLabel::Mixture { .. } => {}
        }
    }
    report
}

fn eigen_residual(graph: &DirectedGraph, state: &StateMeasure) -> f64 {
    let m = DVector::from_column_slice(&state.m);
    (matrix(graph) * &m - m * state.beta_value.exp()).amax()
}

/// `max |ν({λ})|` over paths `λ` of length at most [`ATOM_PATH_LENGTH`] whose
/// source receives an edge, where `ν({λ}) = φ(s_λ s_λ*) - Σ_{r(e)=s(λ)} φ(s_{λe} s_{λe}*)`.
fn atom_error(graph: &DirectedGraph, state: &StateMeasure) -> f64 {
    let n = graph.vertex_count();
    let mut worst: f64 = 0.0;
    for len in 0..=ATOM_PATH_LENGTH {
        for range in 0..n {
            for source in 0..n {
                let paths = enumerate_paths(graph, range, source, len).expect("short paths");
                for lambda in paths.paths {
                    let incoming: Vec<EdgeRef> = graph
                        .edges()
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| e.range == source)
                        .flat_map(|(index, e)| (0..e.multiplicity).map(move |copy| EdgeRef { edge: index, copy }))
                        .collect();
                    if incoming.is_empty() {
                        continue;
                    }
                    let whole = eval_state(state, &lambda, &lambda).expect("valid path");
                    let pieces: f64 = incoming
                        .into_iter()
                        .map(|e| {
                            let longer = if lambda.is_empty() {
                                Path::new(graph, vec![e]).expect("single edge")
                            } else {
                                lambda.extend(graph, e).expect("edge enters the source")
                            };
                            eval_state(state, &longer, &longer).expect("valid path")
                        })
                        .sum();
                    worst = worst.max((whole - pieces).abs());
                }
            }
        }
    }
    worst
}

/// Rebuilds `ψ_C` in `E \ H_β` from the quick-exit series and compares.
fn psi_against_quick_exit(system: &KmsSystem, simplex: &SimplexDescriptor, component: usize, m: &[f64]) -> Outcome {
    let graph = system.graph();
    let quotient = match graph.quotient(&simplex.h_beta) {
        Ok(q) => q,
        Err(e) => return Outcome::Skipped(e.to_string()),
    };
    let local = |v: usize| quotient.original.iter().position(|&u| u == v);
    let members: Vec<usize> = system
        .structure()
        .component(component)
        .members
        .iter()
        .filter_map(|&v| local(v))
        .collect();
    let data = match critical_data(&quotient.graph, &members) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let z = match quick_exit_vector(&quotient.graph, &members, &data, SERIES_TOLERANCE) {
        Ok(z) => z,
        Err(e) => return Outcome::Skipped(e.to_string()),
    };
    let scale = 1.0 + z.sum();
    let mut expected = vec![0.0; graph.vertex_count()];
    for (k, &w) in data.outside.iter().enumerate() {
        expected[quotient.original[w]] = z[k] / scale;
    }
    for (k, &w) in members.iter().enumerate() {
        expected[quotient.original[w]] = data.perron[k] / scale;
    }
    let error = expected.iter().zip(m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if error <= CHECK_TOLERANCE {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("error {error:.3e} exceeds {CHECK_TOLERANCE:e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::kms::BetaSpec;

    const REVERSED: &str = "vertices: v w\nedge v v 2\nedge w w 3\nedge w v\n";

    #[test]
    fn enumeration_examples() {
        let g = parse_graph(REVERSED).unwrap();
        assert_eq!(enumerate_paths(&g, 0, 1, 1).unwrap().paths.len(), 1);
        let empty = enumerate_paths(&g, 1, 1, 0).unwrap();
        assert_eq!(empty.paths, vec![Path::vertex(1)]);
        for n in 0..5 {
            assert!(enumerate_paths(&g, 1, 0, n).unwrap().paths.is_empty());
            assert_eq!(enumerate_paths(&g, 0, 0, n).unwrap().paths.len() as u128, g.path_count(0, 0, n));
        }
        assert_eq!(enumerate_paths(&g, 0, 0, 13), Err(OracleError::TooLong(13)));
    }

    #[test]
    fn y_series_examples() {
        let g = parse_graph(REVERSED).unwrap();
        let b = 4f64.ln();
        assert!((series_y_oracle(&g, b, 0, 1e-12).unwrap() - 2.0).abs() < 1e-10);
        assert!((series_y_oracle(&g, b, 1, 1e-12).unwrap() - 6.0).abs() < 1e-10);
        let edgeless = parse_graph("vertices: a b\n").unwrap();
        assert_eq!(series_y_oracle(&edgeless, -2.0, 1, 1e-12).unwrap(), 1.0);
        assert!(matches!(series_y_oracle(&g, 1.1, 1, 1e-12), Err(OracleError::NearDivergence { .. })));
    }

    #[test]
    fn quick_exit_examples() {
        let g = parse_graph(REVERSED).unwrap();
        assert!((quick_exit_series_oracle(&g, &[1], 0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let golden = parse_graph("vertices: v w u\nedge v v 2\nedge w v\nedge w w 2\nedge w u 2\nedge u w 2\n").unwrap();
        assert!((quick_exit_series_oracle(&golden, &[1, 2], 0, 1e-12).unwrap() - 0.5).abs() < 1e-9);
        // t receives nothing from w.
        let apart = parse_graph("vertices: v w t\nedge v v 2\nedge w w 3\nedge w v\nedge t t\n").unwrap();
        assert_eq!(quick_exit_series_oracle(&apart, &[1], 2, 1e-12).unwrap(), 0.0);
        assert_eq!(quick_exit_series_oracle(&g, &[0], 0, 1e-12), Err(OracleError::NotMinimalCritical));
    }

    #[test]
    fn subinvariance_examples() {
        let g = parse_graph(REVERSED).unwrap();
        assert!(subinvariance_check(&g, 3f64.ln(), &[0.5, 0.5]));
        assert!(subinvariance_check(&g, 0.0, &[0.0, 0.0]));
        let loops = parse_graph("vertices: a\nedge a a 2\n").unwrap();
        assert!(!subinvariance_check(&loops, 1.5f64.ln(), &[1.0]));
    }

    #[test]
    fn verification_passes_and_catches_corruption() {
        let system = KmsSystem::new(parse_graph(REVERSED).unwrap());
        let mut simplex = system.simplex(&BetaSpec::CriticalOf(1)).unwrap();
        let report = verify_simplex(&system, &simplex);
        assert!(report.passed(), "{report:?}");
        simplex.extremes[0].m[0] += 0.1;
        let report = verify_simplex(&system, &simplex);
        let failed: Vec<&str> = report.failures().map(|r| r.check.as_str()).collect();
        assert!(failed.contains(&"normalization"));
        assert!(failed.contains(&"eigen-identity"));
    }
}
