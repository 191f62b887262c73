//! Perron-Frobenius data and resolvents of nonnegative matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{tarjan, DirectedGraph};

const POWER_TOLERANCE: f64 = 1e-13;
const POWER_CAP: usize = 100_000;
/// `ρ(e^{-β}M)` must stay below `1 - DIVERGENCE_MARGIN` for a resolvent to exist.
pub const DIVERGENCE_MARGIN: f64 = 1e-12;
const SERIES_TERM_CAP: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is {0}x{1}, expected a square matrix")]
    NotSquare(usize, usize),
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("matrix has no cycle, so its period is undefined")]
    NoCycle,
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the series diverges: beta = {beta} but ln of the spectral radius is {log_radius}")]
    Divergent { beta: f64, log_radius: f64 },
    #[error("linear system is numerically singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub radius: f64,
    /// Positive with unit ℓ1 norm.
    pub perron_vector: Vec<f64>,
    pub period: u32,
    /// `‖Mx - ρx‖∞` achieved by `perron_vector`.
    pub residual: f64,
}

/// A resolvent request `(I - e^{-β}M)^{-1}`, with convergence decided up front.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventQuery {
    pub beta: f64,
    pub matrix: DMatrix<f64>,
    pub convergent: bool,
}

impl ResolventQuery {
    pub fn new(matrix: DMatrix<f64>, beta: f64) -> Self {
        let convergent = converges(&matrix, beta);
        Self { beta, matrix, convergent }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SpectralError> {
        resolvent_solve(&self.matrix, self.beta, b)
    }
}

fn converges(m: &DMatrix<f64>, beta: f64) -> bool {
    (-beta).exp() * spectral_radius(m) < 1.0 - DIVERGENCE_MARGIN
}

fn check_square(m: &DMatrix<f64>) -> Result<usize, SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

/// Strongly connected components of the support of `m`; `i -> j` when `m[(i, j)] > 0`.
fn support_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let adjacency: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| m[(i, j)] > 0.0).collect()).collect();
    tarjan(&adjacency)
}

pub fn is_irreducible(m: &DMatrix<f64>) -> bool {
    m.nrows() == m.ncols() && m.nrows() > 0 && support_components(m).len() == 1
}

/// Power iteration on `I + M` for an irreducible block. Returns `(ρ, x, residual)`.
fn power_iteration(m: &DMatrix<f64>) -> (f64, Vec<f64>, f64) {
    let n = m.nrows();
    if n == 1 {
        return (m[(0, 0)], vec![1.0], 0.0);
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..POWER_CAP {
        let mut next = m * &x + &x;
        next /= next.sum();
        let change = (&next - &x).amax();
        x = next;
        if change <= POWER_TOLERANCE * x.amax() {
            break;
        }
    }
    let mx = m * &x;
    let radius = mx.sum();
    let residual = (&mx - &x * radius).amax();
    (radius, x.iter().copied().collect(), residual)
}

/// Spectral radius as the maximum over the irreducible diagonal blocks of the
/// support, so reducible matrices never go through power iteration whole.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::NAN;
    }
    support_components(m)
        .into_iter()
        .filter(|c| c.len() > 1 || m[(c[0], c[0])] > 0.0)
        .map(|c| power_iteration(&m.select_rows(&c).select_columns(&c)).0)
        .fold(0.0, f64::max)
}

pub fn spectral_radius_of_graph(graph: &DirectedGraph) -> f64 {
    spectral_radius(&graph.real_matrix())
}

pub fn perron_vector(m: &DMatrix<f64>) -> Result<Vec<f64>, SpectralError> {
    check_square(m)?;
    if !is_irreducible(m) {
        return Err(SpectralError::NotIrreducible);
    }
    Ok(power_iteration(m).1)
}

/// Period of an irreducible matrix: the gcd of `level(i) + 1 - level(j)` over
/// all edges `i -> j`, with levels from a breadth-first search.
pub fn period(m: &DMatrix<f64>) -> Result<u32, SpectralError> {
    let n = check_square(m)?;
    if !is_irreducible(m) {
        return Err(SpectralError::NotIrreducible);
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if m[(i, j)] > 0.0 && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut g = 0usize;
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > 0.0 {
                g = gcd(g, (level[i] + 1).abs_diff(level[j]));
            }
        }
    }
    if g == 0 {
        return Err(SpectralError::NoCycle);
    }
    Ok(g as u32)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn spectral_data(m: &DMatrix<f64>) -> Result<SpectralData, SpectralError> {
    let period = period(m)?;
    let (radius, perron_vector, residual) = power_iteration(m);
    Ok(SpectralData { radius, perron_vector, period, residual })
}

fn divergence(m: &DMatrix<f64>, beta: f64) -> SpectralError {
    SpectralError::Divergent { beta, log_radius: spectral_radius(m).ln() }
}

fn shifted(m: &DMatrix<f64>, beta: f64) -> DMatrix<f64> {
    DMatrix::identity(m.nrows(), m.nrows()) - m * (-beta).exp()
}

/// Solves `(I - e^{-β}M) x = b` by LU with partial pivoting.
pub fn resolvent_solve(m: &DMatrix<f64>, beta: f64, b: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = check_square(m)?;
    if b.len() != n {
        return Err(SpectralError::DimensionMismatch { expected: n, got: b.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if !converges(m, beta) {
        return Err(divergence(m, beta));
    }
    let rhs = DVector::from_column_slice(b);
    shifted(m, beta)
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or(SpectralError::Singular)
}

/// `(I - e^{-β}M)^{-1}`; entry `(v, w)` sums `e^{-β|λ|}` over paths from `w` to `v`.
pub fn resolvent_matrix(m: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>, SpectralError> {
    check_square(m)?;
    if !converges(m, beta) {
        return Err(divergence(m, beta));
    }
    shifted(m, beta).lu().try_inverse().ok_or(SpectralError::Singular)
}

/// Truncated Neumann series `Σ e^{-βn} Mⁿ b`.
///
/// With `T = e^{-β}M`, picks the smallest `k` (a power of two) with
/// `q = ‖T^k‖∞ < 1` and sums in blocks of `k` terms. If the last block added
/// has norm `s`, the remaining tail is at most `q·s/(1-q)`, and summation stops
/// once that bound is below `tol`.
pub fn resolvent_series(
    m: &DMatrix<f64>,
    beta: f64,
    b: &[f64],
    tol: f64,
) -> Result<Vec<f64>, SpectralError> {
    let n = check_square(m)?;
    if b.len() != n {
        return Err(SpectralError::DimensionMismatch { expected: n, got: b.len() });
    }
    if !converges(m, beta) {
        return Err(divergence(m, beta));
    }
    let t = m * (-beta).exp();
    let mut power = t.clone();
    let mut k = 1usize;
    let mut q = inf_norm(&power);
    while q >= 1.0 {
        if k >= SERIES_TERM_CAP {
            return Err(divergence(m, beta));
        }
        power = &power * &power;
        k *= 2;
        q = inf_norm(&power);
    }

    let mut term = DVector::from_column_slice(b);
    let mut sum = DVector::zeros(n);
    let mut used = 0usize;
    loop {
        let mut block = DVector::zeros(n);
        for _ in 0..k {
            block += &term;
            term = &t * term;
        }
        sum += &block;
        used += k;
        if q * block.amax() / (1.0 - q) < tol || block.amax() == 0.0 {
            break;
        }
        if used >= SERIES_TERM_CAP {
            return Err(divergence(m, beta));
        }
    }
    Ok(sum.iter().copied().collect())
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `y_v = Σ_w (I - e^{-β}A)^{-1}(w, v)`: the partition function over paths with source `v`.
pub fn y_vector(graph: &DirectedGraph, beta: f64) -> Result<Vec<f64>, SpectralError> {
    let a = graph.real_matrix();
    let ones = vec![1.0; a.nrows()];
    resolvent_solve(&a.transpose(), beta, &ones)
}

/// Characteristic polynomial `det(xI - M)` with exact integer coefficients,
/// highest degree first, by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &DMatrix<u64>) -> Vec<i128> {
    let n = m.nrows();
    let a: Vec<Vec<i128>> =
        (0..n).map(|i| (0..n).map(|j| m[(i, j)] as i128).collect()).collect();
    let mul = |x: &Vec<Vec<i128>>, y: &Vec<Vec<i128>>| -> Vec<Vec<i128>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|l| x[i][l] * y[l][j]).sum()).collect())
            .collect()
    };
    let mut coeffs = vec![1i128];
    let mut acc = vec![vec![0i128; n]; n];
    for k in 1..=n {
        let c_prev = *coeffs.last().expect("coefficients start non-empty");
        let mut next = mul(&a, &acc);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        acc = next;
        let am = mul(&a, &acc);
        let trace: i128 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-trace / k as i128);
    }
    coeffs
}
