//! Whether a critical value `e^β` can be a Perron number, given its minimal polynomial.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TAU;

/// How close the caller's approximation must be to an actual root.
pub const ROOT_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerronError {
    #[error("the polynomial has no coefficients")]
    Empty,
    #[error("the polynomial is constant")]
    Constant,
    #[error("leading coefficient is {0}, expected 1")]
    NotMonic(i64),
    #[error("no root lies within {tolerance} of {root}; nearest is {nearest_re}{nearest_im:+}i")]
    NoMatchingRoot { root: f64, tolerance: f64, nearest_re: f64, nearest_im: f64 },
    #[error("root finding did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronAnalysis {
    /// All roots as `(re, im)`.
    pub roots: Vec<(f64, f64)>,
    /// The root matched to the caller's approximation.
    pub designated: (f64, f64),
    pub is_perron: bool,
}

/// Roots of a monic polynomial (coefficients highest degree first) from the
/// eigenvalues of its companion matrix.
fn roots(coeffs: &[i64]) -> Result<Vec<Complex<f64>>, PerronError> {
    let degree = coeffs.len() - 1;
    if degree == 1 {
        return Ok(vec![Complex::new(-(coeffs[1] as f64), 0.0)]);
    }
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -(coeffs[j + 1] as f64)
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    // Francis iteration can stall when all roots share a modulus; shifting
    // the companion matrix separates them.
    for shift in [1.0, -1.7, 2.9, 0.0] {
        let shifted = &companion + DMatrix::identity(degree, degree) * shift;
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 1_000) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| z - shift).collect());
        }
    }
    Err(PerronError::NoConvergence)
}

/// Full analysis: `λ` (the root nearest `root`) must be real, at least 1, and
/// exceed the modulus of every other root by more than the comparison tolerance.
pub fn perron_analysis(coeffs: &[i64], root: f64, match_tolerance: f64) -> Result<PerronAnalysis, PerronError> {
    match coeffs.first() {
        None => return Err(PerronError::Empty),
        Some(&1) => {}
        Some(&lead) => return Err(PerronError::NotMonic(lead)),
    }
    if coeffs.len() == 1 {
        return Err(PerronError::Constant);
    }
    let all = roots(coeffs)?;
    let target = Complex::new(root, 0.0);
    let (index, nearest) = all
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .expect("a polynomial of positive degree has roots");
    if (nearest - target).norm() > match_tolerance {
        return Err(PerronError::NoMatchingRoot {
            root,
            tolerance: match_tolerance,
            nearest_re: nearest.re,
            nearest_im: nearest.im,
        });
    }
    let lambda = *nearest;
    let real = lambda.im.abs() <= TAU * lambda.re.abs().max(1.0);
    let dominant = all
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .all(|(_, mu)| lambda.re > mu.norm() + TAU);
    Ok(PerronAnalysis {
        roots: all.iter().map(|z| (z.re, z.im)).collect(),
        designated: (lambda.re, lambda.im),
        is_perron: real && lambda.re >= 1.0 - TAU && dominant,
    })
}

/// Whether the root of `coeffs` nearest `root` is a Perron number, assuming
/// the caller supplies its minimal polynomial.
pub fn perron_check(coeffs: &[i64], root: f64) -> Result<bool, PerronError> {
    perron_analysis(coeffs, root, ROOT_MATCH_TOLERANCE).map(|a| a.is_perron)
}
