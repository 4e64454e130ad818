//! Dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Determinants at or below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Solves `m * x = rhs` by LU with partial pivoting.
///
/// Returns the determinant as the error when `|det m| <= SINGULAR_DET`.
pub fn solve(m: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>, f64> {
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(det);
    }
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|x| x.as_slice().to_vec())
        .ok_or(det)
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Curl matrix `(d alpha)_{ab} = d_a alpha_b - d_b alpha_a` from the
/// gradients of the coefficients, `grads[b][a] = d_a alpha_b`.
pub fn exterior_derivative(grads: &[Vec<f64>]) -> DMatrix<f64> {
    let n = grads.len();
    DMatrix::from_fn(n, n, |a, b| grads[b][a] - grads[a][b])
}
