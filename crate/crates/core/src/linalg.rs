//! Thin wrappers over dense LAPACK routines for pointwise linear algebra.
//!
//! Everything here works on `ndarray` arrays of complex doubles. The
//! wrappers normalize error handling and keep tolerance conventions
//! (relative to the largest singular value) in one place.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, Eig, Inverse, Solve, SVD};

use crate::error::CoreError;
use crate::C64;

pub fn inv(m: &Array2<C64>) -> Result<Array2<C64>, CoreError> {
    m.inv()
        .map_err(|e| CoreError::Linalg(format!("matrix inversion failed: {e}")))
}

pub fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>, CoreError> {
    a.solve(b)
        .map_err(|e| CoreError::Linalg(format!("linear solve failed: {e}")))
}

pub fn det(m: &Array2<C64>) -> Result<C64, CoreError> {
    m.det()
        .map_err(|e| CoreError::Linalg(format!("determinant failed: {e}")))
}

/// Eigenvalues and right eigenvectors (as matrix columns) of a general
/// complex matrix.
pub fn eig(m: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>), CoreError> {
    let (vals, vecs) = m
        .eig()
        .map_err(|e| CoreError::Linalg(format!("eigendecomposition failed: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

pub fn singular_values(m: &Array2<C64>) -> Result<Vec<f64>, CoreError> {
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| CoreError::Linalg(format!("singular value decomposition failed: {e}")))?;
    Ok(s.to_vec())
}

/// Numerical rank: singular values above `rel_tol` times the largest one.
pub fn rank(m: &Array2<C64>, rel_tol: f64) -> Result<usize, CoreError> {
    let s = singular_values(m)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * top).count())
}

/// Orthonormal basis of the (numerical) null space of `m`, read off the
/// right singular vectors whose singular value falls below `rel_tol` times
/// the largest one. Returns column vectors.
pub fn kernel(m: &Array2<C64>, rel_tol: f64) -> Result<Vec<Array1<C64>>, CoreError> {
    let (_, s, vt) = m
        .svd(false, true)
        .map_err(|e| CoreError::Linalg(format!("singular value decomposition failed: {e}")))?;
    let vt = vt.expect("svd with v requested");
    let ncols = m.ncols();
    let top = s.first().copied().unwrap_or(0.0);
    let cut = if top == 0.0 { 0.0 } else { rel_tol * top };
    let mut basis = Vec::new();
    for k in 0..ncols {
        // Rows of vt beyond the singular value list correspond to exact
        // null directions when nrows < ncols.
        let sv = s.get(k).copied().unwrap_or(0.0);
        if sv <= cut {
            let row = vt.row(k);
            basis.push(row.iter().map(|z| z.conj()).collect::<Array1<C64>>());
        }
    }
    Ok(basis)
}

/// Largest modulus among the entries of a matrix.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
