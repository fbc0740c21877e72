//! Small dense factorizations, delegated to nalgebra.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(a: &Array2<f64>) -> f64 {
    to_nalgebra(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky_lower(a: &Array2<f64>) -> Result<Array2<f64>> {
    let chol = to_nalgebra(a).cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    Ok(Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| l[(i, j)]))
}

pub fn max_asymmetry(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}
