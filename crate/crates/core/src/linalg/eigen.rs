//! Floating-point spectra of symmetric matrices.
//!
//! This is the only place where floating point enters the verification path.

use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{Matrix, RationalMatrix};
use crate::error::{Error, Result};

/// Default relative tolerance for eigen residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Ascending eigenvalues of an exactly symmetric rational matrix.
pub fn sym_eigenvalues(m: &RationalMatrix, tol: f64) -> Result<Vec<f64>> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    sym_eigenvalues_f64(&m.to_f64(), tol)
}

/// Ascending eigenvalues of a symmetric floating-point matrix. Every eigenpair
/// is checked: `|M v - lambda v| <= tol * max(1, |M|_F)`.
pub fn sym_eigenvalues_f64(m: &Matrix<f64>, tol: f64) -> Result<Vec<f64>> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::NotSymmetric);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let scale = dm.norm().max(1.0);
    if (&dm - dm.transpose()).norm() > tol * scale {
        return Err(Error::NotSymmetric);
    }
    let eig = SymmetricEigen::new(dm.clone());
    let bound = tol * scale;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let residual = (&dm * v - v * lambda).norm();
        if residual > bound {
            return Err(Error::EigenResidual { residual, bound });
        }
    }
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}
