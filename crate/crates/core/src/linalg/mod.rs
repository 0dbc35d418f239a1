//! Dense symmetric linear algebra and kernel evaluation.

mod eigen;
mod kernel;
mod matrix;

pub use eigen::{
    jacobi_eigen, spectral_compose, sym_eigen, tridiagonal_ql_eigen, SymEigen, JACOBI_MAX_ORDER,
};
pub use kernel::{
    cross_kernel, gram_matrix, kernel_column, kernel_value, median_heuristic_gamma, KernelFamily,
    KernelSpec,
};
pub use matrix::{axpy, dot, norm2, squared_distance, Matrix, SymMatrix};

use crate::error::{HfaError, Result};

/// Relative ridge used when none is configured: `1e-8 * trace(M) / order`.
pub fn default_ridge(m: &SymMatrix) -> f64 {
    let n = m.order().max(1) as f64;
    let r = 1e-8 * m.trace() / n;
    if r > 0.0 {
        r
    } else {
        1e-12
    }
}

/// `V diag(sqrt(max(w + ridge, 0))) V'`. Negative eigenvalues are clipped rather than rejected.
pub fn matrix_sqrt(m: &SymMatrix, ridge: f64) -> Result<SymMatrix> {
    if !(ridge >= 0.0) {
        return Err(HfaError::input(format!(
            "ridge must be nonnegative, got {ridge}"
        )));
    }
    Ok(sym_eigen(m)?.reconstruct_with(|w| (w + ridge).max(0.0).sqrt()))
}

/// `V diag(1 / sqrt(max(w, 0) + ridge)) V'`.
pub fn matrix_inv_sqrt(m: &SymMatrix, ridge: f64) -> Result<SymMatrix> {
    if !(ridge > 0.0) {
        return Err(HfaError::input(format!(
            "inverse square root needs a strictly positive ridge, got {ridge}"
        )));
    }
    Ok(sym_eigen(m)?.reconstruct_with(|w| 1.0 / (w.max(0.0) + ridge).sqrt()))
}

/// Frobenius-nearest PSD matrix: negative eigenvalues set to zero.
pub fn psd_project(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(m)?;
    if eig.values.last().is_none_or(|&w| w >= 0.0) {
        return Ok(m.clone());
    }
    Ok(eig.reconstruct_with(|w| w.max(0.0)))
}

/// Rescales `m` so its trace does not exceed `lambda`.
pub fn trace_cap(m: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    if !(lambda > 0.0) {
        return Err(HfaError::input(format!(
            "trace bound must be positive, got {lambda}"
        )));
    }
    let tr = m.trace();
    if tr <= lambda {
        Ok(m.clone())
    } else {
        Ok(m.scaled(lambda / tr))
    }
}

/// Smallest eigenvalue, used for feasibility checks.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eigen(m)?.values.last().copied().unwrap_or(0.0))
}
