//! Explicit augmented feature maps and the derived kernel matrices.
//!
//! Source samples map to `[P x; x; 0_{d_t}]` and target samples to
//! `[Q x; 0_{d_s}; x]`. Only `H = [P, Q]'[P, Q]` ever enters training, so the
//! explicit maps exist to cross-check the kernel builders.

use super::metric::{MetricFactors, TransformMetric};
use crate::error::{HfaError, Result};
use crate::linalg::{Matrix, SymMatrix};

/// `[P x ; x ; 0_{d_t}]` for a source sample; `P` is `d_c x d_s`.
pub fn augment_source(x: &[f64], p: &Matrix, d_t: usize) -> Result<Vec<f64>> {
    if p.cols() != x.len() {
        return Err(HfaError::input(format!(
            "P has {} columns but source sample has dimension {}",
            p.cols(),
            x.len()
        )));
    }
    let mut out = p.matvec(x)?;
    out.extend_from_slice(x);
    out.resize(out.len() + d_t, 0.0);
    Ok(out)
}

/// `[Q x ; 0_{d_s} ; x]` for a target sample; `Q` is `d_c x d_t`.
pub fn augment_target(x: &[f64], q: &Matrix, d_s: usize) -> Result<Vec<f64>> {
    if q.cols() != x.len() {
        return Err(HfaError::input(format!(
            "Q has {} columns but target sample has dimension {}",
            q.cols(),
            x.len()
        )));
    }
    let mut out = q.matvec(x)?;
    out.resize(out.len() + d_s, 0.0);
    out.extend_from_slice(x);
    Ok(out)
}

/// Linear-formulation kernel
///
/// ```text
/// [ X_s'X_s + L_s'H L_s    L_s'H L_t           ]
/// [ L_t'H L_s              X_t'X_t + L_t'H L_t ]
/// ```
///
/// with `L_s = [I; 0] X_s`, `L_t = [0; I] X_t`. `xs` is `d_s x n_s` (samples as columns).
pub fn build_kh_linear(xs: &Matrix, xt: &Matrix, metric: &TransformMetric) -> Result<SymMatrix> {
    let expected = xs.rows() + xt.rows();
    if metric.order() != expected {
        return Err(HfaError::input(format!(
            "linear metric has order {}, expected d_s + d_t = {expected}",
            metric.order()
        )));
    }
    MetricFactors::linear(xs, xt)?.augmented_kernel(metric.matrix())
}

/// Kernelized counterpart with `L_s = [I; 0] K_s^{1/2}`, `L_t = [0; I] K_t^{1/2}`.
pub fn build_kh_kernelized(
    ks_sqrt: &SymMatrix,
    kt_sqrt: &SymMatrix,
    ks: &SymMatrix,
    kt: &SymMatrix,
    metric: &TransformMetric,
) -> Result<SymMatrix> {
    let expected = ks.order() + kt.order();
    if metric.order() != expected {
        return Err(HfaError::input(format!(
            "kernelized metric has order {}, expected n_s + n_t = {expected}",
            metric.order()
        )));
    }
    MetricFactors::kernelized(ks, kt, ks_sqrt, kt_sqrt)?.augmented_kernel(metric.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_projection() {
        let p = Matrix::zeros(2, 3);
        assert_eq!(
            augment_source(&[1.0, 2.0, 3.0], &p, 2).unwrap(),
            vec![0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0]
        );
        let q = Matrix::zeros(2, 1);
        assert_eq!(
            augment_target(&[4.0], &q, 3).unwrap(),
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 4.0]
        );
    }

    #[test]
    fn identity_projection_replicates() {
        let x = [1.0, -2.0];
        assert_eq!(
            augment_source(&x, &Matrix::identity(2), 1).unwrap(),
            vec![1.0, -2.0, 1.0, -2.0, 0.0]
        );
        assert_eq!(
            augment_target(&x, &Matrix::identity(2), 1).unwrap(),
            vec![1.0, -2.0, 0.0, 1.0, -2.0]
        );
    }

    #[test]
    fn one_row_projection() {
        let p = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            augment_source(&[2.0, 3.0], &p, 1).unwrap(),
            vec![5.0, 2.0, 3.0, 0.0]
        );
        assert!(augment_source(&[2.0], &p, 1).is_err());
        assert!(augment_target(&[2.0], &p, 1).is_err());
    }

    #[test]
    fn linear_kernel_examples() {
        let xs = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let xt = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let h = TransformMetric::new(SymMatrix::identity(2), 2.0).unwrap();
        let k = build_kh_linear(&xs, &xt, &h).unwrap();
        assert_eq!(k, SymMatrix::from_diagonal(&[2.0, 2.0]));

        let xs = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let xt = Matrix::from_rows(&[vec![3.0]]).unwrap();
        let zero = TransformMetric::zero(3, 1.0).unwrap();
        let k = build_kh_linear(&xs, &xt, &zero).unwrap();
        let expected = SymMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, 5.0, 0.0],
            vec![0.0, 0.0, 9.0],
        ])
        .unwrap();
        assert_eq!(k, expected);
        assert!(build_kh_linear(&xs, &xt, &TransformMetric::zero(2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn kernelized_examples() {
        let ks = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let kt = SymMatrix::from_diagonal(&[3.0]);
        let ks_sqrt = crate::linalg::matrix_sqrt(&ks, 0.0).unwrap();
        let kt_sqrt = crate::linalg::matrix_sqrt(&kt, 0.0).unwrap();
        let zero = TransformMetric::zero(3, 1.0).unwrap();
        let k = build_kh_kernelized(&ks_sqrt, &kt_sqrt, &ks, &kt, &zero).unwrap();
        assert_eq!(k, SymMatrix::block_diagonal(&ks, &kt));

        let lambda = 1.5;
        let init = TransformMetric::initial(3, lambda).unwrap();
        let k = build_kh_kernelized(&ks_sqrt, &kt_sqrt, &ks, &kt, &init).unwrap();
        let c = lambda / 3.0;
        let expected = SymMatrix::block_diagonal(&ks.scaled(1.0 + c), &kt.scaled(1.0 + c));
        assert!(k.max_abs_diff(&expected) < 1e-12);
    }
}
