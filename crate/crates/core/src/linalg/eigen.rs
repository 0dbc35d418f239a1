//! Symmetric eigendecomposition.
//!
//! Two solvers are provided: cyclic Jacobi rotations, which are accurate to
//! full precision on small orders, and Householder tridiagonalization followed
//! by implicit QL, which is used above [`JACOBI_MAX_ORDER`] where Jacobi's
//! strided rotations become the bottleneck of training.

use super::matrix::{Matrix, SymMatrix};
use crate::error::{HfaError, Result};

/// Orders up to this size are decomposed with cyclic Jacobi.
pub const JACOBI_MAX_ORDER: usize = 48;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl SymEigen {
    /// Rebuilds `V diag(f(w)) V'`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        spectral_compose(
            &self.vectors,
            &self.values.iter().map(|&w| f(w)).collect::<Vec<_>>(),
        )
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|w| w)
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    if m.order() <= JACOBI_MAX_ORDER {
        jacobi_eigen(m)
    } else {
        tridiagonal_ql_eigen(m)
    }
}

fn check_finite(m: &SymMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(HfaError::input("matrix has non-finite entries"))
    }
}

/// Cyclic Jacobi; stops once the off-diagonal Frobenius norm drops below `1e-12 * ||M||_F`.
pub fn jacobi_eigen(m: &SymMatrix) -> Result<SymEigen> {
    check_finite(m)?;
    let n = m.order();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_REL_TOL * m.frobenius_norm();

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[(r, p)];
                    let h = a[(r, q)];
                    let new_rp = g - s * (h + g * tau);
                    let new_rq = h + s * (g - h * tau);
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let g = v[(r, p)];
                    let h = v[(r, q)];
                    v[(r, p)] = g - s * (h + g * tau);
                    v[(r, q)] = h + s * (g - h * tau);
                }
            }
        }
    }

    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(sorted_descending(values, v))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Householder reduction to tridiagonal form, then implicit QL with Wilkinson-style shifts.
///
/// Follows the classic EISPACK `tred2`/`tql2` pair. Internally works on the
/// transpose of the eigenvector matrix so the inner loops walk rows.
pub fn tridiagonal_ql_eigen(m: &SymMatrix) -> Result<SymEigen> {
    check_finite(m)?;
    let n = m.order();
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    // vt[(j, k)] holds V[k][j] of the textbook formulation.
    let mut vt = m.as_matrix().transpose();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut vt, &mut d, &mut e);
    tql2(&mut vt, &mut d, &mut e)?;
    Ok(sorted_descending(d, vt.transpose()))
}

fn tred2(vt: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = vt[(j, n - 1)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = vt[(j, i - 1)];
                vt[(j, i)] = 0.0;
                vt[(i, j)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                vt[(i, j)] = f;
                let mut g = e[j] + vt[(j, j)] * f;
                {
                    let col_j = vt.row(j);
                    for k in (j + 1)..i {
                        g += col_j[k] * d[k];
                        e[k] += col_j[k] * f;
                    }
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                {
                    let col_j = vt.row_mut(j);
                    for k in j..i {
                        col_j[k] -= f * e[k] + g * d[k];
                    }
                }
                d[j] = vt[(j, i - 1)];
                vt[(j, i)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        vt[(i, n - 1)] = vt[(i, i)];
        vt[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = vt[(i + 1, k)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                {
                    let col_next = vt.row(i + 1);
                    let col_j = vt.row(j);
                    for k in 0..=i {
                        g += col_next[k] * col_j[k];
                    }
                }
                let col_j = vt.row_mut(j);
                for k in 0..=i {
                    col_j[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            vt[(i + 1, k)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = vt[(j, n - 1)];
        vt[(j, n - 1)] = 0.0;
    }
    vt[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(vt: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 200 {
                    return Err(HfaError::Degenerate(
                        "tridiagonal QL iteration failed to converge".into(),
                    ));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.as_mut_slice().split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_next = &mut hi[..n];
                    for k in 0..n {
                        let h = col_next[k];
                        col_next[k] = s * col_i[k] + c * h;
                        col_i[k] = c * col_i[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sorted_descending(values: Vec<f64>, vectors: Matrix) -> SymEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    SymEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// `V diag(weights) V'`, computed from row dot products so the result is exactly symmetric.
pub fn spectral_compose(vectors: &Matrix, weights: &[f64]) -> SymMatrix {
    let n = vectors.rows();
    let k = weights.len();
    assert_eq!(vectors.cols(), k);
    let weighted = Matrix::from_fn(n, k, |i, j| vectors[(i, j)] * weights[j]);
    SymMatrix::from_upper_fn(n, |i, j| {
        super::matrix::dot(weighted.row(i), vectors.row(j))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(m: &SymMatrix, eig: &SymEigen, tol: f64) {
        let n = m.order();
        let scale = m.max_abs().max(1.0);
        let rebuilt = eig.reconstruct();
        assert!(
            rebuilt.max_abs_diff(m) <= tol * n as f64 * scale,
            "reconstruction"
        );
        let vtv = eig.vectors.tr_matmul(&eig.vectors).unwrap();
        assert!(
            vtv.max_abs_diff(&Matrix::identity(n)) <= tol,
            "orthonormality"
        );
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_input() {
        let m = SymMatrix::from_diagonal(&[1.0, 3.0]);
        for eig in [jacobi_eigen(&m).unwrap(), tridiagonal_ql_eigen(&m).unwrap()] {
            assert_eq!(eig.values, vec![3.0, 1.0]);
            assert!((eig.vectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_matrix() {
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        for eig in [jacobi_eigen(&m).unwrap(), tridiagonal_ql_eigen(&m).unwrap()] {
            assert!((eig.values[0] - 1.0).abs() < 1e-15);
            assert!((eig.values[1] + 1.0).abs() < 1e-15);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let top = eig.vectors.column(0);
            assert!((top[0].abs() - h).abs() < 1e-12 && (top[0] - top[1]).abs() < 1e-12);
            let bottom = eig.vectors.column(1);
            assert!((bottom[0] + bottom[1]).abs() < 1e-12);
            check_decomposition(&m, &eig, 1e-12);
        }
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = sym_eigen(&SymMatrix::identity(5)).unwrap();
        assert!(eig.values.iter().all(|&w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn non_finite_rejected() {
        let m = SymMatrix::from_diagonal(&[1.0, f64::NAN]);
        assert!(matches!(sym_eigen(&m), Err(HfaError::Input(_))));
        assert!(tridiagonal_ql_eigen(&m).is_err());
    }

    #[test]
    fn solvers_agree_on_structured_matrix() {
        let n = 30;
        let m = SymMatrix::from_upper_fn(n, |i, j| {
            1.0 / (1.0 + i as f64 + j as f64) + if i == j { (i % 3) as f64 } else { 0.0 }
        });
        let a = jacobi_eigen(&m).unwrap();
        let b = tridiagonal_ql_eigen(&m).unwrap();
        check_decomposition(&m, &a, 1e-10);
        check_decomposition(&m, &b, 1e-10);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn empty_and_single() {
        let one = SymMatrix::from_diagonal(&[-2.5]);
        assert_eq!(sym_eigen(&one).unwrap().values, vec![-2.5]);
        assert_eq!(tridiagonal_ql_eigen(&one).unwrap().values, vec![-2.5]);
    }
}
