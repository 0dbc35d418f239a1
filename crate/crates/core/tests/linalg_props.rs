mod common;

use common::*;
use hfa::data::SeededRng;
use hfa::linalg::{matrix_sqrt, psd_project, sym_eigen, trace_cap, Matrix, SymMatrix};
use proptest::prelude::*;

fn orthonormality_error(v: &Matrix) -> f64 {
    v.tr_matmul(v)
        .unwrap()
        .max_abs_diff(&Matrix::identity(v.cols()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigen_reconstructs(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = SeededRng::new(seed);
        let m = random_symmetric(&mut rng, n);
        let eig = sym_eigen(&m).unwrap();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!(eig.reconstruct().max_abs_diff(&m) <= 1e-9 * scale);
        prop_assert!(orthonormality_error(&eig.vectors) <= 1e-9);
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigen_handles_repeated_values(seed in any::<u64>(), n in 2usize..=10) {
        // Q diag(1,1,...,2) Q' has a degenerate eigenspace
        let mut rng = SeededRng::new(seed);
        let q = sym_eigen(&random_symmetric(&mut rng, n)).unwrap().vectors;
        let mut w = vec![1.0; n];
        w[n - 1] = 2.0;
        let m = hfa::linalg::spectral_compose(&q, &w);
        let eig = sym_eigen(&m).unwrap();
        prop_assert!((eig.values[0] - 2.0).abs() < 1e-10);
        prop_assert!(eig.values[1..].iter().all(|v| (v - 1.0).abs() < 1e-10));
        prop_assert!(orthonormality_error(&eig.vectors) <= 1e-9);
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = SeededRng::new(seed);
        let mut m = random_psd(&mut rng, n, n);
        m.add_identity(0.1);
        let ridge = 1e-6;
        let r = matrix_sqrt(&m, ridge).unwrap();
        let sq = r.as_matrix().matmul(r.as_matrix()).unwrap();
        let mut target = m.clone();
        target.add_identity(ridge);
        prop_assert!(sq.max_abs_diff(target.as_matrix()) <= 1e-8 * target.frobenius_norm());
    }

    #[test]
    fn psd_projection_is_idempotent_and_nearest(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = SeededRng::new(seed);
        let m = random_symmetric(&mut rng, n);
        let p = psd_project(&m).unwrap();
        let pp = psd_project(&p).unwrap();
        prop_assert!(pp.max_abs_diff(&p) <= 1e-12 * (1.0 + p.frobenius_norm()));

        // Optimality certificate: P ⪰ 0, P - M ⪰ 0, <P, P - M> = 0.
        let d = p.sub(&m).unwrap();
        let tol = 1e-10 * (1.0 + m.frobenius_norm());
        prop_assert!(sym_eigen(&p).unwrap().values.iter().all(|&w| w >= -tol));
        prop_assert!(sym_eigen(&d).unwrap().values.iter().all(|&w| w >= -tol));
        prop_assert!(p.inner(&d).abs() <= tol * (1.0 + p.frobenius_norm()));

        // and no sampled PSD matrix is closer
        let dist = d.frobenius_norm();
        for _ in 0..50 {
            let rank = 1 + rng.below(n);
            let q = random_psd(&mut rng, n, rank);
            let q = q.scaled(m.frobenius_norm() / q.frobenius_norm().max(1e-300) * rng.unit_open());
            prop_assert!(q.sub(&m).unwrap().frobenius_norm() >= dist - 1e-12);
        }
    }

    #[test]
    fn trace_cap_scales_spectrum(seed in any::<u64>(), n in 1usize..=8, lambda in 0.1f64..5.0) {
        let mut rng = SeededRng::new(seed);
        let m = random_psd(&mut rng, n, n);
        let capped = trace_cap(&m, lambda).unwrap();
        prop_assert!(capped.trace() <= lambda * (1.0 + 1e-12));
        let before = sym_eigen(&m).unwrap();
        let after = sym_eigen(&capped).unwrap();
        let factor = if m.trace() > lambda { lambda / m.trace() } else { 1.0 };
        for (a, b) in after.values.iter().zip(&before.values) {
            prop_assert!(*a <= *b + 1e-12 * b.abs().max(1.0));
            prop_assert!((a - factor * b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        // eigenvectors commute with the scaling
        let rebuilt = hfa::linalg::spectral_compose(
            &before.vectors,
            &before.values.iter().map(|w| factor * w).collect::<Vec<_>>(),
        );
        prop_assert!(rebuilt.max_abs_diff(&capped) <= 1e-9 * m.frobenius_norm().max(1.0));
    }
}

#[test]
fn jacobi_and_ql_agree_across_the_switch_point() {
    let mut rng = SeededRng::new(11);
    for n in [
        hfa::linalg::JACOBI_MAX_ORDER,
        hfa::linalg::JACOBI_MAX_ORDER + 1,
        70,
    ] {
        let m = random_symmetric(&mut rng, n);
        let a = hfa::linalg::jacobi_eigen(&m).unwrap();
        let b = hfa::linalg::tridiagonal_ql_eigen(&m).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9 * m.frobenius_norm());
        }
        assert!(b.reconstruct().max_abs_diff(&m) < 1e-9 * m.frobenius_norm());
    }
}

#[test]
fn identity_and_zero_roots() {
    let id = SymMatrix::identity(4);
    assert!(matrix_sqrt(&id, 0.0).unwrap().max_abs_diff(&id) < 1e-14);
    assert!(matrix_sqrt(&SymMatrix::zeros(3), 0.0).unwrap().max_abs() == 0.0);
}
