//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

/// Source features, source labels, target features, target labels.
pub type BinaryInstance = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

use hfa::data::SeededRng;
use hfa::linalg::{dot, Matrix, SymMatrix};

pub fn gaussian_vec(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}

pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gaussian())
}

pub fn random_symmetric(rng: &mut SeededRng, n: usize) -> SymMatrix {
    let a = gaussian_matrix(rng, n, n);
    SymMatrix::from_matrix(a.add(&a.transpose()).unwrap()).unwrap()
}

/// `A A'` with `A` of shape `n x rank`.
pub fn random_psd(rng: &mut SeededRng, n: usize, rank: usize) -> SymMatrix {
    let a = gaussian_matrix(rng, n, rank);
    SymMatrix::from_matrix(a.matmul(&a.transpose()).unwrap()).unwrap()
}

/// Random feasible metric: PSD with trace `scale * lambda`.
pub fn random_feasible_metric(rng: &mut SeededRng, n: usize, lambda: f64, scale: f64) -> SymMatrix {
    let rank = 1 + rng.below(n);
    let p = random_psd(rng, n, rank);
    let tr = p.trace();
    p.scaled(scale * lambda / tr)
}

/// Labels with both signs present.
pub fn random_labels(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n)
        .map(|_| if rng.below(2) == 0 { 1.0 } else { -1.0 })
        .collect();
    y[0] = 1.0;
    y[n - 1] = -1.0;
    y
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Dual objective `1'a - 1/2 (a∘y)'K(a∘y)`, written out independently.
pub fn dual_objective(k: &SymMatrix, y: &[f64], a: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * y[i] * k.row(i)[j] * a[j] * y[j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}` by bisection on the multiplier.
pub fn project_box_hyperplane(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> {
        z.iter()
            .zip(y)
            .map(|(zi, yi)| (zi - mu * yi).clamp(0.0, c))
            .collect()
    };
    let resid = |a: &[f64]| dot(a, y);
    // resid(at(mu)) is non-increasing in mu
    let mut lo = -1.0;
    let mut hi = 1.0;
    while resid(&at(lo)) < 0.0 {
        lo *= 2.0;
    }
    while resid(&at(hi)) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if resid(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the SVM dual; returns the best objective seen.
pub fn dual_oracle(k: &SymMatrix, y: &[f64], c: f64, iterations: usize) -> f64 {
    let n = y.len();
    // Lipschitz bound on the gradient: the largest absolute row sum.
    let lip = (0..n)
        .map(|i| k.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - y[i] * (0..n).map(|j| k.row(i)[j] * a[j] * y[j]).sum::<f64>())
            .collect()
    };
    let mut a = project_box_hyperplane(&vec![0.0; n], y, c);
    let mut w = a.clone();
    let mut t = 1.0f64;
    let mut best = dual_objective(k, y, &a);
    for _ in 0..iterations {
        let g = grad(&w);
        let z: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi + gi / lip).collect();
        let next = project_box_hyperplane(&z, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = next
            .iter()
            .zip(&a)
            .map(|(n, o)| n + (t - 1.0) / t_next * (n - o))
            .collect();
        let obj = dual_objective(k, y, &next);
        if obj < best {
            // restart momentum when ascent stalls
            w = next.clone();
            t = 1.0;
        } else {
            t = t_next;
        }
        best = best.max(obj);
        a = next;
    }
    best
}

/// Two separated Gaussian blobs in `dim` dimensions, `n` per class, labels 0/1.
pub fn blobs(rng: &mut SeededRng, n: usize, dim: usize, sep: f64) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for class in 0..2u32 {
        let shift = if class == 0 { -sep } else { sep };
        for _ in 0..n {
            let mut v = gaussian_vec(rng, dim);
            v[0] += shift;
            x.push(v);
            y.push(class);
        }
    }
    (x, y)
}
