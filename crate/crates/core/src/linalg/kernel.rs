use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::{dot, squared_distance, Matrix, SymMatrix};
use crate::error::{HfaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Rbf,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = HfaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelFamily::Linear),
            "rbf" | "gaussian" => Ok(KernelFamily::Rbf),
            other => Err(HfaError::input(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A fully resolved kernel: `linear` or `rbf` with a positive bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `exp(-gamma * ||a - b||^2)`
    Rbf {
        gamma: f64,
    },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(HfaError::input(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
        Ok(KernelSpec::Rbf { gamma })
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Linear => KernelFamily::Linear,
            KernelSpec::Rbf { .. } => KernelFamily::Rbf,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma } => Some(*gamma),
        }
    }

    #[inline]
    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

pub fn kernel_value(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(HfaError::input(format!(
            "kernel arguments differ in dimension: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(spec.eval_unchecked(a, b))
}

fn common_dim(xs: &[Vec<f64>]) -> Result<usize> {
    let dim = xs
        .first()
        .map(Vec::len)
        .ok_or_else(|| HfaError::input("empty sample list"))?;
    if let Some((i, x)) = xs.iter().enumerate().find(|(_, x)| x.len() != dim) {
        return Err(HfaError::input(format!(
            "ragged samples: sample {i} has dimension {}, expected {dim}",
            x.len()
        )));
    }
    Ok(dim)
}

/// Gram matrix `K[i][j] = k(x_i, x_j)`.
pub fn gram_matrix(spec: &KernelSpec, xs: &[Vec<f64>]) -> Result<SymMatrix> {
    common_dim(xs)?;
    Ok(SymMatrix::from_upper_fn(xs.len(), |i, j| {
        spec.eval_unchecked(&xs[i], &xs[j])
    }))
}

/// Cross-kernel `K[i][j] = k(train_i, test_j)`, shape `n_train x n_test`.
pub fn cross_kernel(spec: &KernelSpec, train: &[Vec<f64>], test: &[Vec<f64>]) -> Result<Matrix> {
    let dim = common_dim(train)?;
    if let Some((j, x)) = test.iter().enumerate().find(|(_, x)| x.len() != dim) {
        return Err(HfaError::input(format!(
            "test sample {j} has dimension {}, expected {dim}",
            x.len()
        )));
    }
    Ok(Matrix::from_fn(train.len(), test.len(), |i, j| {
        spec.eval_unchecked(&train[i], &test[j])
    }))
}

/// Kernel evaluations of one point against every training vector.
pub fn kernel_column(spec: &KernelSpec, train: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    train.iter().map(|t| kernel_value(spec, t, x)).collect()
}

/// `1 / median ||x_i - x_j||^2` over distinct pairs; falls back to `1 / dim` when all points coincide.
pub fn median_heuristic_gamma(xs: &[Vec<f64>]) -> Result<f64> {
    let dim = common_dim(xs)?;
    let mut d2: Vec<f64> = Vec::with_capacity(xs.len() * xs.len().saturating_sub(1) / 2);
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            d2.push(squared_distance(&xs[i], &xs[j]));
        }
    }
    d2.retain(|&v| v > 0.0);
    if d2.is_empty() {
        return Ok(1.0 / dim.max(1) as f64);
    }
    d2.sort_by(f64::total_cmp);
    let mid = d2.len() / 2;
    let median = if d2.len().is_multiple_of(2) {
        0.5 * (d2[mid - 1] + d2[mid])
    } else {
        d2[mid]
    };
    Ok(1.0 / median)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_value() {
        assert_eq!(
            kernel_value(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
    }

    #[test]
    fn rbf_values() {
        let k = KernelSpec::rbf(0.5).unwrap();
        assert_eq!(kernel_value(&k, &[0.3, -1.0], &[0.3, -1.0]).unwrap(), 1.0);
        let v = kernel_value(&k, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((v - (-2.0_f64).exp()).abs() < 1e-15);
        assert!((v - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(kernel_value(&KernelSpec::Linear, &[1.0], &[1.0, 2.0]).is_err());
        assert!(gram_matrix(&KernelSpec::Linear, &[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(gram_matrix(&KernelSpec::Linear, &[]).is_err());
    }

    #[test]
    fn invalid_gamma() {
        assert!(KernelSpec::rbf(0.0).is_err());
        assert!(KernelSpec::rbf(-1.0).is_err());
        assert!(KernelSpec::rbf(f64::NAN).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&KernelSpec::Linear, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(g, SymMatrix::identity(2));
        let g = gram_matrix(&KernelSpec::rbf(3.0).unwrap(), &[vec![4.0, -2.0]]).unwrap();
        assert_eq!(g, SymMatrix::identity(1));
        let g = gram_matrix(&KernelSpec::Linear, &[vec![1.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(
            g,
            SymMatrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 4.0]]).unwrap()
        );
    }

    #[test]
    fn median_gamma() {
        // pairwise squared distances 1, 4, 1 -> median 1
        let xs = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(median_heuristic_gamma(&xs).unwrap(), 1.0);
        let same = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(median_heuristic_gamma(&same).unwrap(), 0.5);
    }

    #[test]
    fn family_parse() {
        assert_eq!("RBF".parse::<KernelFamily>().unwrap(), KernelFamily::Rbf);
        assert!("poly".parse::<KernelFamily>().is_err());
    }
}
