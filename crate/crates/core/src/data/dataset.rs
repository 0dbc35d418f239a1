use std::collections::BTreeMap;

use crate::error::{HfaError, Result};

/// Labeled feature vectors from one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    domain: String,
    dim: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<u32>,
}

impl Dataset {
    pub fn new(
        domain: impl Into<String>,
        dim: usize,
        features: Vec<Vec<f64>>,
        labels: Vec<u32>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(HfaError::input("dataset dimension must be positive"));
        }
        if features.len() != labels.len() {
            return Err(HfaError::input(format!(
                "{} feature vectors but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some((i, x)) = features.iter().enumerate().find(|(_, x)| x.len() != dim) {
            return Err(HfaError::input(format!(
                "sample {i} has dimension {}, expected {dim}",
                x.len()
            )));
        }
        Ok(Dataset {
            domain: domain.into(),
            dim,
            features,
            labels,
        })
    }

    pub fn empty(domain: impl Into<String>, dim: usize) -> Result<Self> {
        Dataset::new(domain, dim, Vec::new(), Vec::new())
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Distinct class labels in ascending order.
    pub fn classes(&self) -> Vec<u32> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &y in &self.labels {
            *counts.entry(y).or_insert(0) += 1;
        }
        counts
    }

    /// `+1` for `positive`, `-1` for every other class.
    pub fn binary_labels(&self, positive: u32) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&y| if y == positive { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            domain: self.domain.clone(),
            dim: self.dim,
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = domain.into();
        self
    }

    /// Replaces the features while keeping labels; used by feature transforms.
    pub fn map_features(&self, dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Dataset> {
        Dataset::new(
            self.domain.clone(),
            dim,
            self.features.iter().map(|x| f(x)).collect(),
            self.labels.clone(),
        )
    }
}

/// Per-feature standardization fit on one dataset and applied to others.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(d: &Dataset) -> Result<Self> {
        if d.is_empty() {
            return Err(HfaError::input("cannot standardize an empty dataset"));
        }
        let n = d.len() as f64;
        let mut mean = vec![0.0; d.dim()];
        for x in d.features() {
            crate::linalg::axpy(1.0 / n, x, &mut mean);
        }
        let mut var = vec![0.0; d.dim()];
        for x in d.features() {
            for (j, v) in var.iter_mut().enumerate() {
                *v += (x[j] - mean[j]).powi(2);
            }
        }
        let denom = (d.len().max(2) - 1) as f64;
        let scale = var
            .into_iter()
            .map(|v| {
                let s = (v / denom).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.dim() != self.mean.len() {
            return Err(HfaError::input(format!(
                "standardizer fit on dimension {}, applied to {}",
                self.mean.len(),
                d.dim()
            )));
        }
        d.map_features(d.dim(), |x| {
            x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            "toy",
            2,
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 0.0]],
            vec![2, 0, 2],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(Dataset::new("x", 2, vec![vec![1.0]], vec![0]).is_err());
        assert!(Dataset::new("x", 1, vec![vec![1.0]], vec![]).is_err());
        assert!(Dataset::new("x", 0, vec![], vec![]).is_err());
    }

    #[test]
    fn classes_and_binary_view() {
        let d = toy();
        assert_eq!(d.classes(), vec![0, 2]);
        assert_eq!(d.binary_labels(2), vec![1.0, -1.0, 1.0]);
        assert_eq!(d.subset(&[1]).labels(), &[0]);
    }

    #[test]
    fn standardize() {
        let d = toy();
        let s = Standardizer::fit(&d).unwrap();
        let z = s.apply(&d).unwrap();
        let col0: Vec<f64> = z.features().iter().map(|x| x[0]).collect();
        assert!((col0.iter().sum::<f64>()).abs() < 1e-12);
        assert!((col0[0] + 1.0).abs() < 1e-12);
    }
}
