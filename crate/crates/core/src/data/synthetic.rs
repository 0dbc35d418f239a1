//! Two-domain data sharing a latent class structure.
//!
//! Draw order from one [`SeededRng`] stream, so the output is fully determined by the seed:
//! class means (`num_classes x latent_dim`, row-major), `A_s` (`d_s x latent_dim`, row-major),
//! `A_t`, then the source samples and the target samples. Each sample draws its class
//! (`below(num_classes)`), its latent offset (`latent_dim` Gaussians) and its noise
//! (`d` Gaussians, skipped when `noise_std == 0`).

use super::dataset::Dataset;
use super::rng::SeededRng;
use crate::error::{HfaError, Result};
use crate::linalg::{min_eigenvalue, Matrix, SymMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub latent_dim: usize,
    pub num_classes: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    /// Scale of the class means in latent space; the within-class spread is 1.
    pub class_sep: f64,
    /// Standard deviation of the isotropic noise added after the embedding.
    pub noise_std: f64,
    pub n_source: usize,
    pub n_target: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            latent_dim: 5,
            num_classes: 6,
            source_dim: 30,
            target_dim: 20,
            class_sep: 1.5,
            noise_std: 0.5,
            n_source: 900,
            n_target: 600,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(HfaError::input("latent_dim must be positive"));
        }
        if self.num_classes < 2 {
            return Err(HfaError::input("num_classes must be at least 2"));
        }
        if self.source_dim < self.latent_dim || self.target_dim < self.latent_dim {
            return Err(HfaError::input(format!(
                "domain dimensions ({}, {}) must be at least latent_dim {} so the embeddings are injective",
                self.source_dim, self.target_dim, self.latent_dim
            )));
        }
        if !(self.class_sep > 0.0 && self.class_sep.is_finite()) {
            return Err(HfaError::input(format!(
                "class_sep must be positive, got {}",
                self.class_sep
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(HfaError::input(format!(
                "noise_std must be nonnegative, got {}",
                self.noise_std
            )));
        }
        Ok(())
    }
}

fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * rng.gaussian())
}

/// Draws a Gaussian embedding, redrawing in the (measure-zero) rank-deficient case.
fn embedding(rng: &mut SeededRng, rows: usize, latent: usize) -> Result<Matrix> {
    let scale = 1.0 / (latent as f64).sqrt();
    loop {
        let a = gaussian_matrix(rng, rows, latent, scale);
        let gram = SymMatrix::from_matrix(a.tr_matmul(&a)?)?;
        if min_eigenvalue(&gram)? > 1e-8 * gram.trace() / latent as f64 {
            return Ok(a);
        }
    }
}

fn draw_domain(
    rng: &mut SeededRng,
    spec: &SyntheticSpec,
    means: &Matrix,
    map: &Matrix,
    count: usize,
    name: &str,
) -> Result<Dataset> {
    let mut features = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let class = rng.below(spec.num_classes);
        let z: Vec<f64> = means
            .row(class)
            .iter()
            .map(|m| m + rng.gaussian())
            .collect();
        let mut x = map.matvec(&z)?;
        if spec.noise_std > 0.0 {
            for v in &mut x {
                *v += spec.noise_std * rng.gaussian();
            }
        }
        features.push(x);
        labels.push(class as u32);
    }
    Dataset::new(name, map.rows(), features, labels)
}

/// Returns `(source, target)` drawn from the latent model described by `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let means = gaussian_matrix(&mut rng, spec.num_classes, spec.latent_dim, spec.class_sep);
    let a_s = embedding(&mut rng, spec.source_dim, spec.latent_dim)?;
    let a_t = embedding(&mut rng, spec.target_dim, spec.latent_dim)?;
    let source = draw_domain(&mut rng, spec, &means, &a_s, spec.n_source, "source")?;
    let target = draw_domain(&mut rng, spec, &means, &a_t, spec.n_target, "target")?;
    Ok((source, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = SyntheticSpec {
            n_source: 40,
            n_target: 30,
            ..SyntheticSpec::default()
        };
        let (s1, t1) = generate_synthetic(&spec).unwrap();
        let (s2, t2) = generate_synthetic(&spec).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(t1, t2);
        assert_eq!((s1.dim(), t1.dim()), (30, 20));
        assert_eq!((s1.len(), t1.len()), (40, 30));
        let (s3, _) = generate_synthetic(&SyntheticSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn rejects_narrow_domains() {
        let spec = SyntheticSpec {
            target_dim: 3,
            ..SyntheticSpec::default()
        };
        assert!(matches!(generate_synthetic(&spec), Err(HfaError::Input(_))));
        assert!(generate_synthetic(&SyntheticSpec {
            num_classes: 1,
            ..SyntheticSpec::default()
        })
        .is_err());
    }

    #[test]
    fn uniform_class_priors() {
        let spec = SyntheticSpec {
            n_source: 10_000,
            n_target: 0,
            num_classes: 4,
            ..SyntheticSpec::default()
        };
        let (s, _) = generate_synthetic(&spec).unwrap();
        for (_, count) in s.class_counts() {
            // 4 binomial standard deviations around 2500
            assert!((count as f64 - 2500.0).abs() < 4.0 * (10_000.0f64 * 0.25 * 0.75).sqrt());
        }
    }
}
