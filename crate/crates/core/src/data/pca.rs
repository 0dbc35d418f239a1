use super::dataset::Dataset;
use crate::error::{HfaError, Result};
use crate::linalg::{dot, sym_eigen, SymMatrix};

/// Eigenvalues below this fraction of the largest are treated as zero when counting energy.
const NEGLIGIBLE: f64 = 1e-12;

/// Centering vector plus leading covariance eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    /// One unit-norm principal direction per entry, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalues of the kept components.
    pub variances: Vec<f64>,
    /// Fraction of total variance the kept components carry.
    pub retained: f64,
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(HfaError::input(format!(
                "PCA basis expects dimension {}, got {}",
                self.dim(),
                x.len()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }

    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        if d.dim() != self.dim() {
            return Err(HfaError::input(format!(
                "PCA basis expects dimension {}, got {}",
                self.dim(),
                d.dim()
            )));
        }
        d.map_features(self.output_dim(), |x| {
            self.project(x).expect("dimension checked")
        })
    }
}

/// Fits PCA on the centered sample covariance and keeps the fewest leading
/// components whose eigenvalue share reaches `energy`.
pub fn pca_fit(d: &Dataset, energy: f64) -> Result<PcaBasis> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(HfaError::input(format!(
            "energy must lie in (0, 1], got {energy}"
        )));
    }
    if d.len() < 2 {
        return Err(HfaError::input("PCA needs at least 2 samples"));
    }
    let n = d.len();
    let dim = d.dim();
    let mut mean = vec![0.0; dim];
    for x in d.features() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = d
        .features()
        .iter()
        .map(|x| x.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();
    let cov = SymMatrix::from_upper_fn(dim, |i, j| {
        centered.iter().map(|x| x[i] * x[j]).sum::<f64>() / (n - 1) as f64
    });

    let eig = sym_eigen(&cov)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return Err(HfaError::Degenerate("PCA input has zero variance".into()));
    }
    let values: Vec<f64> = eig
        .values
        .iter()
        .map(|&w| if w > NEGLIGIBLE * top { w } else { 0.0 })
        .collect();
    let total: f64 = values.iter().sum();
    let mut k = 0;
    let mut kept = 0.0;
    while k < values.len() && values[k] > 0.0 && kept < energy * total * (1.0 - 1e-12) {
        kept += values[k];
        k += 1;
    }
    Ok(PcaBasis {
        mean,
        components: (0..k).map(|c| eig.vectors.column(c)).collect(),
        variances: values[..k].to_vec(),
        retained: kept / total,
    })
}

pub fn pca_fit_transform(d: &Dataset, energy: f64) -> Result<(Dataset, PcaBasis)> {
    let basis = pca_fit(d, energy)?;
    Ok((basis.transform(d)?, basis))
}
