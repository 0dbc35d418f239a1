//! Datasets, file formats, PCA, the per-class split protocol and synthetic data.

mod dataset;
mod formats;
mod pca;
mod protocol;
pub mod rng;
mod synthetic;

pub use dataset::{Dataset, Standardizer};
pub use formats::{
    dense_csv_string, load_dataset, load_dense_csv, load_sparse, parse_dense_csv, parse_sparse,
    save_dense_csv,
};
pub use pca::{pca_fit, pca_fit_transform, PcaBasis};
pub use protocol::{check_feasible, sample_protocol, split_indices};
pub use rng::SeededRng;
pub use synthetic::{generate_synthetic, SyntheticSpec};
