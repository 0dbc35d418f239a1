//! TOML run configuration.
//!
//! ```toml
//! [kernel]
//! family = "rbf"          # or "linear"
//! gamma = 0.5             # omit for the per-domain median heuristic
//!
//! [hfa]
//! C = 1.0
//! lambda = 1.0
//! t_max = 100
//! conv_tol = 1e-5
//!
//! [protocol]
//! per_class_target = [5, 7, 10]   # or a single integer
//! per_class_source = 20           # omit to use all source data
//! trials = 10
//! base_seed = 0
//!
//! [data]
//! standardize = false
//!
//! [paths]
//! source = "source.csv"
//! target = "target.csv"
//! test = "test.csv"
//! model = "model.txt"
//! out = "out"
//!
//! [synthetic]
//! latent_dim = 5
//! num_classes = 6
//! source_dim = 30
//! target_dim = 20
//! class_sep = 1.5
//! noise_std = 0.5
//! n_source = 900
//! n_target = 600
//! seed = 0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::data::SyntheticSpec;
use crate::error::{HfaError, Result};
use crate::eval::ExperimentSpec;
use crate::hfa::{HfaConfig, KernelChoice};
use crate::linalg::KernelFamily;

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub hfa: HfaSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: Option<KernelFamily>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HfaSection {
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub t_max: Option<usize>,
    pub conv_tol: Option<f64>,
    pub metric_steps: Option<usize>,
    pub outer_backtracks: Option<usize>,
    pub svm_tol: Option<f64>,
    pub ridge: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(n) => vec![*n],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub per_class_target: Option<OneOrMany>,
    pub per_class_source: Option<usize>,
    pub trials: Option<usize>,
    pub base_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub standardize: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub latent_dim: Option<usize>,
    pub num_classes: Option<usize>,
    pub source_dim: Option<usize>,
    pub target_dim: Option<usize>,
    pub class_sep: Option<f64>,
    pub noise_std: Option<f64>,
    pub n_source: Option<usize>,
    pub n_target: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HfaError::Config(format!("{name}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HfaError::io(path, e))?;
        FileConfig::parse(&text, &path.display().to_string())
    }

    /// Training settings; unset keys take the library defaults.
    pub fn hfa_config(&self) -> Result<HfaConfig> {
        let d = HfaConfig::default();
        let h = &self.hfa;
        let cfg = HfaConfig {
            c: h.c.unwrap_or(d.c),
            lambda: h.lambda.unwrap_or(d.lambda),
            kernel: KernelChoice {
                family: self.kernel.family.unwrap_or(d.kernel.family),
                gamma: self.kernel.gamma,
            },
            t_max: h.t_max.unwrap_or(d.t_max),
            conv_tol: h.conv_tol.unwrap_or(d.conv_tol),
            ridge: h.ridge,
            svm_tol: h.svm_tol.unwrap_or(d.svm_tol),
            metric_steps: h.metric_steps.unwrap_or(d.metric_steps),
            outer_backtracks: h.outer_backtracks.unwrap_or(d.outer_backtracks),
            line_search: d.line_search,
        };
        cfg.validate()
            .map_err(|e| HfaError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// One experiment spec per requested target count.
    pub fn experiment_specs(&self) -> Result<Vec<ExperimentSpec>> {
        let hfa = self.hfa_config()?;
        let d = ExperimentSpec::default();
        let counts = self
            .protocol
            .per_class_target
            .as_ref()
            .map_or(vec![d.per_class_target], OneOrMany::to_vec);
        if counts.is_empty() || counts.contains(&0) {
            return Err(HfaError::Config(
                "protocol.per_class_target must list positive counts".into(),
            ));
        }
        let trials = self.protocol.trials.unwrap_or(d.trials);
        if trials == 0 {
            return Err(HfaError::Config(
                "protocol.trials must be at least 1".into(),
            ));
        }
        if self.protocol.per_class_source == Some(0) {
            return Err(HfaError::Config(
                "protocol.per_class_source must be positive".into(),
            ));
        }
        Ok(counts
            .into_iter()
            .map(|m| ExperimentSpec {
                hfa: hfa.clone(),
                per_class_target: m,
                per_class_source: self.protocol.per_class_source,
                trials,
                base_seed: self.protocol.base_seed.unwrap_or(d.base_seed),
                standardize: self.data.standardize.unwrap_or(false),
            })
            .collect())
    }

    pub fn synthetic_spec(&self) -> Result<SyntheticSpec> {
        let d = SyntheticSpec::default();
        let s = &self.synthetic;
        let spec = SyntheticSpec {
            latent_dim: s.latent_dim.unwrap_or(d.latent_dim),
            num_classes: s.num_classes.unwrap_or(d.num_classes),
            source_dim: s.source_dim.unwrap_or(d.source_dim),
            target_dim: s.target_dim.unwrap_or(d.target_dim),
            class_sep: s.class_sep.unwrap_or(d.class_sep),
            noise_std: s.noise_std.unwrap_or(d.noise_std),
            n_source: s.n_source.unwrap_or(d.n_source),
            n_target: s.n_target.unwrap_or(d.n_target),
            seed: s.seed.unwrap_or(d.seed),
        };
        spec.validate()
            .map_err(|e| HfaError::Config(e.to_string()))?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = FileConfig::parse("", "x").unwrap();
        assert_eq!(cfg.hfa_config().unwrap(), HfaConfig::default());
        let specs = cfg.experiment_specs().unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].trials, 10);
    }

    #[test]
    fn normative_keys() {
        let text = r#"
            [kernel]
            family = "linear"
            [hfa]
            C = 2.0
            lambda = 100.0
            t_max = 50
            conv_tol = 1e-4
            [protocol]
            per_class_target = [5, 7, 10, 15, 20]
            trials = 3
            base_seed = 11
            [paths]
            source = "a.csv"
        "#;
        let cfg = FileConfig::parse(text, "x").unwrap();
        let h = cfg.hfa_config().unwrap();
        assert_eq!((h.c, h.lambda, h.t_max, h.conv_tol), (2.0, 100.0, 50, 1e-4));
        assert_eq!(h.kernel.family, KernelFamily::Linear);
        let specs = cfg.experiment_specs().unwrap();
        assert_eq!(
            specs.iter().map(|s| s.per_class_target).collect::<Vec<_>>(),
            vec![5, 7, 10, 15, 20]
        );
        assert_eq!(specs[0].base_seed, 11);
        assert_eq!(cfg.paths.source.as_deref(), Some(Path::new("a.csv")));
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(
            FileConfig::parse("[hfa]\nc = 1.0\n", "x"),
            Err(HfaError::Config(_))
        ));
        let cfg = FileConfig::parse("[hfa]\nlambda = -1.0\n", "x").unwrap();
        assert!(cfg.hfa_config().is_err());
        let cfg = FileConfig::parse("[protocol]\nper_class_target = 4\n", "x").unwrap();
        assert_eq!(cfg.experiment_specs().unwrap()[0].per_class_target, 4);
    }
}
