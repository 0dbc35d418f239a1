use std::fmt::Write as _;

use super::{accuracy, svm_t_baseline, train_multiclass};
use crate::data::{check_feasible, sample_protocol, Dataset, Standardizer};
use crate::error::{HfaError, Result};
use crate::hfa::HfaConfig;

/// Protocol settings for [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub hfa: HfaConfig,
    /// Labeled target samples drawn per class; the rest of the target data is the test set.
    pub per_class_target: usize,
    /// Source samples drawn per class; `None` uses all source data in every trial.
    pub per_class_source: Option<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Standardize each domain with statistics of its training split.
    pub standardize: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            hfa: HfaConfig::default(),
            per_class_target: 3,
            per_class_source: None,
            trials: 10,
            base_seed: 0,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Hash of the target train/test partition each arm received.
    pub hfa_split_hash: u64,
    pub svm_t_split_hash: u64,
    pub hfa_accuracy: f64,
    pub svm_t_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub name: String,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample (n - 1) standard deviation; 0 for a single trial.
    pub std: f64,
}

impl MethodSummary {
    fn new(name: &str, accuracies: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&accuracies);
        MethodSummary {
            name: name.to_string(),
            accuracies,
            mean,
            std,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    /// `(key, value)` pairs echoing the run's configuration.
    pub config: Vec<(String, String)>,
    pub trials: Vec<TrialRecord>,
    pub methods: Vec<MethodSummary>,
    pub single_trial: bool,
}

impl ExperimentReport {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn hfa(&self) -> &MethodSummary {
        &self.methods[0]
    }

    pub fn svm_t(&self) -> &MethodSummary {
        &self.methods[1]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[config]\n");
        for (k, v) in &self.config {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out.push_str("\n[trials]\ntrial,seed,hfa_split_hash,svm_t_split_hash,hfa,svm_t\n");
        for t in &self.trials {
            writeln!(
                out,
                "{},{},{:016x},{:016x},{},{}",
                t.trial,
                t.seed,
                t.hfa_split_hash,
                t.svm_t_split_hash,
                t.hfa_accuracy,
                t.svm_t_accuracy
            )
            .unwrap();
        }
        out.push_str("\n[summary]\n");
        for m in &self.methods {
            writeln!(out, "{} = {:.6} ± {:.6}", m.name, m.mean, m.std).unwrap();
        }
        writeln!(out, "single_trial = {}", self.single_trial).unwrap();
        out
    }
}

/// Mean and sample standard deviation; the deviation of fewer than two values is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// 64-bit FNV-1a over the labels and feature bits of a train/test partition.
pub fn split_hash(train: &Dataset, test: &Dataset) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for part in [train, test] {
        eat(&(part.len() as u64).to_le_bytes());
        for (x, y) in part.features().iter().zip(part.labels()) {
            eat(&y.to_le_bytes());
            for v in x {
                eat(&v.to_bits().to_le_bytes());
            }
        }
    }
    h
}

fn config_echo(spec: &ExperimentSpec, source: &Dataset, target: &Dataset) -> Vec<(String, String)> {
    let cfg = &spec.hfa;
    let mut echo = vec![
        ("kernel.family", cfg.kernel.family.to_string()),
        (
            "kernel.gamma",
            cfg.kernel
                .gamma
                .map_or("median".to_string(), |g| g.to_string()),
        ),
        ("hfa.C", cfg.c.to_string()),
        ("hfa.lambda", cfg.lambda.to_string()),
        ("hfa.t_max", cfg.t_max.to_string()),
        ("hfa.conv_tol", cfg.conv_tol.to_string()),
        (
            "protocol.per_class_target",
            spec.per_class_target.to_string(),
        ),
        (
            "protocol.per_class_source",
            spec.per_class_source
                .map_or("all".to_string(), |n| n.to_string()),
        ),
        ("protocol.trials", spec.trials.to_string()),
        ("protocol.base_seed", spec.base_seed.to_string()),
        ("data.standardize", spec.standardize.to_string()),
    ];
    echo.push(("source.samples", source.len().to_string()));
    echo.push(("source.dim", source.dim().to_string()));
    echo.push(("target.samples", target.len().to_string()));
    echo.push(("target.dim", target.dim().to_string()));
    echo.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Checks every precondition of [`run_experiment`] without training anything.
pub fn check_experiment(source: &Dataset, target: &Dataset, spec: &ExperimentSpec) -> Result<()> {
    spec.hfa.validate()?;
    if spec.trials == 0 {
        return Err(HfaError::input("trials must be at least 1"));
    }
    if source.dim() == 0 || target.dim() == 0 {
        return Err(HfaError::input("datasets must have positive dimension"));
    }
    check_feasible(target, spec.per_class_target)?;
    if target
        .class_counts()
        .values()
        .all(|&c| c == spec.per_class_target)
    {
        return Err(HfaError::Infeasible(format!(
            "taking {} target samples per class leaves no test data",
            spec.per_class_target
        )));
    }
    if target.classes().len() < 2 {
        return Err(HfaError::Infeasible(
            "target data has fewer than 2 classes".into(),
        ));
    }
    match spec.per_class_source {
        Some(n) => check_feasible(source, n),
        None if source.is_empty() => Err(HfaError::Infeasible("source dataset is empty".into())),
        None => Ok(()),
    }
}

/// Repeats the split/train/evaluate cycle `trials` times with seeds `base_seed + trial`.
///
/// Each trial draws the target split (and the source subsample, if requested)
/// once and hands the same partition to both the HFA and the target-only SVM arm.
/// Feasibility of every split is checked before any training starts.
pub fn run_experiment(
    source: &Dataset,
    target: &Dataset,
    spec: &ExperimentSpec,
) -> Result<ExperimentReport> {
    check_experiment(source, target, spec)?;

    let mut trials = Vec::with_capacity(spec.trials);
    for trial in 0..spec.trials {
        let seed = spec.base_seed.wrapping_add(trial as u64);
        let (target_train, target_test) = sample_protocol(target, spec.per_class_target, seed)?;
        let source_train = match spec.per_class_source {
            Some(n) => sample_protocol(source, n, seed)?.0,
            None => source.clone(),
        };

        let (source_train, target_train, target_test) = if spec.standardize {
            let t = Standardizer::fit(&target_train)?;
            (
                Standardizer::fit(&source_train)?.apply(&source_train)?,
                t.apply(&target_train)?,
                t.apply(&target_test)?,
            )
        } else {
            (source_train, target_train, target_test)
        };

        let hfa_split_hash = split_hash(&target_train, &target_test);
        let hfa = train_multiclass(&source_train, &target_train, &spec.hfa)?;
        let hfa_accuracy = accuracy(&hfa, &target_test)?;

        let svm_t_split_hash = split_hash(&target_train, &target_test);
        let svm = svm_t_baseline(&target_train, &spec.hfa)?;
        let svm_t_accuracy = accuracy(&svm, &target_test)?;

        trials.push(TrialRecord {
            trial,
            seed,
            hfa_split_hash,
            svm_t_split_hash,
            hfa_accuracy,
            svm_t_accuracy,
        });
    }

    let methods = vec![
        MethodSummary::new("hfa", trials.iter().map(|t| t.hfa_accuracy).collect()),
        MethodSummary::new("svm_t", trials.iter().map(|t| t.svm_t_accuracy).collect()),
    ];
    Ok(ExperimentReport {
        config: config_echo(spec, source, target),
        single_trial: spec.trials == 1,
        trials,
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn hash_sees_partition() {
        let d = Dataset::new("t", 1, vec![vec![1.0], vec![2.0]], vec![0, 1]).unwrap();
        let a = d.subset(&[0]);
        let b = d.subset(&[1]);
        assert_eq!(split_hash(&a, &b), split_hash(&a, &b));
        assert_ne!(split_hash(&a, &b), split_hash(&b, &a));
    }
}
