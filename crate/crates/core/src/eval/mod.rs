//! One-vs-rest wrapping, accuracy and the repeated-split experiment runner.

mod experiment;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{HfaError, Result};
use crate::hfa::{train_in_context, HfaConfig, IterationRecord, KernelContext, ModelBundle};
use crate::linalg::{gram_matrix, kernel_column, KernelSpec};
use crate::svm::{solve_dual, DualProblem, DualSolution};

pub use experiment::{
    check_experiment, mean_std, run_experiment, split_hash, ExperimentReport, ExperimentSpec,
    MethodSummary, TrialRecord,
};

/// Anything that scores a target vector against a fixed, ascending list of classes.
pub trait Classifier {
    fn classes(&self) -> Vec<u32>;
    fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl Classifier for ModelBundle {
    fn classes(&self) -> Vec<u32> {
        ModelBundle::classes(self)
    }

    fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        ModelBundle::decision_values(self, x)
    }
}

/// Class with the largest value; ties go to the earlier (smaller) class.
pub fn argmax_class(classes: &[u32], values: &[f64]) -> Result<u32> {
    if classes.is_empty() || classes.len() != values.len() {
        return Err(HfaError::input(format!(
            "{} classes but {} decision values",
            classes.len(),
            values.len()
        )));
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    Ok(classes[best])
}

pub fn classify(models: &dyn Classifier, x: &[f64]) -> Result<u32> {
    argmax_class(&models.classes(), &models.decision_values(x)?)
}

/// Fraction of `test` samples whose predicted class equals the label.
pub fn accuracy(models: &dyn Classifier, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(HfaError::input("accuracy needs a nonempty test set"));
    }
    let classes = models.classes();
    let mut correct = 0usize;
    for (x, &y) in test.features().iter().zip(test.labels()) {
        if argmax_class(&classes, &models.decision_values(x)?)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

fn require_two_target_classes(target: &Dataset) -> Result<()> {
    if target.classes().len() < 2 {
        return Err(HfaError::Degenerate(format!(
            "target training data has {} class(es); at least 2 are required",
            target.classes().len()
        )));
    }
    Ok(())
}

/// Trains one HFA model per class (that class against the rest) over a shared kernel context.
pub fn train_multiclass(
    source: &Dataset,
    target: &Dataset,
    cfg: &HfaConfig,
) -> Result<ModelBundle> {
    train_multiclass_with(source, target, cfg, &mut |_, _| {})
}

/// As [`train_multiclass`], reporting every outer iteration together with its class.
pub fn train_multiclass_with(
    source: &Dataset,
    target: &Dataset,
    cfg: &HfaConfig,
    observer: &mut dyn FnMut(u32, &IterationRecord<'_>),
) -> Result<ModelBundle> {
    require_two_target_classes(target)?;
    if source.is_empty() {
        return Err(HfaError::input("source training data is empty"));
    }
    let classes: BTreeSet<u32> = source
        .classes()
        .into_iter()
        .chain(target.classes())
        .collect();
    let context = Arc::new(KernelContext::build(
        source.features(),
        target.features(),
        cfg,
    )?);
    let mut entries = Vec::with_capacity(classes.len());
    for class in classes {
        let model = train_in_context(
            &context,
            &source.binary_labels(class),
            &target.binary_labels(class),
            cfg,
            &mut |record| observer(class, record),
        )?;
        entries.push((class, model));
    }
    ModelBundle::new(entries)
}

/// One-vs-rest SVMs on the target Gram matrix alone.
#[derive(Clone, Debug)]
pub struct SvmBundle {
    kernel: KernelSpec,
    train_x: Vec<Vec<f64>>,
    entries: Vec<(u32, DualSolution)>,
}

impl SvmBundle {
    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn solutions(&self) -> &[(u32, DualSolution)] {
        &self.entries
    }
}

impl Classifier for SvmBundle {
    fn classes(&self) -> Vec<u32> {
        self.entries.iter().map(|(c, _)| *c).collect()
    }

    fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dim = self.train_x[0].len();
        if x.len() != dim {
            return Err(HfaError::input(format!(
                "target sample has dimension {}, expected {dim}",
                x.len()
            )));
        }
        let k = kernel_column(&self.kernel, &self.train_x, x)?;
        Ok(self
            .entries
            .iter()
            .map(|(_, s)| crate::linalg::dot(&s.beta, &k) + s.bias)
            .collect())
    }
}

/// Target-only baseline. The target kernel is resolved exactly as the HFA
/// context resolves it, so both arms see the same target Gram matrix.
pub fn svm_t_baseline(target: &Dataset, cfg: &HfaConfig) -> Result<SvmBundle> {
    cfg.validate()?;
    require_two_target_classes(target)?;
    let kernel = match cfg.kernel.family {
        crate::linalg::KernelFamily::Linear => KernelSpec::Linear,
        crate::linalg::KernelFamily::Rbf => KernelSpec::rbf(match cfg.kernel.gamma {
            Some(g) => g,
            None => crate::linalg::median_heuristic_gamma(target.features())?,
        })?,
    };
    let gram = gram_matrix(&kernel, target.features())?;
    let mut entries = Vec::new();
    for class in target.classes() {
        let labels = target.binary_labels(class);
        let solution = solve_dual(&DualProblem::new(&gram, &labels, cfg.c)?, cfg.svm_tol)?;
        entries.push((class, solution));
    }
    Ok(SvmBundle {
        kernel,
        train_x: target.features().to_vec(),
        entries,
    })
}
