//! Heterogeneous feature augmentation: augmented feature maps, the augmented
//! kernels, the trace-bounded metric subproblem, the alternating trainer and
//! the target-domain predictor.

mod augment;
pub mod io;
mod metric;
mod model;
mod train;

pub use augment::{augment_source, augment_target, build_kh_kernelized, build_kh_linear};
pub use io::ModelBundle;
pub use metric::{
    backtrack, initial_step, line_search, project_feasible, sdp_closed_form, sdp_gradient,
    sdp_objective, sdp_pgd_step, Feasibility, LineSearchOutcome, LineSearchParams, MetricFactors,
    TransformMetric, FEASIBILITY_TOL,
};
pub use model::{DomainRoots, HfaModel, KernelContext, LinearHfaModel};
pub use train::{hfa_train, train_in_context, train_linear, BinarySamples, IterationRecord};

use crate::error::{HfaError, Result};
use crate::linalg::KernelFamily;

/// Kernel family plus an optional bandwidth shared by both domains.
///
/// With `gamma: None` each domain gets `1 / median ||x_i - x_j||^2` over its own training pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelChoice {
    pub family: KernelFamily,
    pub gamma: Option<f64>,
}

impl Default for KernelChoice {
    fn default() -> Self {
        KernelChoice {
            family: KernelFamily::Rbf,
            gamma: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HfaConfig {
    /// SVM box constraint.
    pub c: f64,
    /// Trace bound on the metric.
    pub lambda: f64,
    pub kernel: KernelChoice,
    /// Maximum outer iterations (length bound of the objective trace).
    pub t_max: usize,
    /// Relative change of the min-max objective that counts as converged.
    pub conv_tol: f64,
    /// Gram ridge; `None` uses `1e-8 * trace / order` per domain.
    pub ridge: Option<f64>,
    pub svm_tol: f64,
    /// Projected-gradient metric steps per outer iteration.
    pub metric_steps: usize,
    /// Step halvings allowed when a metric update raises the re-solved
    /// objective; 0 accepts every update as is.
    pub outer_backtracks: usize,
    pub line_search: LineSearchParams,
}

impl Default for HfaConfig {
    fn default() -> Self {
        HfaConfig {
            c: 1.0,
            lambda: 1.0,
            kernel: KernelChoice::default(),
            t_max: 100,
            conv_tol: 1e-5,
            ridge: None,
            svm_tol: crate::svm::DEFAULT_TOL,
            metric_steps: 1,
            outer_backtracks: 10,
            line_search: LineSearchParams::default(),
        }
    }
}

impl HfaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(HfaError::input(format!("{name} must be positive, got {v}")))
            }
        };
        positive("C", self.c)?;
        positive("lambda", self.lambda)?;
        positive("conv_tol", self.conv_tol)?;
        positive("svm_tol", self.svm_tol)?;
        if let Some(g) = self.kernel.gamma {
            positive("gamma", g)?;
        }
        if let Some(r) = self.ridge {
            positive("ridge", r)?;
        }
        if self.t_max == 0 {
            return Err(HfaError::input("t_max must be at least 1"));
        }
        if self.metric_steps == 0 {
            return Err(HfaError::input("metric_steps must be at least 1"));
        }
        self.line_search.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = HfaConfig::default();
        assert_eq!(cfg.c, 1.0);
        assert_eq!(cfg.lambda, 1.0);
        assert_eq!(cfg.t_max, 100);
        assert_eq!(cfg.conv_tol, 1e-5);
        assert_eq!(cfg.kernel.family, KernelFamily::Rbf);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = HfaConfig {
            lambda: 0.0,
            ..HfaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = HfaConfig {
            t_max: 0,
            ..HfaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = HfaConfig {
            kernel: KernelChoice {
                family: KernelFamily::Rbf,
                gamma: Some(-1.0),
            },
            ..HfaConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
