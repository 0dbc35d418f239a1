use std::sync::Arc;

use super::metric::{MetricFactors, TransformMetric};
use super::train::Outcome;
use super::HfaConfig;
use crate::error::{HfaError, Result};
use crate::linalg::{
    default_ridge, dot, gram_matrix, kernel_column, median_heuristic_gamma, spectral_compose,
    sym_eigen, KernelFamily, KernelSpec, SymMatrix,
};
use crate::svm::DualSolution;

/// Square-root factors of one domain's Gram matrix.
///
/// With ridge `e` and `K = V diag(w) V'` (eigenvalues clipped at zero):
/// `root = V diag(w / sqrt(w + e)) V'` and `inv_root = V diag(1 / sqrt(w + e)) V'`.
/// Hence `inv_root * K = root`, which makes the predictor reproduce the
/// training kernel exactly at training points, and `root^2 = K + O(e)`.
#[derive(Clone, Debug)]
pub struct DomainRoots {
    pub root: SymMatrix,
    pub inv_root: SymMatrix,
    pub ridge: f64,
}

impl DomainRoots {
    pub fn new(gram: &SymMatrix, ridge: Option<f64>) -> Result<Self> {
        let ridge = ridge.unwrap_or_else(|| default_ridge(gram));
        if !(ridge > 0.0) {
            return Err(HfaError::input(format!(
                "ridge must be positive, got {ridge}"
            )));
        }
        let eig = sym_eigen(gram)?;
        let clipped: Vec<f64> = eig.values.iter().map(|&w| w.max(0.0)).collect();
        let root_w: Vec<f64> = clipped.iter().map(|&w| w / (w + ridge).sqrt()).collect();
        let inv_w: Vec<f64> = clipped.iter().map(|&w| 1.0 / (w + ridge).sqrt()).collect();
        Ok(DomainRoots {
            root: spectral_compose(&eig.vectors, &root_w),
            inv_root: spectral_compose(&eig.vectors, &inv_w),
            ridge,
        })
    }
}

/// Training vectors, per-domain kernels and Gram factors shared by every class model.
#[derive(Clone, Debug)]
pub struct KernelContext {
    source_x: Vec<Vec<f64>>,
    target_x: Vec<Vec<f64>>,
    source_kernel: KernelSpec,
    target_kernel: KernelSpec,
    source_ridge: f64,
    target_ridge: f64,
    kt_inv_sqrt: SymMatrix,
    factors: MetricFactors,
}

fn resolve_kernel(family: KernelFamily, gamma: Option<f64>, xs: &[Vec<f64>]) -> Result<KernelSpec> {
    match family {
        KernelFamily::Linear => Ok(KernelSpec::Linear),
        KernelFamily::Rbf => KernelSpec::rbf(match gamma {
            Some(g) => g,
            None => median_heuristic_gamma(xs)?,
        }),
    }
}

impl KernelContext {
    pub fn build(source_x: &[Vec<f64>], target_x: &[Vec<f64>], cfg: &HfaConfig) -> Result<Self> {
        cfg.validate()?;
        let source_kernel = resolve_kernel(cfg.kernel.family, cfg.kernel.gamma, source_x)?;
        let target_kernel = resolve_kernel(cfg.kernel.family, cfg.kernel.gamma, target_x)?;
        KernelContext::with_kernels(source_x, target_x, source_kernel, target_kernel, cfg.ridge)
    }

    pub fn with_kernels(
        source_x: &[Vec<f64>],
        target_x: &[Vec<f64>],
        source_kernel: KernelSpec,
        target_kernel: KernelSpec,
        ridge: Option<f64>,
    ) -> Result<Self> {
        let ks = gram_matrix(&source_kernel, source_x)?;
        let kt = gram_matrix(&target_kernel, target_x)?;
        let source_roots = DomainRoots::new(&ks, ridge)?;
        let target_roots = DomainRoots::new(&kt, ridge)?;
        let factors = MetricFactors::kernelized(&ks, &kt, &source_roots.root, &target_roots.root)?;
        Ok(KernelContext {
            source_x: source_x.to_vec(),
            target_x: target_x.to_vec(),
            source_kernel,
            target_kernel,
            source_ridge: source_roots.ridge,
            target_ridge: target_roots.ridge,
            kt_inv_sqrt: target_roots.inv_root,
            factors,
        })
    }

    /// Reassembles a context from stored factors; Gram matrices are recomputed from the vectors.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        source_x: Vec<Vec<f64>>,
        target_x: Vec<Vec<f64>>,
        source_kernel: KernelSpec,
        target_kernel: KernelSpec,
        ks_sqrt: SymMatrix,
        kt_sqrt: SymMatrix,
        kt_inv_sqrt: SymMatrix,
        ridges: (f64, f64),
    ) -> Result<Self> {
        let ks = gram_matrix(&source_kernel, &source_x)?;
        let kt = gram_matrix(&target_kernel, &target_x)?;
        if kt_inv_sqrt.order() != kt.order() {
            return Err(HfaError::input(
                "target inverse root does not match target sample count",
            ));
        }
        let factors = MetricFactors::kernelized(&ks, &kt, &ks_sqrt, &kt_sqrt)?;
        Ok(KernelContext {
            source_x,
            target_x,
            source_kernel,
            target_kernel,
            source_ridge: ridges.0,
            target_ridge: ridges.1,
            kt_inv_sqrt,
            factors,
        })
    }

    pub fn source_x(&self) -> &[Vec<f64>] {
        &self.source_x
    }

    pub fn target_x(&self) -> &[Vec<f64>] {
        &self.target_x
    }

    pub fn n_source(&self) -> usize {
        self.source_x.len()
    }

    pub fn n_target(&self) -> usize {
        self.target_x.len()
    }

    pub fn source_dim(&self) -> usize {
        self.source_x[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.target_x[0].len()
    }

    pub fn source_kernel(&self) -> KernelSpec {
        self.source_kernel
    }

    pub fn target_kernel(&self) -> KernelSpec {
        self.target_kernel
    }

    pub fn ridges(&self) -> (f64, f64) {
        (self.source_ridge, self.target_ridge)
    }

    pub fn ks(&self) -> &SymMatrix {
        self.factors.base_source()
    }

    pub fn kt(&self) -> &SymMatrix {
        self.factors.base_target()
    }

    pub fn ks_sqrt(&self) -> SymMatrix {
        SymMatrix::from_matrix(self.factors.lift_source().clone()).expect("square root factor")
    }

    pub fn kt_sqrt(&self) -> SymMatrix {
        SymMatrix::from_matrix(self.factors.lift_target().clone()).expect("square root factor")
    }

    pub fn kt_inv_sqrt(&self) -> &SymMatrix {
        &self.kt_inv_sqrt
    }

    pub fn factors(&self) -> &MetricFactors {
        &self.factors
    }

    pub fn target_kernel_column(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.target_dim() {
            return Err(HfaError::input(format!(
                "target sample has dimension {}, expected {}",
                x.len(),
                self.target_dim()
            )));
        }
        kernel_column(&self.target_kernel, &self.target_x, x)
    }
}

/// Binary kernelized model.
///
/// The target decision function is
/// `f(x) = (b_s'L_s' + b_t'L_t') H [0; I] K_t^{-1/2} k_t(x) + b_t'k_t(x) + bias`,
/// collapsed at construction into one coefficient per target training point.
#[derive(Clone, Debug)]
pub struct HfaModel {
    context: Arc<KernelContext>,
    labels: Vec<f64>,
    metric: TransformMetric,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    bias: f64,
    objective_trace: Vec<f64>,
    converged: bool,
    target_coef: Vec<f64>,
}

impl HfaModel {
    pub(crate) fn from_training(
        context: Arc<KernelContext>,
        labels: Vec<f64>,
        outcome: Outcome,
    ) -> Result<Self> {
        let Outcome {
            metric,
            solution,
            objective_trace,
            converged,
        } = outcome;
        HfaModel::from_parts(
            context,
            labels,
            metric,
            solution,
            objective_trace,
            converged,
        )
    }

    pub fn from_parts(
        context: Arc<KernelContext>,
        labels: Vec<f64>,
        metric: TransformMetric,
        solution: DualSolution,
        objective_trace: Vec<f64>,
        converged: bool,
    ) -> Result<Self> {
        let factors = context.factors();
        if labels.len() != factors.n() || solution.beta.len() != factors.n() {
            return Err(HfaError::input(
                "model vectors do not match the training context",
            ));
        }
        if metric.order() != factors.metric_order() {
            return Err(HfaError::input(
                "metric order does not match the training context",
            ));
        }
        let v = factors.lifted(&solution.beta)?;
        let hv = metric.matrix().matvec(&v)?;
        let ns = factors.n_source();
        let mut target_coef = context.kt_inv_sqrt().matvec(&hv[ns..])?;
        for (c, b) in target_coef.iter_mut().zip(&solution.beta[ns..]) {
            *c += b;
        }
        let DualSolution {
            alpha, beta, bias, ..
        } = solution;
        Ok(HfaModel {
            context,
            labels,
            metric,
            alpha,
            beta,
            bias,
            objective_trace,
            converged,
            target_coef,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let k = self.context.target_kernel_column(x)?;
        Ok(dot(&self.target_coef, &k) + self.bias)
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// `K_H beta + bias` over the training points, in source-then-target order.
    pub fn training_decision_values(&self) -> Result<Vec<f64>> {
        let k = self.augmented_kernel()?;
        let mut f = k.matvec(&self.beta)?;
        f.iter_mut().for_each(|v| *v += self.bias);
        Ok(f)
    }

    pub fn augmented_kernel(&self) -> Result<SymMatrix> {
        self.context
            .factors()
            .augmented_kernel(self.metric.matrix())
    }

    pub fn context(&self) -> &Arc<KernelContext> {
        &self.context
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn metric(&self) -> &TransformMetric {
        &self.metric
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_source(&self) -> &[f64] {
        &self.beta[..self.context.n_source()]
    }

    pub fn beta_target(&self) -> &[f64] {
        &self.beta[self.context.n_source()..]
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Min-max objective recorded after each SVM solve.
    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("nonempty trace")
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Number of SVM solves, i.e. the objective trace length.
    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }

    /// Per-target-point coefficients `K_t^{-1/2} (H v)_t + b_t` used by [`HfaModel::predict`].
    pub fn target_coefficients(&self) -> &[f64] {
        &self.target_coef
    }
}

/// Binary model of the linear formulation; `f(x) = w'x + bias` with
/// `w = (H v)_t + X_t b_t`.
#[derive(Clone, Debug)]
pub struct LinearHfaModel {
    source_x: Vec<Vec<f64>>,
    target_x: Vec<Vec<f64>>,
    labels: Vec<f64>,
    metric: TransformMetric,
    beta: Vec<f64>,
    bias: f64,
    objective_trace: Vec<f64>,
    converged: bool,
    weight: Vec<f64>,
}

impl LinearHfaModel {
    pub(crate) fn from_training(
        source_x: Vec<Vec<f64>>,
        target_x: Vec<Vec<f64>>,
        factors: &MetricFactors,
        labels: Vec<f64>,
        outcome: Outcome,
    ) -> Result<Self> {
        let beta = outcome.solution.beta;
        let v = factors.lifted(&beta)?;
        let hv = outcome.metric.matrix().matvec(&v)?;
        let ns = factors.n_source();
        let ds = factors.source_rows();
        let mut weight = hv[ds..].to_vec();
        let xt_bt = factors.lift_target().matvec(&beta[ns..])?;
        for (w, x) in weight.iter_mut().zip(&xt_bt) {
            *w += x;
        }
        Ok(LinearHfaModel {
            source_x,
            target_x,
            labels,
            metric: outcome.metric,
            beta,
            bias: outcome.solution.bias,
            objective_trace: outcome.objective_trace,
            converged: outcome.converged,
            weight,
        })
    }

    pub fn predict_linear(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weight.len() {
            return Err(HfaError::input(format!(
                "target sample has dimension {}, expected {}",
                x.len(),
                self.weight.len()
            )));
        }
        Ok(dot(&self.weight, x) + self.bias)
    }

    pub fn factors(&self) -> Result<MetricFactors> {
        let xs = crate::linalg::Matrix::from_columns(&self.source_x)?;
        let xt = crate::linalg::Matrix::from_columns(&self.target_x)?;
        MetricFactors::linear(&xs, &xt)
    }

    pub fn training_decision_values(&self) -> Result<Vec<f64>> {
        let k = self.factors()?.augmented_kernel(self.metric.matrix())?;
        let mut f = k.matvec(&self.beta)?;
        f.iter_mut().for_each(|v| *v += self.bias);
        Ok(f)
    }

    pub fn target_x(&self) -> &[Vec<f64>] {
        &self.target_x
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn metric(&self) -> &TransformMetric {
        &self.metric
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("nonempty trace")
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }
}
