//! The transformation metric and the metric subproblem at fixed dual variables:
//!
//! ```text
//! min_H  G(H) = -1/2 b' K_H b    s.t.  H ⪰ 0, trace(H) <= lambda
//! ```
//!
//! `K_H = F + L' H L` where `F` is the block-diagonal base Gram matrix and `L`
//! is block-diagonal with per-domain lift blocks. With `v = L b` this reads
//! `G(H) = -1/2 (b'Fb + v'Hv)`, which is linear in `H`.

use crate::error::{HfaError, Result};
use crate::linalg::{dot, psd_project, sym_eigen, trace_cap, Matrix, SymMatrix};

/// Relative slack allowed on the trace bound and on negative eigenvalues.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// A PSD metric with trace bounded by `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformMetric {
    matrix: SymMatrix,
    lambda: f64,
}

impl TransformMetric {
    /// Wraps `matrix`; rejects a trace above `lambda`. PSD-ness is checked by [`TransformMetric::check_feasible`].
    pub fn new(matrix: SymMatrix, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(HfaError::input(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let tr = matrix.trace();
        if tr > lambda * (1.0 + FEASIBILITY_TOL) {
            return Err(HfaError::input(format!(
                "metric trace {tr} exceeds bound {lambda}"
            )));
        }
        Ok(TransformMetric { matrix, lambda })
    }

    /// `(lambda / order) I`, the alternating solver's starting point.
    pub fn initial(order: usize, lambda: f64) -> Result<Self> {
        if order == 0 {
            return Err(HfaError::input("metric order must be positive"));
        }
        TransformMetric::new(
            SymMatrix::scaled_identity(order, lambda / order as f64),
            lambda,
        )
    }

    pub fn zero(order: usize, lambda: f64) -> Result<Self> {
        TransformMetric::new(SymMatrix::zeros(order), lambda)
    }

    pub(crate) fn from_parts_unchecked(matrix: SymMatrix, lambda: f64) -> Self {
        TransformMetric { matrix, lambda }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut SymMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Smallest eigenvalue and trace; errors if either violates the feasibility tolerance.
    pub fn check_feasible(&self) -> Result<Feasibility> {
        let min_eigenvalue = sym_eigen(&self.matrix)?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        let trace = self.trace();
        let report = Feasibility {
            min_eigenvalue,
            trace,
        };
        if min_eigenvalue < -FEASIBILITY_TOL * trace.abs().max(f64::MIN_POSITIVE)
            || trace > self.lambda * (1.0 + FEASIBILITY_TOL)
        {
            return Err(HfaError::Degenerate(format!(
                "metric infeasible: min eigenvalue {min_eigenvalue}, trace {trace}, bound {}",
                self.lambda
            )));
        }
        Ok(report)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub min_eigenvalue: f64,
    pub trace: f64,
}

/// Base Gram blocks and lift blocks defining `K_H = F + L' H L`.
///
/// Kernelized: `F = blockdiag(K_s, K_t)`, lifts are the per-domain kernel roots.
/// Linear: `F = blockdiag(X_s'X_s, X_t'X_t)`, lifts are the data matrices `X_s`, `X_t`.
#[derive(Clone, Debug)]
pub struct MetricFactors {
    base_source: SymMatrix,
    base_target: SymMatrix,
    /// `m_s x n_s`
    lift_source: Matrix,
    /// `m_t x n_t`
    lift_target: Matrix,
}

impl MetricFactors {
    pub fn new(
        base_source: SymMatrix,
        base_target: SymMatrix,
        lift_source: Matrix,
        lift_target: Matrix,
    ) -> Result<Self> {
        if lift_source.cols() != base_source.order() || lift_target.cols() != base_target.order() {
            return Err(HfaError::input(format!(
                "lift blocks ({}x{}, {}x{}) do not match base orders ({}, {})",
                lift_source.rows(),
                lift_source.cols(),
                lift_target.rows(),
                lift_target.cols(),
                base_source.order(),
                base_target.order()
            )));
        }
        Ok(MetricFactors {
            base_source,
            base_target,
            lift_source,
            lift_target,
        })
    }

    /// Factors for the kernelized formulation: lifts are `K_s^{1/2}` and `K_t^{1/2}`.
    pub fn kernelized(
        ks: &SymMatrix,
        kt: &SymMatrix,
        ks_sqrt: &SymMatrix,
        kt_sqrt: &SymMatrix,
    ) -> Result<Self> {
        if ks.order() != ks_sqrt.order() || kt.order() != kt_sqrt.order() {
            return Err(HfaError::input("kernel roots do not match Gram orders"));
        }
        MetricFactors::new(
            ks.clone(),
            kt.clone(),
            ks_sqrt.as_matrix().clone(),
            kt_sqrt.as_matrix().clone(),
        )
    }

    /// Factors for the linear formulation from column-sample matrices `X_s` (`d_s x n_s`) and `X_t` (`d_t x n_t`).
    pub fn linear(xs: &Matrix, xt: &Matrix) -> Result<Self> {
        let base_source = SymMatrix::from_matrix(xs.tr_matmul(xs)?)?;
        let base_target = SymMatrix::from_matrix(xt.tr_matmul(xt)?)?;
        MetricFactors::new(base_source, base_target, xs.clone(), xt.clone())
    }

    pub fn n_source(&self) -> usize {
        self.base_source.order()
    }

    pub fn n_target(&self) -> usize {
        self.base_target.order()
    }

    /// Number of training points `n_s + n_t`.
    pub fn n(&self) -> usize {
        self.n_source() + self.n_target()
    }

    /// Rows contributed by the source lift (`d_s` or `n_s`).
    pub fn source_rows(&self) -> usize {
        self.lift_source.rows()
    }

    pub fn metric_order(&self) -> usize {
        self.lift_source.rows() + self.lift_target.rows()
    }

    pub fn base_source(&self) -> &SymMatrix {
        &self.base_source
    }

    pub fn base_target(&self) -> &SymMatrix {
        &self.base_target
    }

    pub fn lift_source(&self) -> &Matrix {
        &self.lift_source
    }

    pub fn lift_target(&self) -> &Matrix {
        &self.lift_target
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.n() {
            return Err(HfaError::input(format!(
                "beta has length {}, expected {}",
                beta.len(),
                self.n()
            )));
        }
        Ok(())
    }

    fn check_metric(&self, metric: &SymMatrix) -> Result<()> {
        if metric.order() != self.metric_order() {
            return Err(HfaError::input(format!(
                "metric has order {}, expected {}",
                metric.order(),
                self.metric_order()
            )));
        }
        Ok(())
    }

    /// `v = L_s b_s + L_t b_t`
    pub fn lifted(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        let (bs, bt) = beta.split_at(self.n_source());
        let mut v = self.lift_source.matvec(bs)?;
        v.extend(self.lift_target.matvec(bt)?);
        Ok(v)
    }

    /// `L' w` for a vector in metric space.
    pub fn lift_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_metric_vector(w)?;
        let (ws, wt) = w.split_at(self.source_rows());
        let mut u = self.lift_source.tr_matvec(ws)?;
        u.extend(self.lift_target.tr_matvec(wt)?);
        Ok(u)
    }

    fn check_metric_vector(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.metric_order() {
            return Err(HfaError::input(format!(
                "metric-space vector has length {}, expected {}",
                w.len(),
                self.metric_order()
            )));
        }
        Ok(())
    }

    /// `b' F b`
    pub fn base_quad(&self, beta: &[f64]) -> Result<f64> {
        self.check_beta(beta)?;
        let (bs, bt) = beta.split_at(self.n_source());
        Ok(self.base_source.quad_form(bs)? + self.base_target.quad_form(bt)?)
    }

    pub fn base_kernel(&self) -> SymMatrix {
        SymMatrix::block_diagonal(&self.base_source, &self.base_target)
    }

    /// Full block-diagonal lift `L` (`metric_order x n`).
    pub fn lift_matrix(&self) -> Matrix {
        let (ms, ns) = (self.source_rows(), self.n_source());
        let mut l = Matrix::zeros(self.metric_order(), self.n());
        for i in 0..ms {
            l.row_mut(i)[..ns].copy_from_slice(self.lift_source.row(i));
        }
        for i in 0..self.lift_target.rows() {
            l.row_mut(ms + i)[ns..].copy_from_slice(self.lift_target.row(i));
        }
        l
    }

    /// `L' H L`
    pub fn lifted_metric(&self, metric: &SymMatrix) -> Result<SymMatrix> {
        self.check_metric(metric)?;
        let l = self.lift_matrix();
        let hl = metric.as_matrix().matmul(&l)?;
        SymMatrix::from_matrix(l.tr_matmul(&hl)?)
    }

    /// `K_H = F + L' H L`
    pub fn augmented_kernel(&self, metric: &SymMatrix) -> Result<SymMatrix> {
        self.base_kernel().add(&self.lifted_metric(metric)?)
    }
}

/// `G(H) = -1/2 (b'Fb + v'Hv)`
pub fn sdp_objective(
    beta: &[f64],
    metric: &TransformMetric,
    factors: &MetricFactors,
) -> Result<f64> {
    factors.check_metric(metric.matrix())?;
    let v = factors.lifted(beta)?;
    Ok(-0.5 * (factors.base_quad(beta)? + metric.matrix().quad_form(&v)?))
}

/// `dG/dH = -1/2 v v'`
pub fn sdp_gradient(beta: &[f64], factors: &MetricFactors) -> Result<SymMatrix> {
    let v = factors.lifted(beta)?;
    let mut g = SymMatrix::zeros(v.len());
    g.add_outer(-0.5, &v);
    Ok(g)
}

/// Exact minimizer of `G` over the feasible set: `lambda v v' / ||v||^2`, or zero when `v = 0`.
pub fn sdp_closed_form(
    beta: &[f64],
    lambda: f64,
    factors: &MetricFactors,
) -> Result<TransformMetric> {
    let v = factors.lifted(beta)?;
    let nv2 = dot(&v, &v);
    let mut h = SymMatrix::zeros(v.len());
    if nv2 > 0.0 {
        h.add_outer(lambda / nv2, &v);
        // Pin the trace to lambda exactly; the outer product can drift by an ulp.
        let tr = h.trace();
        if tr > lambda {
            h.scale(lambda / tr);
        }
    }
    TransformMetric::new(h, lambda)
}

/// Projection onto `{H ⪰ 0, trace(H) <= lambda}`: eigenvalue clipping, then trace rescaling.
pub fn project_feasible(h: &SymMatrix, lambda: f64) -> Result<TransformMetric> {
    let p = trace_cap(&psd_project(h)?, lambda)?;
    Ok(TransformMetric::from_parts_unchecked(p, lambda))
}

/// One projected-gradient update `P(H - eta * dG/dH)`.
pub fn sdp_pgd_step(
    metric: &TransformMetric,
    beta: &[f64],
    eta: f64,
    factors: &MetricFactors,
) -> Result<TransformMetric> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(HfaError::input(format!(
            "step size must be nonnegative, got {eta}"
        )));
    }
    factors.check_metric(metric.matrix())?;
    let v = factors.lifted(beta)?;
    let mut h = metric.matrix().clone();
    h.add_outer(0.5 * eta, &v);
    project_feasible(&h, metric.lambda())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchParams {
    pub contraction: f64,
    pub sufficient_decrease: f64,
    pub eta_min: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams {
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            eta_min: 1e-12,
            max_backtracks: 50,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(HfaError::input(
                "line-search contraction must lie in (0, 1)",
            ));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(HfaError::input(
                "sufficient-decrease constant must lie in (0, 1)",
            ));
        }
        if !(self.eta_min > 0.0) {
            return Err(HfaError::input("minimum step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchOutcome {
    pub eta: f64,
    /// Objective at the accepted (or minimal) step.
    pub objective: f64,
    /// No step above `eta_min` achieved sufficient decrease.
    pub stalled: bool,
}

/// Initial trial step `trace(H) / (||grad||_F + eps)`; the bound `lambda` stands in for a zero trace.
pub fn initial_step(trace: f64, lambda: f64, grad_norm: f64) -> f64 {
    let scale = if trace > 0.0 { trace } else { lambda };
    scale / (grad_norm + f64::EPSILON)
}

/// Backtracking on `eta`. `trial(eta)` returns `(G(P(H - eta g)), <g, P(H - eta g) - H>)`.
///
/// Accepts the first `eta` with `G_new <= G_0 + c * <g, dH>` and a decrease that is
/// not lost in round-off.
pub fn backtrack(
    eta0: f64,
    objective0: f64,
    params: &LineSearchParams,
    mut trial: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<LineSearchOutcome> {
    let noise = 1e-13 * objective0.abs().max(1e-300);
    let mut eta = eta0.max(params.eta_min);
    for _ in 0..=params.max_backtracks {
        let (objective, directional) = trial(eta)?;
        if directional < -noise
            && objective <= objective0 + params.sufficient_decrease * directional
        {
            return Ok(LineSearchOutcome {
                eta,
                objective,
                stalled: false,
            });
        }
        let next = eta * params.contraction;
        if next < params.eta_min {
            break;
        }
        eta = next;
    }
    Ok(LineSearchOutcome {
        eta: params.eta_min,
        objective: objective0,
        stalled: true,
    })
}

/// Backtracking line search for [`sdp_pgd_step`] at fixed `beta`.
pub fn line_search(
    metric: &TransformMetric,
    beta: &[f64],
    grad: &SymMatrix,
    factors: &MetricFactors,
    params: &LineSearchParams,
) -> Result<LineSearchOutcome> {
    params.validate()?;
    let grad_norm = grad.frobenius_norm();
    if grad_norm == 0.0 {
        return Err(HfaError::input("line search needs a nonzero gradient"));
    }
    let g0 = sdp_objective(beta, metric, factors)?;
    let eta0 = initial_step(metric.trace(), metric.lambda(), grad_norm);
    backtrack(eta0, g0, params, |eta| {
        let mut h = metric.matrix().clone();
        let mut step = grad.clone();
        step.scale(-eta);
        h = h.add(&step)?;
        let next = project_feasible(&h, metric.lambda())?;
        let delta = next.matrix().sub(metric.matrix())?;
        Ok((sdp_objective(beta, &next, factors)?, grad.inner(&delta)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_factors(n_s: usize, n_t: usize) -> MetricFactors {
        MetricFactors::kernelized(
            &SymMatrix::identity(n_s),
            &SymMatrix::identity(n_t),
            &SymMatrix::identity(n_s),
            &SymMatrix::identity(n_t),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let f = identity_factors(2, 1);
        let h = sdp_closed_form(&[1.0, 0.0, 0.0], 2.0, &f).unwrap();
        assert_eq!(h.matrix(), &SymMatrix::from_diagonal(&[2.0, 0.0, 0.0]));

        let f = identity_factors(1, 1);
        let h = sdp_closed_form(&[1.0, 1.0], 1.0, &f).unwrap();
        let expected = SymMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(h.matrix().max_abs_diff(&expected) < 1e-15);

        let h = sdp_closed_form(&[0.0, 0.0], 1.0, &f).unwrap();
        assert_eq!(h.matrix(), &SymMatrix::zeros(2));
    }

    #[test]
    fn objective_edge_cases() {
        let f = identity_factors(2, 2);
        let beta = [0.5, -0.5, 1.0, 0.25];
        let zero = TransformMetric::zero(4, 1.0).unwrap();
        let base = f.base_quad(&beta).unwrap();
        assert!((sdp_objective(&beta, &zero, &f).unwrap() + 0.5 * base).abs() < 1e-15);
        let init = TransformMetric::initial(4, 1.0).unwrap();
        assert_eq!(sdp_objective(&[0.0; 4], &init, &f).unwrap(), 0.0);
        assert!(sdp_objective(&[0.0; 3], &init, &f).is_err());
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let f = identity_factors(2, 1);
        let h = TransformMetric::initial(3, 1.0).unwrap();
        let g = sdp_gradient(&[0.0; 3], &f).unwrap();
        assert_eq!(g, SymMatrix::zeros(3));
        let next = sdp_pgd_step(&h, &[0.0; 3], 10.0, &f).unwrap();
        assert!(next.matrix().max_abs_diff(h.matrix()) < 1e-15);
        let err = line_search(&h, &[0.0; 3], &g, &f, &LineSearchParams::default());
        assert!(err.is_err());
    }

    #[test]
    fn stalls_at_vertex() {
        let f = identity_factors(2, 1);
        let beta = [0.3, -0.7, 0.4];
        let h = sdp_closed_form(&beta, 1.5, &f).unwrap();
        let g = sdp_gradient(&beta, &f).unwrap();
        let out = line_search(&h, &beta, &g, &f, &LineSearchParams::default()).unwrap();
        assert!(out.stalled);
        assert_eq!(out.eta, 1e-12);
    }

    #[test]
    fn metric_constructor_checks() {
        assert!(TransformMetric::new(SymMatrix::identity(2), 1.0).is_err());
        assert!(TransformMetric::new(SymMatrix::identity(2), 0.0).is_err());
        let bad =
            TransformMetric::from_parts_unchecked(SymMatrix::from_diagonal(&[1.0, -0.5]), 1.0);
        assert!(bad.check_feasible().is_err());
        assert!(TransformMetric::initial(3, 2.0)
            .unwrap()
            .check_feasible()
            .is_ok());
    }
}
