use std::sync::Arc;

use super::metric::{backtrack, initial_step, MetricFactors, TransformMetric};
use super::model::{KernelContext, LinearHfaModel};
use super::{HfaConfig, HfaModel};
use crate::error::{HfaError, Result};
use crate::linalg::{dot, Matrix};
use crate::svm::{solve_dual_from, DualProblem, DualSolution};

/// Feature vectors with `±1` labels from one domain.
#[derive(Clone, Copy, Debug)]
pub struct BinarySamples<'a> {
    pub features: &'a [Vec<f64>],
    pub labels: &'a [f64],
}

impl<'a> BinarySamples<'a> {
    pub fn new(features: &'a [Vec<f64>], labels: &'a [f64]) -> Result<Self> {
        if features.is_empty() {
            return Err(HfaError::input("domain has no training samples"));
        }
        if features.len() != labels.len() {
            return Err(HfaError::input(format!(
                "{} samples but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(HfaError::input(format!(
                "binary labels must be +1 or -1, found {bad}"
            )));
        }
        Ok(BinarySamples { features, labels })
    }
}

/// State handed to training observers after every SVM solve.
#[derive(Debug)]
pub struct IterationRecord<'a> {
    /// 0 for the solve at the initial metric.
    pub iteration: usize,
    pub objective: f64,
    pub metric: &'a TransformMetric,
    pub solution: &'a DualSolution,
}

pub(crate) struct Outcome {
    pub metric: TransformMetric,
    pub solution: DualSolution,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

fn joint_labels(source: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let y: Vec<f64> = source.iter().chain(target).copied().collect();
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(HfaError::Degenerate(
            "training labels contain a single class; both +1 and -1 are required".into(),
        ));
    }
    Ok(y)
}

/// Alternates SVM solves on `K_H` with projected-gradient metric updates.
pub(crate) fn alternate(
    factors: &MetricFactors,
    labels: &[f64],
    cfg: &HfaConfig,
    observer: &mut dyn FnMut(&IterationRecord<'_>),
) -> Result<Outcome> {
    cfg.validate()?;
    if labels.len() != factors.n() {
        return Err(HfaError::input(
            "label count does not match training set size",
        ));
    }
    let base = factors.base_kernel();
    let mut metric = TransformMetric::initial(factors.metric_order(), cfg.lambda)?;
    let mut lifted = factors.lifted_metric(metric.matrix())?;

    let mut kernel = base.add(&lifted)?;
    let mut solution = solve_dual_from(
        &DualProblem::new(&kernel, labels, cfg.c)?,
        cfg.svm_tol,
        None,
    )?;
    let mut trace = vec![solution.objective];
    observer(&IterationRecord {
        iteration: 0,
        objective: solution.objective,
        metric: &metric,
        solution: &solution,
    });

    let mut converged = false;
    let mut tau = 1;
    // Damping carried across iterations; it recovers by doubling after each accepted step.
    let mut step_scale: f64 = 1.0;
    while tau < cfg.t_max {
        let previous = *trace.last().expect("nonempty trace");
        let v = factors.lifted(&solution.beta)?;
        let u = factors.lift_transpose(&v)?;
        let base_quad = factors.base_quad(&solution.beta)?;
        let quad = metric.matrix().quad_form(&v)?;
        let mut backtracks = 0;
        let (step, next) = loop {
            let step = metric_step(&v, base_quad, quad, metric.trace(), step_scale, cfg);
            kernel = lifted.affine_outer(&base, step.scale, step.coef, &u)?;
            let problem = DualProblem::new(&kernel, labels, cfg.c)?;
            let next = solve_dual_from(&problem, cfg.svm_tol, Some(&solution.alpha))?;
            if next.objective <= previous || backtracks >= cfg.outer_backtracks {
                break (step, next);
            }
            step_scale *= 0.5;
            backtracks += 1;
        };
        if next.objective > previous && cfg.outer_backtracks > 0 {
            // No damped step lowers the objective: the current metric is stationary.
            converged = true;
            break;
        }
        step_scale = (2.0 * step_scale).min(1.0);
        metric
            .matrix_mut()
            .scale_add_outer(step.scale, step.coef, &v);
        lifted.scale_add_outer(step.scale, step.coef, &u);
        solution = next;

        trace.push(solution.objective);
        observer(&IterationRecord {
            iteration: tau,
            objective: solution.objective,
            metric: &metric,
            solution: &solution,
        });
        let change = (solution.objective - previous).abs() / previous.abs().max(f64::MIN_POSITIVE);
        if change < cfg.conv_tol {
            converged = true;
            break;
        }
        tau += 1;
    }

    Ok(Outcome {
        metric,
        solution,
        objective_trace: trace,
        converged,
    })
}

/// Net effect `H <- scale * H + coef * v v'` of the metric steps at fixed `beta`.
#[derive(Clone, Copy, Debug)]
struct MetricStep {
    scale: f64,
    coef: f64,
}

/// Runs up to `cfg.metric_steps` line-searched projected-gradient steps at fixed `beta`,
/// each starting from `step_scale` times the usual initial step.
///
/// Every step adds the PSD term `(eta/2) v v'`, so eigenvalue clipping is the
/// identity and the projection reduces to the trace rescaling. The steps thus
/// compose into one scale and one rank-one coefficient, tracked here through
/// `v'Hv` and `trace(H)` alone.
fn metric_step(
    v: &[f64],
    base_quad: f64,
    quad: f64,
    trace: f64,
    step_scale: f64,
    cfg: &HfaConfig,
) -> MetricStep {
    let mut step = MetricStep {
        scale: 1.0,
        coef: 0.0,
    };
    let nv2 = dot(v, v);
    if nv2 == 0.0 {
        return step;
    }
    let lambda = cfg.lambda;
    let grad_norm = 0.5 * nv2;
    let (mut quad, mut tr) = (quad, trace);
    for _ in 0..cfg.metric_steps {
        let along = |eta: f64| {
            let grown = tr + 0.5 * eta * nv2;
            let shrink = if grown > lambda { lambda / grown } else { 1.0 };
            (shrink, shrink * (quad + 0.5 * eta * nv2 * nv2))
        };
        let g0 = -0.5 * (base_quad + quad);
        let eta0 = step_scale * initial_step(tr, lambda, grad_norm);
        let outcome = backtrack(eta0, g0, &cfg.line_search, |eta| {
            let (_, quad_new) = along(eta);
            Ok((-0.5 * (base_quad + quad_new), -0.5 * (quad_new - quad)))
        })
        .expect("fixed-beta trial objective is infallible");
        if outcome.stalled {
            break;
        }
        let (shrink, quad_new) = along(outcome.eta);
        step.coef = shrink * (step.coef + 0.5 * outcome.eta);
        step.scale *= shrink;
        quad = quad_new;
        tr = shrink * (tr + 0.5 * outcome.eta * nv2);
    }
    step
}

/// Trains a binary kernelized model.
pub fn hfa_train(
    source: BinarySamples<'_>,
    target: BinarySamples<'_>,
    cfg: &HfaConfig,
) -> Result<HfaModel> {
    let context = Arc::new(KernelContext::build(source.features, target.features, cfg)?);
    train_in_context(&context, source.labels, target.labels, cfg, &mut |_| {})
}

/// Trains against a prebuilt kernel context, so one-vs-rest models share Gram factors.
pub fn train_in_context(
    context: &Arc<KernelContext>,
    source_labels: &[f64],
    target_labels: &[f64],
    cfg: &HfaConfig,
    observer: &mut dyn FnMut(&IterationRecord<'_>),
) -> Result<HfaModel> {
    if source_labels.len() != context.n_source() || target_labels.len() != context.n_target() {
        return Err(HfaError::input(format!(
            "label counts ({}, {}) do not match the context's training sets ({}, {})",
            source_labels.len(),
            target_labels.len(),
            context.n_source(),
            context.n_target()
        )));
    }
    BinarySamples::new(context.source_x(), source_labels)?;
    BinarySamples::new(context.target_x(), target_labels)?;
    let labels = joint_labels(source_labels, target_labels)?;
    let outcome = alternate(context.factors(), &labels, cfg, observer)?;
    HfaModel::from_training(Arc::clone(context), labels, outcome)
}

/// Trains the linear formulation, whose metric has order `d_s + d_t`.
pub fn train_linear(
    source: BinarySamples<'_>,
    target: BinarySamples<'_>,
    cfg: &HfaConfig,
    observer: &mut dyn FnMut(&IterationRecord<'_>),
) -> Result<LinearHfaModel> {
    let xs = Matrix::from_columns(source.features)?;
    let xt = Matrix::from_columns(target.features)?;
    let labels = joint_labels(source.labels, target.labels)?;
    let factors = MetricFactors::linear(&xs, &xt)?;
    let outcome = alternate(&factors, &labels, cfg, observer)?;
    LinearHfaModel::from_training(
        source.features.to_vec(),
        target.features.to_vec(),
        &factors,
        labels,
        outcome,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    type Toy = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

    fn toy() -> Toy {
        let xs: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                vec![
                    (i as f64 * 0.7).sin(),
                    (i as f64 * 1.3).cos(),
                    i as f64 / 10.0,
                ]
            })
            .collect();
        let ys = (0..10)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let xt: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![(i as f64 * 0.9).cos(), i as f64 / 6.0])
            .collect();
        let yt = (0..6)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        (xs, ys, xt, yt)
    }

    #[test]
    fn objective_trace_never_increases() {
        let (xs, ys, xt, yt) = toy();
        for lambda in [0.5, 10.0, 100.0] {
            let cfg = HfaConfig {
                lambda,
                ..HfaConfig::default()
            };
            let model = hfa_train(
                BinarySamples::new(&xs, &ys).unwrap(),
                BinarySamples::new(&xt, &yt).unwrap(),
                &cfg,
            )
            .unwrap();
            for w in model.objective_trace().windows(2) {
                assert!(w[1] <= w[0], "lambda {lambda}: {} -> {}", w[0], w[1]);
            }
            model.metric().check_feasible().unwrap();
        }
    }

    #[test]
    fn composed_steps_match_explicit_updates() {
        let v = [0.5, -1.0, 2.0, 0.25];
        let mut h = SymMatrix::scaled_identity(4, 0.25);
        h.add_outer(0.1, &[1.0, 0.0, -1.0, 0.5]);
        let lambda = 1.0;
        let h = h.scaled(lambda / h.trace());
        let cfg = HfaConfig {
            lambda,
            metric_steps: 3,
            ..HfaConfig::default()
        };
        let base_quad = 0.7;
        let step = metric_step(
            &v,
            base_quad,
            h.quad_form(&v).unwrap(),
            h.trace(),
            1.0,
            &cfg,
        );

        let mut explicit = h.clone();
        let mut fused = h.clone();
        fused.scale_add_outer(step.scale, step.coef, &v);
        // replay the same line searches on an explicit matrix
        let nv2 = dot(&v, &v);
        for _ in 0..3 {
            let quad = explicit.quad_form(&v).unwrap();
            let tr = explicit.trace();
            let one = metric_step(
                &v,
                base_quad,
                quad,
                tr,
                1.0,
                &HfaConfig {
                    metric_steps: 1,
                    ..cfg.clone()
                },
            );
            explicit.scale_add_outer(one.scale, one.coef, &v);
            assert!(explicit.trace() <= lambda * (1.0 + 1e-12));
            assert!(nv2 > 0.0);
        }
        assert!(fused.max_abs_diff(&explicit) < 1e-12);
    }
}
