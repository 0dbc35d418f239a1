//! Binary SVM dual on a precomputed kernel:
//!
//! ```text
//! max_a  1'a - 1/2 (a∘y)' K (a∘y)   s.t.  y'a = 0,  0 <= a <= C
//! ```
//!
//! solved by sequential minimal optimization with maximal-violating-pair
//! working-set selection.

use crate::error::{HfaError, Result};
use crate::linalg::{dot, Matrix, SymMatrix};

/// Default optimality gap for [`solve_dual`].
pub const DEFAULT_TOL: f64 = 1e-6;

/// Floor on the pairwise curvature `K_ii + K_jj - 2 K_ij`.
const MIN_CURVATURE: f64 = 1e-12;

/// Dual problem borrowing its kernel, so repeated solves on a large Gram matrix do not copy it.
#[derive(Clone, Copy, Debug)]
pub struct DualProblem<'a> {
    kernel: &'a SymMatrix,
    labels: &'a [f64],
    c: f64,
}

impl<'a> DualProblem<'a> {
    pub fn new(kernel: &'a SymMatrix, labels: &'a [f64], c: f64) -> Result<Self> {
        let n = kernel.order();
        if labels.len() != n {
            return Err(HfaError::input(format!(
                "{} labels for a kernel of order {n}",
                labels.len()
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(HfaError::input(format!("C must be positive, got {c}")));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(HfaError::input(format!(
                "labels must be +1 or -1, found {bad}"
            )));
        }
        if !labels.contains(&1.0) || !labels.contains(&-1.0) {
            return Err(HfaError::Degenerate(
                "dual problem needs at least one label of each sign".into(),
            ));
        }
        if !kernel.is_finite() {
            return Err(HfaError::input("kernel matrix has non-finite entries"));
        }
        Ok(DualProblem { kernel, labels, c })
    }

    pub fn kernel(&self) -> &SymMatrix {
        self.kernel
    }

    pub fn labels(&self) -> &[f64] {
        self.labels
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Dual objective `1'a - 1/2 b'Kb` with `b = a∘y`.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let beta: Vec<f64> = alpha.iter().zip(self.labels).map(|(a, y)| a * y).collect();
        let kb = self.kernel.matvec(&beta).expect("conforming");
        alpha.iter().sum::<f64>() - 0.5 * dot(&beta, &kb)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// `alpha ∘ y`
    pub beta: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal-violating-pair gap.
    pub gap: f64,
}

impl DualSolution {
    pub fn converged(&self, tol: f64) -> bool {
        self.gap <= tol
    }
}

pub fn solve_dual(problem: &DualProblem<'_>, tol: f64) -> Result<DualSolution> {
    solve_dual_from(problem, tol, None)
}

/// Like [`solve_dual`], optionally starting from a feasible `alpha` (warm start).
pub fn solve_dual_from(
    problem: &DualProblem<'_>,
    tol: f64,
    init: Option<&[f64]>,
) -> Result<DualSolution> {
    if !(tol > 0.0) {
        return Err(HfaError::input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = problem.len();
    let k = problem.kernel;
    let y = problem.labels;
    let c = problem.c;

    let mut alpha = match init {
        Some(a) => {
            if a.len() != n {
                return Err(HfaError::input("warm-start length mismatch"));
            }
            let a: Vec<f64> = a.iter().map(|&v| v.clamp(0.0, c)).collect();
            let resid: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
            if resid.abs() > 1e-8 * n as f64 * c {
                vec![0.0; n]
            } else {
                a
            }
        }
        None => vec![0.0; n],
    };

    // grad_i = y_i (K beta)_i - 1
    let beta0: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let kb = k.matvec(&beta0)?;
    let mut grad: Vec<f64> = (0..n).map(|i| y[i] * kb[i] - 1.0).collect();

    let max_iter = 200_000usize.max(200 * n);
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    while iterations < max_iter {
        let Some((i, j, m_up, m_low)) = select_pair(&alpha, &grad, y, c) else {
            gap = 0.0;
            break;
        };
        gap = m_up - m_low;
        if gap <= tol {
            break;
        }
        iterations += 1;

        let ki = k.row(i);
        let kj = k.row(j);
        let curvature = (ki[i] + kj[j] - 2.0 * ki[j]).max(MIN_CURVATURE);
        // Direction d_i = y_i, d_j = -y_j keeps y'alpha fixed.
        let (room_i, bound_i) = if y[i] > 0.0 {
            (c - alpha[i], c)
        } else {
            (alpha[i], 0.0)
        };
        let (room_j, bound_j) = if y[j] > 0.0 {
            (alpha[j], 0.0)
        } else {
            (c - alpha[j], c)
        };
        let step = (gap / curvature).min(room_i).min(room_j);

        alpha[i] = if step == room_i {
            bound_i
        } else {
            (alpha[i] + step * y[i]).clamp(0.0, c)
        };
        alpha[j] = if step == room_j {
            bound_j
        } else {
            (alpha[j] - step * y[j]).clamp(0.0, c)
        };

        for t in 0..n {
            grad[t] += step * y[t] * (ki[t] - kj[t]);
        }
    }

    let beta: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let kb = k.matvec(&beta)?;
    let objective = alpha.iter().sum::<f64>() - 0.5 * dot(&beta, &kb);
    let bias = bias_from_kkt(&alpha, &kb, y, c);
    Ok(DualSolution {
        alpha,
        beta,
        bias,
        objective,
        iterations,
        gap,
    })
}

/// Returns `(i, j, m, M)` with `i = argmax_{I_up} -y_t g_t`, `j = argmin_{I_low} -y_t g_t`.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> Option<(usize, usize, f64, f64)> {
    let mut i = usize::MAX;
    let mut j = usize::MAX;
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for t in 0..alpha.len() {
        let score = -y[t] * grad[t];
        let below_c = alpha[t] < c;
        let above_0 = alpha[t] > 0.0;
        let (up, low) = if y[t] > 0.0 {
            (below_c, above_0)
        } else {
            (above_0, below_c)
        };
        if up && score > m_up {
            m_up = score;
            i = t;
        }
        if low && score < m_low {
            m_low = score;
            j = t;
        }
    }
    if i == usize::MAX || j == usize::MAX {
        None
    } else {
        Some((i, j, m_up, m_low))
    }
}

/// Average of `y_i - f_i` over free vectors, else the midpoint of the KKT-admissible interval.
fn bias_from_kkt(alpha: &[f64], kb: &[f64], y: &[f64], c: f64) -> f64 {
    let margin = 1e-8 * c;
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..alpha.len() {
        let candidate = y[i] - kb[i];
        if alpha[i] > margin && alpha[i] < c - margin {
            free_sum += candidate;
            free_count += 1;
            continue;
        }
        // y_i f_i >= 1 at the lower bound, <= 1 at the upper bound.
        let at_lower = alpha[i] <= margin;
        if at_lower == (y[i] > 0.0) {
            lower = lower.max(candidate);
        } else {
            upper = upper.min(candidate);
        }
    }
    if free_count > 0 {
        return free_sum / free_count as f64;
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// `K_cross' beta + bias` for each column of `k_cross` (rows aligned with training order).
pub fn decision_values(solution: &DualSolution, k_cross: &Matrix) -> Result<Vec<f64>> {
    if k_cross.rows() != solution.beta.len() {
        return Err(HfaError::input(format!(
            "cross kernel has {} rows, model has {} training points",
            k_cross.rows(),
            solution.beta.len()
        )));
    }
    let mut f = k_cross.tr_matvec(&solution.beta)?;
    f.iter_mut().for_each(|v| *v += solution.bias);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> (SymMatrix, Vec<f64>) {
        (
            SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap(),
            vec![1.0, -1.0],
        )
    }

    #[test]
    fn analytic_two_point_problem() {
        let (k, y) = two_point();
        let p = DualProblem::new(&k, &y, 1.0).unwrap();
        let s = solve_dual(&p, DEFAULT_TOL).unwrap();
        assert!((s.alpha[0] - 0.5).abs() < 1e-9 && (s.alpha[1] - 0.5).abs() < 1e-9);
        assert!(s.bias.abs() < 1e-9);
        assert!((s.objective - 0.5).abs() < 1e-12);
        assert_eq!(s.beta, vec![s.alpha[0], -s.alpha[1]]);

        let f = decision_values(&s, k.as_matrix()).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-9 && (f[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn tiny_c_collapses() {
        let (k, y) = two_point();
        let p = DualProblem::new(&k, &y, 1e-9).unwrap();
        let s = solve_dual(&p, DEFAULT_TOL).unwrap();
        assert!(s.alpha.iter().all(|&a| a <= 1e-9));
        assert!(s.objective.abs() < 1e-8);
    }

    #[test]
    fn degenerate_labels() {
        let k = SymMatrix::identity(2);
        let y = vec![1.0, 1.0];
        assert!(matches!(
            DualProblem::new(&k, &y, 1.0),
            Err(HfaError::Degenerate(_))
        ));
        let y = vec![1.0, 0.0];
        assert!(matches!(
            DualProblem::new(&k, &y, 1.0),
            Err(HfaError::Input(_))
        ));
    }

    #[test]
    fn non_finite_kernel() {
        let k = SymMatrix::from_diagonal(&[1.0, f64::INFINITY]);
        assert!(matches!(
            DualProblem::new(&k, &[1.0, -1.0], 1.0),
            Err(HfaError::Input(_))
        ));
    }

    #[test]
    fn decision_value_edge_cases() {
        let s = DualSolution {
            alpha: vec![0.0; 3],
            beta: vec![0.0; 3],
            bias: 0.25,
            objective: 0.0,
            iterations: 0,
            gap: 0.0,
        };
        let f = decision_values(&s, &Matrix::from_fn(3, 2, |i, j| (i + j) as f64)).unwrap();
        assert_eq!(f, vec![0.25, 0.25]);
        assert!(decision_values(&s, &Matrix::zeros(3, 0))
            .unwrap()
            .is_empty());
        assert!(decision_values(&s, &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn bias_without_free_vectors_is_interval_midpoint() {
        // Both at upper bound C: y=+1 with f=0.5 gives upper 0.5; y=-1 with Kb=-0.5 gives lower -0.5.
        let b = bias_from_kkt(&[1.0, 1.0], &[0.5, -0.5], &[1.0, -1.0], 1.0);
        assert!((b - 0.0).abs() < 1e-15);
    }

    #[test]
    fn warm_start_matches_cold() {
        let k = SymMatrix::from_rows(&[
            vec![2.0, 0.5, 0.1, 0.0],
            vec![0.5, 1.5, 0.2, 0.3],
            vec![0.1, 0.2, 1.0, 0.4],
            vec![0.0, 0.3, 0.4, 2.5],
        ])
        .unwrap();
        let y = vec![1.0, -1.0, 1.0, -1.0];
        let p = DualProblem::new(&k, &y, 1.0).unwrap();
        let cold = solve_dual(&p, 1e-9).unwrap();
        let warm = solve_dual_from(&p, 1e-9, Some(&[0.3, 0.3, 0.1, 0.1])).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-9);
    }
}
