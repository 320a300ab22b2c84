//! Linear models on standardized features: logistic regression fit by damped
//! Newton iterations, and a linear SVM fit by deterministic full-batch
//! subgradient descent on the primal hinge-loss objective.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearState {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    /// Objective value of the best iterate so far, recorded at fixed
    /// intervals during SVM training (empty for logistic regression).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_checkpoints: Vec<f64>,
}

impl LinearState {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized logistic log-loss and its gradient at `(bias, weights)`:
///
/// `L = (1/n) sum_i log(1 + exp(-y_i (w.x_i + b))) + (l2/2) ||w||^2`
///
/// with labels in {0,1} mapped to {-1,+1}. The bias is not regularized. The
/// gradient vector is laid out `[d/db, d/dw_0, .., d/dw_{d-1}]`.
pub fn logistic_loss_grad(
    x: &[Vec<f64>],
    y: &[u8],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let d = weights.len();
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (row, &label) in x.iter().zip(y) {
        let yy = if label == 1 { 1.0 } else { -1.0 };
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        loss += log1p_exp(-yy * z);
        let g = -yy * sigmoid(-yy * z);
        grad[0] += g;
        for (gw, &v) in grad[1..].iter_mut().zip(row) {
            *gw += g * v;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (gw, &w) in grad[1..].iter_mut().zip(weights) {
        *gw += l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

fn grad_norm(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Solve a small dense symmetric system by Gaussian elimination with partial
/// pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

pub struct LogisticFit {
    pub state: LinearState,
    pub warning: Option<String>,
}

/// Damped Newton on the regularized log-loss. Stops when the gradient norm
/// drops to `tol`; returns the last iterate with a non-convergence warning
/// otherwise.
pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[u8],
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> LogisticFit {
    let d = x.first().map_or(0, |r| r.len());
    let n = x.len() as f64;
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;

    let mut converged = false;
    for _ in 0..max_iter {
        let (loss, grad) = logistic_loss_grad(x, y, &weights, bias, l2);
        if grad_norm(&grad) <= tol {
            converged = true;
            break;
        }

        // Hessian of the mean log-loss plus the l2 block on the weights.
        let mut h = vec![vec![0.0; d + 1]; d + 1];
        for row in x {
            let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
            let s = sigmoid(z) * (1.0 - sigmoid(z));
            let xt: Vec<f64> = std::iter::once(1.0).chain(row.iter().copied()).collect();
            for i in 0..=d {
                for j in 0..=d {
                    h[i][j] += s * xt[i] * xt[j] / n;
                }
            }
        }
        for i in 1..=d {
            h[i][i] += l2;
        }
        for (i, row) in h.iter_mut().enumerate() {
            row[i] += 1e-12;
        }

        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(step) = solve(h, neg_grad) else { break };

        // Backtracking keeps the objective non-increasing.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let w_try: Vec<f64> =
                weights.iter().zip(&step[1..]).map(|(w, s)| w + scale * s).collect();
            let b_try = bias + scale * step[0];
            let (loss_try, _) = logistic_loss_grad(x, y, &w_try, b_try, l2);
            if loss_try <= loss {
                weights = w_try;
                bias = b_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !converged {
        let (_, grad) = logistic_loss_grad(x, y, &weights, bias, l2);
        converged = grad_norm(&grad) <= tol;
    }

    let warning = (!converged).then(|| {
        format!("logistic regression did not reach gradient norm {tol} within {max_iter} iterations")
    });
    LogisticFit {
        state: LinearState { weights, bias, converged, objective_checkpoints: Vec::new() },
        warning,
    }
}

/// Primal SVM objective in mean form:
/// `J = (lambda/2) ||w||^2 + (1/n) sum_i max(0, 1 - y_i (w.x_i + b))`
/// with `lambda = 1 / (C n)`, which rescales the usual
/// `0.5 ||w||^2 + C sum hinge` objective.
pub fn svm_objective(x: &[Vec<f64>], y: &[u8], weights: &[f64], bias: f64, c: f64) -> f64 {
    let n = x.len() as f64;
    let lambda = 1.0 / (c * n);
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &label)| {
            let yy = if label == 1 { 1.0 } else { -1.0 };
            let margin = yy * (weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias);
            (1.0 - margin).max(0.0)
        })
        .sum::<f64>()
        / n;
    reg + hinge
}

pub struct SvmFit {
    pub state: LinearState,
    pub warning: Option<String>,
}

/// Full-batch subgradient descent with a 1/(lambda t) step schedule. The best
/// iterate by objective value is kept and returned; checkpoints record the
/// best objective at fixed intervals and are therefore non-increasing.
pub fn fit_svm(x: &[Vec<f64>], y: &[u8], c: f64, max_iter: usize) -> SvmFit {
    let d = x.first().map_or(0, |r| r.len());
    let n = x.len() as f64;
    let lambda = 1.0 / (c * n);

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut best_w = w.clone();
    let mut best_b = b;
    let mut best_obj = svm_objective(x, y, &w, b, c);
    let mut checkpoints = vec![best_obj];
    let checkpoint_every = (max_iter / 100).max(1);

    for t in 1..=max_iter {
        let mut grad_w: Vec<f64> = w.iter().map(|wi| lambda * wi).collect();
        let mut grad_b = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let yy = if label == 1 { 1.0 } else { -1.0 };
            let margin = yy * (w.iter().zip(row).map(|(wi, v)| wi * v).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, &v) in grad_w.iter_mut().zip(row) {
                    *g -= yy * v / n;
                }
                grad_b -= yy / n;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        for (wi, g) in w.iter_mut().zip(&grad_w) {
            *wi -= eta * g;
        }
        b -= eta * grad_b;

        let obj = svm_objective(x, y, &w, b, c);
        if obj < best_obj {
            best_obj = obj;
            best_w.clone_from(&w);
            best_b = b;
        }
        if t % checkpoint_every == 0 {
            checkpoints.push(best_obj);
        }
    }

    // Converged when the tail of the run no longer improved the best iterate.
    let tail = checkpoints.len().saturating_sub(checkpoints.len() / 10).max(1) - 1;
    let converged = checkpoints[tail] - best_obj <= 1e-8 * best_obj.abs().max(1e-12);
    let warning = (!converged)
        .then(|| format!("svm objective still improving after {max_iter} iterations"));
    SvmFit {
        state: LinearState {
            weights: best_w,
            bias: best_b,
            converged,
            objective_checkpoints: checkpoints,
        },
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_1d() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x: Vec<Vec<f64>> =
            (-10..10).map(|i| vec![i as f64 + if i >= 0 { 1.0 } else { 0.0 }]).collect();
        let y: Vec<u8> = (-10..10).map(|i| u8::from(i >= 0)).collect();
        (x, y)
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let (x, y) = separable_1d();
        let w = vec![0.3];
        let b = -0.2;
        let (_, grad) = logistic_loss_grad(&x, &y, &w, b, 0.5);
        let h = 1e-6;
        let fd_b = {
            let (lp, _) = logistic_loss_grad(&x, &y, &w, b + h, 0.5);
            let (lm, _) = logistic_loss_grad(&x, &y, &w, b - h, 0.5);
            (lp - lm) / (2.0 * h)
        };
        let fd_w = {
            let (lp, _) = logistic_loss_grad(&x, &y, &[w[0] + h], b, 0.5);
            let (lm, _) = logistic_loss_grad(&x, &y, &[w[0] - h], b, 0.5);
            (lp - lm) / (2.0 * h)
        };
        assert!((grad[0] - fd_b).abs() / fd_b.abs().max(1e-8) < 1e-4);
        assert!((grad[1] - fd_w).abs() / fd_w.abs().max(1e-8) < 1e-4);
    }

    #[test]
    fn logistic_converges_to_small_gradient() {
        let (x, y) = separable_1d();
        let fit = fit_logistic(&x, &y, 1.0, 1e-6, 1000);
        assert!(fit.state.converged);
        let (_, grad) = logistic_loss_grad(&x, &y, &fit.state.weights, fit.state.bias, 1.0);
        assert!(grad_norm(&grad) <= 1e-6);
        // Separates the training data.
        for (row, &label) in x.iter().zip(&y) {
            let pred = u8::from(fit.state.decision(row) >= 0.0);
            assert_eq!(pred, label);
        }
    }

    #[test]
    fn zero_model_scores_half() {
        let state =
            LinearState { weights: vec![0.0; 3], bias: 0.0, converged: true, objective_checkpoints: vec![] };
        assert_eq!(sigmoid(state.decision(&[1.0, 2.0, 3.0])), 0.5);
    }

    #[test]
    fn svm_separates_and_checkpoints_decrease() {
        let (x, y) = separable_1d();
        let fit = fit_svm(&x, &y, 1.0, 2000);
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(u8::from(fit.state.decision(row) >= 0.0), label);
        }
        let cp = &fit.state.objective_checkpoints;
        assert!(cp.len() > 10);
        for pair in cp.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "checkpoints must be non-increasing");
        }
    }

    #[test]
    fn solve_recovers_known_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![5.0, 10.0];
        let x = solve(a, b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }
}
