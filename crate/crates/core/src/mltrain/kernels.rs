//! Losses, gradients and single descent steps.

use super::{Design, MlError, Samples};

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_theta(s: &Samples, theta: &[f64]) -> Result<(), MlError> {
    if theta.len() != s.dim() {
        return Err(MlError::ShapeMismatch(format!("θ has {} entries for {} features", theta.len(), s.dim())));
    }
    Ok(())
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `(1/2n) Σ (x_iᵀθ − y_i)²`.
pub fn loss_mse(x: &Design, y: &[f64], theta: &[f64], n_effective: f64) -> Result<f64, MlError> {
    if x.rows() != y.len() || x.cols() != theta.len() {
        return Err(MlError::ShapeMismatch(format!(
            "X is {}×{}, y has {}, θ has {}",
            x.rows(),
            x.cols(),
            y.len(),
            theta.len()
        )));
    }
    let sum: f64 = (0..x.rows()).map(|i| (dot(x.row(i), theta) - y[i]).powi(2)).sum();
    Ok(sum / (2.0 * n_effective))
}

/// `(1/2n) Σ w_j (x_jᵀθ − y_j)²`.
pub fn loss_mse_weighted(s: &Samples, theta: &[f64]) -> Result<f64, MlError> {
    check_theta(s, theta)?;
    let sum: f64 = (0..s.len()).map(|i| s.weight(i) * (dot(s.x.row(i), theta) - s.y[i]).powi(2)).sum();
    Ok(sum / (2.0 * s.n))
}

/// `(1/n) Σ w_j (x_jᵀθ − y_j) x_j`.
pub fn gradient_mse(s: &Samples, theta: &[f64]) -> Result<Vec<f64>, MlError> {
    check_theta(s, theta)?;
    Ok(accumulate(s, theta, |z, y| z - y))
}

/// `(1/n) Σ w_j [softplus(x_jᵀθ) − y_j x_jᵀθ]`, the weighted negative
/// log-likelihood with labels in `[0, 1]`.
pub fn loss_logistic(s: &Samples, theta: &[f64]) -> Result<f64, MlError> {
    check_theta(s, theta)?;
    let sum: f64 = (0..s.len())
        .map(|i| {
            let z = dot(s.x.row(i), theta);
            s.weight(i) * (softplus(z) - s.y[i] * z)
        })
        .sum();
    Ok(sum / s.n)
}

/// `(1/n) Σ w_j (σ(x_jᵀθ) − y_j) x_j`.
pub fn gradient_logistic(s: &Samples, theta: &[f64]) -> Result<Vec<f64>, MlError> {
    check_theta(s, theta)?;
    Ok(accumulate(s, theta, |z, y| sigmoid(z) - y))
}

/// `(1/n) Σ w_i r(x_iᵀθ, y_i) x_i`; unweighted rows skip the multiply so
/// unit weights reproduce the unweighted sum exactly.
fn accumulate(s: &Samples, theta: &[f64], residual: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut g = vec![0.0; theta.len()];
    for i in 0..s.len() {
        let row = s.x.row(i);
        let r = residual(dot(row, theta), s.y[i]);
        let c = match &s.weights {
            Some(w) => w[i] * r,
            None => r,
        };
        for (gk, xk) in g.iter_mut().zip(row) {
            *gk += c * xk;
        }
    }
    g.iter_mut().for_each(|gk| *gk /= s.n);
    g
}

pub(crate) fn descend(theta: &[f64], grad: &[f64], alpha: f64, iter: usize) -> Result<Vec<f64>, MlError> {
    let next: Vec<f64> = theta.iter().zip(grad).map(|(t, g)| t - alpha * g).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(MlError::NonFinite { iter });
    }
    Ok(next)
}

/// `θ − (α/n) Σ (x_iᵀθ − y_i) x_i`.
pub fn gd_step_full(x: &Design, y: &[f64], theta: &[f64], alpha: f64) -> Result<Vec<f64>, MlError> {
    if x.rows() != y.len() {
        return Err(MlError::ShapeMismatch(format!("{} rows, {} targets", x.rows(), y.len())));
    }
    if x.cols() != theta.len() {
        return Err(MlError::ShapeMismatch(format!("θ has {} entries for {} features", theta.len(), x.cols())));
    }
    let mut g = vec![0.0; theta.len()];
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        let r = dot(row, theta) - yi;
        for (gk, xk) in g.iter_mut().zip(row) {
            *gk += r * xk;
        }
    }
    let n = x.rows() as f64;
    g.iter_mut().for_each(|gk| *gk /= n);
    descend(theta, &g, alpha, 0)
}

/// `θ − (α/n) Σ_j w_j (x_jᵀθ − y_j) x_j`, where the weights must total `n`.
pub fn gd_step_condensed(s: &Samples, theta: &[f64], alpha: f64, n: u64) -> Result<Vec<f64>, MlError> {
    let total = s.weights.as_ref().map_or(s.len() as f64, |w| w.iter().sum());
    if total != n as f64 {
        return Err(MlError::WeightMismatch { sum: total, n: n as f64 });
    }
    let g = gradient_mse(s, theta)?;
    descend(theta, &g, alpha, 0)
}
