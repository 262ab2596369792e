//! Normal-equation solvers.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{Design, MlError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub theta: Vec<f64>,
    /// Ridge term added to the diagonal when the plain system was not
    /// positive definite.
    pub ridge: Option<f64>,
}

/// Solves `XᵀX θ = Xᵀy`.
pub fn closed_form_full(x: &Design, y: &[f64]) -> Result<ClosedForm, MlError> {
    solve(&Samples::full(x.clone(), y.to_vec())?)
}

/// Solves `Xᵀ W X θ = Xᵀ W y` with `W = diag(w)`.
pub fn closed_form_weighted(s: &Samples) -> Result<ClosedForm, MlError> {
    solve(s)
}

fn solve(s: &Samples) -> Result<ClosedForm, MlError> {
    let d = s.dim();
    if s.is_empty() || d == 0 {
        return Err(MlError::Empty);
    }
    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    for i in 0..s.len() {
        let row = s.x.row(i);
        let w = s.weight(i);
        for j in 0..d {
            let wx = w * row[j];
            b[j] += wx * s.y[i];
            for k in j..d {
                a[(j, k)] += wx * row[k];
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            a[(j, k)] = a[(k, j)];
        }
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(MlError::SingularSystem("non-finite normal equations".into()));
    }
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ClosedForm { theta: ch.solve(&b).iter().copied().collect(), ridge: None });
    }
    let lambda = 1e-8 * a.trace() / d as f64;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(MlError::SingularSystem("zero design, no ridge fallback".into()));
    }
    for j in 0..d {
        a[(j, j)] += lambda;
    }
    match a.cholesky() {
        Some(ch) => Ok(ClosedForm { theta: ch.solve(&b).iter().copied().collect(), ridge: Some(lambda) }),
        None => Err(MlError::SingularSystem(format!("not positive definite with ridge {lambda:e}"))),
    }
}
