use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernels::{descend, gradient_logistic, gradient_mse, loss_logistic, loss_mse_weighted, sigmoid};
use super::{Design, MlError, Samples, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Logistic,
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, MlError> {
        match s {
            "linear" | "linreg" => Ok(Self::Linear),
            "logistic" | "logreg" => Ok(Self::Logistic),
            other => Err(MlError::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Fitted parameters. With `intercept`, `theta[0]` is the bias and
/// `theta[1..]` pairs with the feature columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub theta: Vec<f64>,
    pub kind: ModelKind,
    pub intercept: bool,
}

impl ModelParams {
    pub fn features(&self) -> usize {
        self.theta.len() - usize::from(self.intercept)
    }

    /// Linear score `x ᵀθ` (plus bias).
    pub fn score(&self, x: &[f64]) -> f64 {
        let (bias, w) = if self.intercept { (self.theta[0], &self.theta[1..]) } else { (0.0, &self.theta[..]) };
        bias + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Regression output or class-1 probability.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Linear => self.score(x),
            ModelKind::Logistic => sigmoid(self.score(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the largest parameter change in a step is at most this.
    pub tol: f64,
    pub intercept: bool,
    /// `None` starts from θ = 0; otherwise θ is drawn from U(−0.01, 0.01).
    pub seed: Option<u64>,
    /// Loss is recorded every this many iterations (0 disables the curve).
    pub loss_every: usize,
}

impl TrainConfig {
    pub fn linear() -> Self {
        Self { learning_rate: 1e-3, max_iters: 1_000_000, tol: 1e-8, intercept: true, seed: None, loss_every: 100 }
    }

    pub fn logistic() -> Self {
        Self { max_iters: 100_000, ..Self::linear() }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(MlError::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(MlError::InvalidConfig(format!("tol {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(MlError::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub params: ModelParams,
    pub iters_run: usize,
    pub final_loss: f64,
    pub converged: bool,
    pub last_step: f64,
    pub wall_time: f64,
    /// `(iteration, loss)` pairs.
    pub loss_curve: Vec<(usize, f64)>,
    pub rows: usize,
    pub weighted: bool,
    pub standardizer: Option<Standardizer>,
}

impl TrainReport {
    pub fn kv_lines(&self) -> String {
        let mut s = String::new();
        let theta: Vec<String> = self.params.theta.iter().map(|t| format!("{t:.6e}")).collect();
        let _ = writeln!(s, "model={}", serde_json::to_value(self.params.kind).unwrap().as_str().unwrap());
        let _ = writeln!(s, "rows={} weighted={}", self.rows, self.weighted);
        let _ = writeln!(s, "iters={} converged={} last_step={:e}", self.iters_run, self.converged, self.last_step);
        let _ = writeln!(s, "final_loss={:.9e}", self.final_loss);
        let _ = writeln!(s, "wall_time={:.6}", self.wall_time);
        let _ = writeln!(s, "theta={}", theta.join(","));
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Batch gradient descent from θ = 0 (or a seeded draw) until the step
/// size drops to `tol` or `max_iters` is reached.
pub fn train(samples: &Samples, kind: ModelKind, cfg: &TrainConfig) -> Result<TrainReport, MlError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(MlError::Empty);
    }
    if kind == ModelKind::Logistic {
        let bad = if samples.weights.is_none() {
            samples.y.iter().find(|&&y| y != 0.0 && y != 1.0)
        } else {
            samples.y.iter().find(|&&y| !(0.0..=1.0).contains(&y))
        };
        if let Some(&y) = bad {
            return Err(MlError::NonBinaryLabels(y));
        }
    }
    let start = Instant::now();
    let owned;
    let s = if cfg.intercept {
        owned = samples.with_intercept();
        &owned
    } else {
        samples
    };
    let d = s.dim();
    let mut theta = match cfg.seed {
        None => vec![0.0; d],
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..d).map(|_| rng.gen_range(-0.01..0.01)).collect()
        }
    };
    let loss = |t: &[f64]| match kind {
        ModelKind::Linear => loss_mse_weighted(s, t),
        ModelKind::Logistic => loss_logistic(s, t),
    };
    let mut curve = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    let mut last_step = f64::INFINITY;
    while iters < cfg.max_iters {
        if cfg.loss_every > 0 && iters % cfg.loss_every == 0 {
            curve.push((iters, loss(&theta)?));
        }
        let g = match kind {
            ModelKind::Linear => gradient_mse(s, &theta)?,
            ModelKind::Logistic => gradient_logistic(s, &theta)?,
        };
        let next = descend(&theta, &g, cfg.learning_rate, iters + 1)?;
        last_step = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        theta = next;
        iters += 1;
        if last_step <= cfg.tol {
            converged = true;
            break;
        }
    }
    let final_loss = loss(&theta)?;
    if cfg.loss_every > 0 {
        curve.push((iters, final_loss));
    }
    Ok(TrainReport {
        params: ModelParams { theta, kind, intercept: cfg.intercept },
        iters_run: iters,
        final_loss,
        converged,
        last_step,
        wall_time: start.elapsed().as_secs_f64(),
        loss_curve: curve,
        rows: samples.len(),
        weighted: samples.weights.is_some(),
        standardizer: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Mean squared error of the predictions (probabilities for logistic).
    pub mse: f64,
    /// Fraction correct at threshold 0.5; logistic only.
    pub accuracy: Option<f64>,
}

pub fn evaluate(params: &ModelParams, x: &Design, y: &[f64]) -> Result<Metrics, MlError> {
    if x.rows() != y.len() || x.cols() != params.features() {
        return Err(MlError::ShapeMismatch(format!(
            "X is {}×{}, y has {}, model expects {} features",
            x.rows(),
            x.cols(),
            y.len(),
            params.features()
        )));
    }
    if y.is_empty() {
        return Err(MlError::Empty);
    }
    let n = y.len() as f64;
    let preds: Vec<f64> = (0..x.rows()).map(|i| params.predict(x.row(i))).collect();
    let mse = preds.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n;
    let accuracy = (params.kind == ModelKind::Logistic)
        .then(|| preds.iter().zip(y).filter(|(p, t)| (**p >= 0.5) == (**t >= 0.5)).count() as f64 / n);
    Ok(Metrics { mse, accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TrainConfig {
        TrainConfig { learning_rate: 0.1, max_iters: 100_000, tol: 1e-12, intercept: false, seed: None, loss_every: 10 }
    }

    #[test]
    fn huge_tol_stops_after_one_iteration() {
        let x = Design::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let s = Samples::full(x, vec![1.0, 2.0]).unwrap();
        let r = train(&s, ModelKind::Linear, &TrainConfig { tol: 1e9, ..cfg() }).unwrap();
        assert_eq!(r.iters_run, 1);
        assert!(r.converged);
    }

    #[test]
    fn noiseless_linear_recovers_theta() {
        let theta_star = [0.5, -2.0, 3.0];
        let mut st = 7u64;
        let mut rows = Vec::new();
        for _ in 0..200 {
            rows.push(
                (0..3)
                    .map(|_| {
                        st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        (st >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let y: Vec<f64> = rows.iter().map(|r| r.iter().zip(&theta_star).map(|(a, b)| a * b).sum::<f64>() + 1.25).collect();
        let s = Samples::full(Design::from_rows(&rows).unwrap(), y).unwrap();
        let r = train(&s, ModelKind::Linear, &TrainConfig { intercept: true, learning_rate: 0.5, ..cfg() }).unwrap();
        assert!(r.converged);
        let want = [1.25, 0.5, -2.0, 3.0];
        for (a, b) in r.params.theta.iter().zip(want) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.params.theta);
        }
        // loss curve is non-increasing at this step size
        assert!(r.loss_curve.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15));
        assert!(r.kv_lines().contains("converged=true"));
        assert_eq!(r.to_json()["iters_run"], r.iters_run);
    }

    #[test]
    fn separable_logistic_is_accurate() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            let a = (i as f64 * 0.37).sin() * 3.0;
            let b = (i as f64 * 0.73).cos() * 3.0;
            if (a + b).abs() < 0.2 {
                continue;
            }
            rows.push(vec![a, b]);
            y.push(f64::from(a + b > 0.0));
        }
        let x = Design::from_rows(&rows).unwrap();
        let s = Samples::full(x.clone(), y.clone()).unwrap();
        let r = train(&s, ModelKind::Logistic, &TrainConfig { max_iters: 5000, ..cfg() }).unwrap();
        let m = evaluate(&r.params, &x, &y).unwrap();
        assert!(m.accuracy.unwrap() >= 0.99);
    }

    #[test]
    fn logistic_rejects_non_binary_labels() {
        let x = Design::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let s = Samples::full(x.clone(), vec![0.0, 0.5]).unwrap();
        assert!(matches!(train(&s, ModelKind::Logistic, &cfg()), Err(MlError::NonBinaryLabels(_))));
        let soft = Samples::weighted(x, vec![0.0, 0.5], vec![1.0, 2.0]).unwrap();
        assert!(train(&soft, ModelKind::Logistic, &TrainConfig { max_iters: 10, ..cfg() }).is_ok());
    }

    #[test]
    fn evaluation_fixture() {
        let p = ModelParams { theta: vec![0.0, 1.0], kind: ModelKind::Logistic, intercept: true };
        let xs = [-3.0, -1.0, -0.5, 0.5, 2.0, 4.0, -2.0, 1.0, 0.0, -4.0];
        let ys = [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let x = Design::new(10, 1, xs.to_vec()).unwrap();
        // predicted 1 for x >= 0: rows 3,4,5,7,8; correct: 0,1,3,4,6,7,8
        let m = evaluate(&p, &x, &ys).unwrap();
        assert_eq!(m.accuracy, Some(0.7));
        let half = ModelParams { theta: vec![0.0, 0.0], kind: ModelKind::Logistic, intercept: true };
        let m = evaluate(&half, &x, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.accuracy, Some(0.5));
        assert!((m.mse - 0.25).abs() < 1e-15);
        assert!(evaluate(&half, &Design::new(1, 2, vec![0.0; 2]).unwrap(), &[0.0]).is_err());
    }
}
