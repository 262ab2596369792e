//! Seeded synthetic datasets for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Design;

/// `y = xᵀθ* + 0.5 + noise·ε` with standard normal features and
/// `θ*_k = (−1)^k (1 + k/d)`.
pub fn linear(n: usize, d: usize, noise: f64, seed: u64) -> (Design, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..d).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + k as f64 / d as f64)).collect();
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let e: f64 = rng.sample(StandardNormal);
        y.push(row.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>() + 0.5 + noise * e);
        data.extend(row);
    }
    (Design::new(n, d, data).expect("shape"), y, theta)
}

/// Binary labels from a noisy linear score.
pub fn logistic(n: usize, d: usize, flip: f64, seed: u64) -> (Design, Vec<f64>) {
    let (x, score, _) = linear(n, d, 0.0, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let y = score.iter().map(|&s| f64::from((s > 0.5) != (rng.gen::<f64>() < flip))).collect();
    (x, y)
}
