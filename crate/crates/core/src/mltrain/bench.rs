//! Wall-clock comparisons of full and condensed training.

use std::time::Instant;

use serde::Serialize;

use crate::bitcodec::{encode_tabular, ColumnSchema, Record, Schema, Value};
use crate::gede::{cluster_condense, find_beta_for_fraction, select_cluster_bits, CondensedSet, GedeError};

use super::kernels::{descend, gradient_mse};
use super::{closed_form_weighted, Design, MlError, Samples};

/// Mean seconds per gradient-descent iteration over `iters` iterations.
pub fn gd_iteration_seconds(s: &Samples, iters: usize) -> Result<f64, MlError> {
    let mut theta = vec![0.0; s.dim()];
    let start = Instant::now();
    for t in 0..iters {
        let g = gradient_mse(s, &theta)?;
        theta = descend(&theta, &g, 1e-3, t)?;
    }
    std::hint::black_box(&theta);
    Ok(start.elapsed().as_secs_f64() / iters.max(1) as f64)
}

/// Minimum seconds for one closed-form solve over `reps` repetitions.
pub fn closed_form_seconds(s: &Samples, reps: usize) -> Result<f64, MlError> {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        std::hint::black_box(closed_form_weighted(s)?);
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Cost-model speedup `(n d² + d³) / (m d² + d³)`.
pub fn predicted_closed_form_speedup(n: usize, m: usize, d: usize) -> f64 {
    let (n, m, d) = (n as f64, m as f64, d as f64);
    (n * d * d + d * d * d) / (m * d * d + d * d * d)
}

/// Float64 records `[x..., y]` with schema columns `x0..x{d-1}, y`.
pub fn to_records(x: &Design, y: &[f64]) -> (Schema, Vec<Record>) {
    let mut cols: Vec<ColumnSchema> = (0..x.cols()).map(|k| ColumnSchema::float64(format!("x{k}"))).collect();
    cols.push(ColumnSchema::float64("y"));
    let schema = Schema::new(cols).expect("float64 schema");
    let rows = (0..x.rows())
        .map(|i| x.row(i).iter().chain(std::iter::once(&y[i])).map(|&v| Value::F64(v)).collect())
        .collect();
    (schema, rows)
}

/// Condensed samples whose count first reaches `fraction` of the rows.
pub fn condense_to_fraction(x: &Design, y: &[f64], fraction: f64) -> Result<CondensedSet, GedeError> {
    let (schema, rows) = to_records(x, y);
    let bm = encode_tabular(&rows, &schema)?;
    let target = Some(schema.len() - 1);
    let beta = find_beta_for_fraction(&bm, fraction, target)?;
    let profile = crate::bitcodec::bit_entropy(&bm)?;
    cluster_condense(&bm, &select_cluster_bits(&profile, &schema, beta, target))
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub task: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub full_seconds: f64,
    pub condensed_seconds: f64,
    pub ratio: f64,
    pub predicted_ratio: f64,
}

impl BenchRow {
    pub fn kv_line(&self) -> String {
        format!(
            "task={} n={} m={} d={} full_s={:.6e} condensed_s={:.6e} ratio={:.4} predicted={:.4}",
            self.task, self.n, self.m, self.d, self.full_seconds, self.condensed_seconds, self.ratio, self.predicted_ratio
        )
    }
}

/// Per-iteration GD time of condensed over full data (`ratio` < 1 is faster).
pub fn bench_gd(full: &Samples, condensed: &Samples, iters: usize) -> Result<BenchRow, MlError> {
    // warm caches for both paths before timing
    gd_iteration_seconds(full, 2)?;
    gd_iteration_seconds(condensed, 2)?;
    let f = gd_iteration_seconds(full, iters)?;
    let c = gd_iteration_seconds(condensed, iters)?;
    Ok(BenchRow {
        task: "gd-iter".into(),
        n: full.len(),
        m: condensed.len(),
        d: full.dim(),
        full_seconds: f,
        condensed_seconds: c,
        ratio: c / f,
        predicted_ratio: condensed.len() as f64 / full.len() as f64,
    })
}

/// Closed-form speedup of condensed over full data (`ratio` is full / condensed).
pub fn bench_closed_form(full: &Samples, condensed: &Samples, reps: usize) -> Result<BenchRow, MlError> {
    let f = closed_form_seconds(full, reps)?;
    let c = closed_form_seconds(condensed, reps)?;
    Ok(BenchRow {
        task: "closed-form".into(),
        n: full.len(),
        m: condensed.len(),
        d: full.dim(),
        full_seconds: f,
        condensed_seconds: c,
        ratio: f / c,
        predicted_ratio: predicted_closed_form_speedup(full.len(), condensed.len(), full.dim()),
    })
}
