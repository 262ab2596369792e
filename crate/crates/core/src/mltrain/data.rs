use serde::{Deserialize, Serialize};

use crate::bitcodec::{record_to_f64, Record};
use crate::gede::CondensedSet;

use super::MlError;

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MlError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(MlError::ShapeMismatch(format!("{} values for {rows}×{cols}", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MlError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(MlError::ShapeMismatch(format!("row of length {} among rows of {cols}", r.len())));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy with a leading column of ones.
    pub fn with_intercept(&self) -> Design {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            data.push(1.0);
            data.extend_from_slice(self.row(i));
        }
        Design { rows: self.rows, cols: self.cols + 1, data }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Design {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Design { rows: idx.len(), cols: self.cols, data }
    }
}

/// Training rows with optional integer-valued weights.
///
/// `n` is the normalizer of the losses: the row count for unweighted data
/// and the weight total otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Design,
    pub y: Vec<f64>,
    pub weights: Option<Vec<f64>>,
    pub n: f64,
}

impl Samples {
    pub fn full(x: Design, y: Vec<f64>) -> Result<Self, MlError> {
        check_len(&x, &y)?;
        let n = x.rows() as f64;
        Ok(Self { x, y, weights: None, n })
    }

    pub fn weighted(x: Design, y: Vec<f64>, weights: Vec<f64>) -> Result<Self, MlError> {
        check_len(&x, &y)?;
        if weights.len() != y.len() {
            return Err(MlError::ShapeMismatch(format!("{} weights for {} rows", weights.len(), y.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(MlError::InvalidConfig(format!("weight {w}")));
        }
        let n = weights.iter().sum();
        Ok(Self { x, y, weights: Some(weights), n })
    }

    /// Splits typed records into features and the `target` column.
    pub fn from_records(rows: &[Record], target: usize, weights: Option<&[u64]>) -> Result<Self, MlError> {
        let (x, y) = split_target(rows, target)?;
        match weights {
            None => Self::full(x, y),
            Some(w) => Self::weighted(x, y, w.iter().map(|&w| w as f64).collect()),
        }
    }

    pub fn from_condensed(cs: &CondensedSet, target: usize) -> Result<Self, MlError> {
        Self::from_records(&cs.samples, target, Some(&cs.weights))
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Unweighted copy with every row repeated by its weight.
    pub fn expanded(&self) -> Samples {
        let mut idx = Vec::new();
        for i in 0..self.len() {
            idx.extend(std::iter::repeat_n(i, self.weight(i) as usize));
        }
        let y = idx.iter().map(|&i| self.y[i]).collect();
        Samples { x: self.x.select_rows(&idx), n: idx.len() as f64, y, weights: None }
    }

    pub fn with_intercept(&self) -> Samples {
        Samples { x: self.x.with_intercept(), ..self.clone() }
    }

    pub fn standardized(&self, st: &Standardizer) -> Samples {
        Samples { x: st.apply(&self.x), ..self.clone() }
    }
}

fn check_len(x: &Design, y: &[f64]) -> Result<(), MlError> {
    if x.rows() != y.len() {
        return Err(MlError::ShapeMismatch(format!("{} rows, {} targets", x.rows(), y.len())));
    }
    Ok(())
}

/// Features and target from typed records.
pub(crate) fn split_target(rows: &[Record], target: usize) -> Result<(Design, Vec<f64>), MlError> {
    let mut data = Vec::new();
    let mut y = Vec::with_capacity(rows.len());
    let width = rows.first().map_or(0, Vec::len);
    if target >= width && !rows.is_empty() {
        return Err(MlError::ShapeMismatch(format!("target column {target} of {width}")));
    }
    for r in rows {
        if r.len() != width {
            return Err(MlError::ShapeMismatch("ragged records".into()));
        }
        let v = record_to_f64(r);
        y.push(v[target]);
        data.extend(v.iter().enumerate().filter(|&(c, _)| c != target).map(|(_, &x)| x));
    }
    let cols = width.saturating_sub(1);
    Ok((Design::new(rows.len(), cols, data)?, y))
}

/// Per-column affine scaling to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on `x`, weighting row `i` by `weights[i]` when given. Constant
    /// columns get a scale of 1.
    pub fn fit(x: &Design, weights: Option<&[f64]>) -> Standardizer {
        let d = x.cols();
        let w = |i: usize| weights.map_or(1.0, |w| w[i]);
        let total: f64 = (0..x.rows()).map(w).sum();
        let mut mean = vec![0.0; d];
        for i in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += w(i) * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= total);
        let mut var = vec![0.0; d];
        for i in 0..x.rows() {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += w(i) * (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|v| (v / total).sqrt()).map(|s| if s > 0.0 && s.is_finite() { s } else { 1.0 }).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: &Design) -> Design {
        let mut data = Vec::with_capacity(x.as_slice().len());
        for i in 0..x.rows() {
            data.extend(x.row(i).iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s));
        }
        Design { rows: x.rows(), cols: x.cols(), data }
    }
}
