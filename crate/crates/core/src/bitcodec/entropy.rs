use super::matrix::BitMatrix;
use super::CodecError;

/// Per-position Shannon entropy of a bit matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    n: usize,
    ones: Vec<u64>,
    h: Vec<f64>,
}

impl EntropyProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn entropy(&self, pos: usize) -> f64 {
        self.h[pos]
    }

    pub fn entropies(&self) -> &[f64] {
        &self.h
    }

    pub fn ones_count(&self) -> &[u64] {
        &self.ones
    }

    pub fn is_constant(&self, pos: usize) -> bool {
        let c = self.ones[pos];
        c == 0 || c == self.n as u64
    }

    pub fn constant_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|p| self.is_constant(p)).collect()
    }

    pub fn constant_positions(&self) -> Vec<u32> {
        (0..self.len()).filter(|&p| self.is_constant(p)).map(|p| p as u32).collect()
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    let h = term(p) + term(1.0 - p);
    h.clamp(0.0, 1.0)
}

/// Entropy of a position with `ones` set bits out of `n`. Symmetric in
/// `ones` and `n - ones` down to the last bit.
fn count_entropy(ones: u64, n: u64) -> f64 {
    let k = ones.min(n - ones);
    if k == 0 {
        return 0.0;
    }
    let p = k as f64 / n as f64;
    let q = (n - k) as f64 / n as f64;
    (-p * p.log2() - q * q.log2()).clamp(0.0, 1.0)
}

pub fn bit_entropy(bm: &BitMatrix) -> Result<EntropyProfile, CodecError> {
    let n = bm.n();
    if n == 0 {
        return Err(CodecError::EmptyDataset);
    }
    let width = bm.width();
    let mut ones = vec![0u64; width];
    for r in 0..n {
        for (wi, &word) in bm.row_words(r).iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let lead = w.leading_zeros() as usize;
                ones[wi * 64 + lead] += 1;
                w &= !(1u64 << (63 - lead));
            }
        }
    }
    let h = ones
        .iter()
        .map(|&c| count_entropy(c, n as u64))
        .collect();
    Ok(EntropyProfile { n, ones, h })
}
