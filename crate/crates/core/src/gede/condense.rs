use crate::bitcodec::{BitMatrix, ColumnKind, Record, Schema, Value};

use super::select::ClusterBits;
use super::GedeError;

/// Groups rows by their values at a growing set of bit positions.
///
/// Group ids are dense and assigned in order of first occurrence, so the
/// group of row 0 is 0 and so on.
#[derive(Debug, Clone)]
pub(crate) struct Partition {
    ids: Vec<u32>,
    groups: usize,
    scratch: Vec<[u32; 2]>,
}

impl Partition {
    pub fn single(n: usize) -> Self {
        Self { ids: vec![0; n], groups: usize::from(n > 0), scratch: Vec::new() }
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Splits every group by the bit at `pos`.
    pub fn refine(&mut self, bm: &BitMatrix, pos: usize) {
        self.scratch.clear();
        self.scratch.resize(self.groups, [u32::MAX; 2]);
        let mut next = 0u32;
        for (r, id) in self.ids.iter_mut().enumerate() {
            let slot = &mut self.scratch[*id as usize][usize::from(bm.get(r, pos))];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *id = *slot;
        }
        self.groups = next as usize;
    }
}

/// Weighted representative rows, one per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedSet {
    pub schema: Schema,
    pub samples: Vec<Record>,
    pub weights: Vec<u64>,
    pub source_beta: usize,
}

impl CondensedSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }
}

pub(crate) fn check_positions(positions: &[u32], width: usize) -> Result<(), GedeError> {
    let mut seen = vec![false; width];
    for &p in positions {
        let p = p as usize;
        if p >= width || std::mem::replace(&mut seen[p], true) {
            return Err(GedeError::InvalidPositions(format!("position {p} repeated or outside 0..{width}")));
        }
    }
    Ok(())
}

/// Number of distinct key patterns at `positions`.
pub fn distinct_keys(bm: &BitMatrix, positions: &[u32]) -> usize {
    let mut part = Partition::single(bm.n());
    for &p in positions {
        part.refine(bm, p as usize);
    }
    part.groups()
}

/// Clusters rows sharing the same bits at `cb.positions` and replaces each
/// cluster by its per-column mean, weighted by the cluster size.
pub fn cluster_condense(bm: &BitMatrix, cb: &ClusterBits) -> Result<CondensedSet, GedeError> {
    check_positions(&cb.positions, bm.width())?;
    let mut part = Partition::single(bm.n());
    for &p in &cb.positions {
        part.refine(bm, p as usize);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); part.groups()];
    for (r, &id) in part.ids().iter().enumerate() {
        members[id as usize].push(r);
    }
    let rows: Vec<Record> = (0..bm.n()).map(|r| bm.decode_row(r)).collect();
    let schema = bm.schema().clone();
    let samples = members
        .iter()
        .map(|m| {
            schema
                .columns()
                .iter()
                .enumerate()
                .map(|(c, col)| column_mean(col.kind, m.iter().map(|&r| &rows[r][c])))
                .collect()
        })
        .collect();
    let weights = members.iter().map(|m| m.len() as u64).collect();
    Ok(CondensedSet { schema, samples, weights, source_beta: cb.beta })
}

fn column_mean<'a>(kind: ColumnKind, values: impl Iterator<Item = &'a Value> + Clone) -> Value {
    match kind {
        ColumnKind::Float32 => {
            let vs: Vec<f32> = values.map(|v| match v {
                Value::F32(x) => *x,
                _ => unreachable!("schema-checked"),
            }).collect();
            Value::F32(float_mean(&vs, |x| f64::from(*x), |m| m as f32, f32::to_bits, f32::NAN))
        }
        ColumnKind::Float64 => {
            let vs: Vec<f64> = values.map(|v| match v {
                Value::F64(x) => *x,
                _ => unreachable!("schema-checked"),
            }).collect();
            Value::F64(float_mean(&vs, |x| *x, |m| m, f64::to_bits, f64::NAN))
        }
        ColumnKind::Int => Value::Int(int_mean(values.map(|v| v.as_i64().expect("schema-checked")))),
        ColumnKind::Categorical => Value::Cat(int_mean(values.map(|v| v.as_i64().expect("schema-checked")))),
    }
}

/// Mean that returns the member itself when all members are bit-identical
/// and otherwise stays inside the members' range.
fn float_mean<T: Copy + PartialOrd, B: PartialEq>(
    vs: &[T],
    widen: impl Fn(&T) -> f64,
    narrow: impl Fn(f64) -> T,
    bits: impl Fn(T) -> B,
    nan: T,
) -> T {
    let first = vs[0];
    if vs.iter().all(|&v| bits(v) == bits(first)) {
        return first;
    }
    let wide: Vec<f64> = vs.iter().map(&widen).collect();
    if wide.iter().any(|v| v.is_nan()) {
        return nan;
    }
    let k = wide.len() as f64;
    let mut mean = wide.iter().sum::<f64>() / k;
    if !mean.is_finite() && wide.iter().all(|v| v.is_finite()) {
        mean = wide.iter().map(|v| v / k).sum();
    }
    let lo = wide.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = wide.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mean.is_nan() {
        return nan;
    }
    let mut out = narrow(mean.clamp(lo, hi));
    // narrowing can round past the range when the members are adjacent floats
    if widen(&out) < lo {
        out = narrow(lo);
    } else if widen(&out) > hi {
        out = narrow(hi);
    }
    out
}

/// Mean rounded half away from zero.
fn int_mean(values: impl Iterator<Item = i64>) -> i64 {
    let (sum, count) = values.fold((0i128, 0i128), |(s, c), v| (s + i128::from(v), c + 1));
    let q = (2 * sum.abs() + count) / (2 * count);
    (if sum < 0 { -q } else { q }) as i64
}
