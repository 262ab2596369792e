use std::collections::HashSet;

use crate::bitcodec::{BitMatrix, Record, Schema};

use super::bits::{ceil_log2, get_bit, get_bits, BitWriter};
use super::condense::{check_positions, cluster_condense, CondensedSet};
use super::select::ClusterBits;
use super::size::compressed_size;
use super::{CondensedMode, GedeError};

/// Everything in a container except the three bit blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerHeader {
    pub schema: Schema,
    pub target: Option<u32>,
    pub mode: CondensedMode,
    pub n: u64,
    pub m: u64,
    pub n_b: u64,
    pub beta: u32,
    pub tau: u32,
    pub base_positions: Vec<u32>,
    pub cluster_positions: Vec<u32>,
}

impl ContainerHeader {
    pub fn l_t(&self) -> u32 {
        self.schema.total_bits()
    }

    pub fn l_b(&self) -> u32 {
        self.base_positions.len() as u32
    }

    pub fn l_d(&self) -> u32 {
        self.l_t() - self.l_b()
    }

    /// Bits per base id.
    pub fn id_bits(&self) -> u32 {
        ceil_log2(self.n_b)
    }

    /// Bits per stored record: base id then deviation.
    pub fn record_bits(&self) -> u64 {
        u64::from(self.id_bits()) + u64::from(self.l_d())
    }

    pub fn weight_bits(&self) -> u32 {
        ceil_log2(self.n)
    }

    pub fn rows(&self) -> u64 {
        self.n + self.m
    }

    pub fn base_block_bytes(&self) -> u64 {
        (u128::from(self.n_b) * u128::from(self.l_b())).div_ceil(8) as u64
    }

    pub fn record_block_bytes(&self) -> u64 {
        (u128::from(self.rows()) * u128::from(self.record_bits())).div_ceil(8) as u64
    }

    pub fn weight_block_bytes(&self) -> u64 {
        (u128::from(self.m) * u128::from(self.weight_bits())).div_ceil(8) as u64
    }

    /// Compressed size S* in bits, without parameter overhead.
    pub fn best_size(&self) -> u64 {
        compressed_size(self.n_b, u64::from(self.l_b()), u64::from(self.l_d()), self.n, self.m, 0)
    }

    /// Positions not in the base, increasing.
    pub fn deviation_positions(&self) -> Vec<u32> {
        let mut in_base = vec![false; self.l_t() as usize];
        for &p in &self.base_positions {
            in_base[p as usize] = true;
        }
        (0..self.l_t()).filter(|&p| !in_base[p as usize]).collect()
    }

    /// Structural checks that need no block data.
    pub fn validate(&self) -> Result<(), GedeError> {
        let corrupt = |msg: String| Err(GedeError::CorruptContainer(msg));
        let l_t = self.l_t();
        if self.n == 0 {
            return corrupt("container holds no records".into());
        }
        if self.m > self.n {
            return corrupt("more condensed rows than records".into());
        }
        if self.n > u64::MAX / 2 {
            return corrupt(format!("{} records", self.n));
        }
        if !self.base_positions.windows(2).all(|w| w[0] < w[1]) {
            return corrupt("base positions are not strictly increasing".into());
        }
        if self.base_positions.last().is_some_and(|&p| p >= l_t) {
            return corrupt("base position outside record".into());
        }
        if check_positions(&self.cluster_positions, l_t as usize).is_err() {
            return corrupt("invalid cluster positions".into());
        }
        if self.n_b == 0 || self.n_b > self.rows() {
            return corrupt(format!("{} bases for {} records", self.n_b, self.rows()));
        }
        if self.l_b() == 0 && self.n_b != 1 {
            return corrupt("empty base with more than one base".into());
        }
        if self.l_b() < 64 && self.n_b > 1u64 << self.l_b() {
            return corrupt("more bases than base patterns".into());
        }
        if self.mode != CondensedMode::Stored && self.m != 0 {
            return corrupt("condensed rows without stored mode".into());
        }
        if self.mode != CondensedMode::None && self.cluster_positions.len() > self.beta as usize {
            return corrupt("more cluster positions than beta".into());
        }
        if self.target.is_some_and(|t| t as usize >= self.schema.len()) {
            return corrupt("target column outside schema".into());
        }
        Ok(())
    }
}

/// EntroGeDe output: deduplicated bases, per-record base ids with
/// deviations, and condensed-sample weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedDataset {
    pub(crate) header: ContainerHeader,
    pub(crate) bases: Vec<u8>,
    pub(crate) records: Vec<u8>,
    pub(crate) weights: Vec<u64>,
}

impl CompressedDataset {
    /// Splits every row of `all` (the `n` originals followed by `m`
    /// condensed rows) at `base_positions`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn materialize(
        all: &BitMatrix,
        n: usize,
        base_positions: Vec<u32>,
        weights: Vec<u64>,
        cluster_positions: Vec<u32>,
        mode: CondensedMode,
        beta: u32,
        tau: u32,
    ) -> Self {
        let rows = all.n();
        let m = rows - n;
        let mut header = ContainerHeader {
            schema: all.schema().clone(),
            target: None,
            mode,
            n: n as u64,
            m: m as u64,
            n_b: 0,
            beta,
            tau,
            base_positions,
            cluster_positions,
        };
        let dev = header.deviation_positions();
        let mut index = std::collections::HashMap::new();
        let mut base_list: Vec<Vec<bool>> = Vec::new();
        let mut ids = Vec::with_capacity(rows);
        for r in 0..rows {
            let key: Vec<bool> = header.base_positions.iter().map(|&p| all.get(r, p as usize)).collect();
            let next = base_list.len() as u64;
            let id = *index.entry(key.clone()).or_insert_with(|| {
                base_list.push(key);
                next
            });
            ids.push(id);
        }
        header.n_b = base_list.len() as u64;

        let mut bw = BitWriter::with_capacity_bits(header.n_b * u64::from(header.l_b()));
        for b in &base_list {
            for &bit in b {
                bw.push(bit);
            }
        }
        let bases = bw.finish();

        let id_bits = header.id_bits();
        let mut rw = BitWriter::with_capacity_bits(rows as u64 * header.record_bits());
        for (r, &id) in ids.iter().enumerate() {
            rw.push_bits(id, id_bits);
            for &p in &dev {
                rw.push(all.get(r, p as usize));
            }
        }
        let records = rw.finish();
        Self { header, bases, records, weights }
    }

    pub(crate) fn from_parts(
        header: ContainerHeader,
        bases: Vec<u8>,
        records: Vec<u8>,
        weights: Vec<u64>,
    ) -> Result<Self, GedeError> {
        let cd = Self { header, bases, records, weights };
        cd.validate()?;
        Ok(cd)
    }

    pub fn header(&self) -> &ContainerHeader {
        &self.header
    }

    pub fn schema(&self) -> &Schema {
        &self.header.schema
    }

    pub fn n(&self) -> u64 {
        self.header.n
    }

    pub fn m(&self) -> u64 {
        self.header.m
    }

    pub fn n_b(&self) -> u64 {
        self.header.n_b
    }

    pub fn l_t(&self) -> u32 {
        self.header.l_t()
    }

    pub fn l_b(&self) -> u32 {
        self.header.l_b()
    }

    pub fn l_d(&self) -> u32 {
        self.header.l_d()
    }

    pub fn best_size(&self) -> u64 {
        self.header.best_size()
    }

    pub fn mode(&self) -> CondensedMode {
        self.header.mode
    }

    pub fn base_positions(&self) -> &[u32] {
        &self.header.base_positions
    }

    pub fn cluster_positions(&self) -> &[u32] {
        &self.header.cluster_positions
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn target(&self) -> Option<usize> {
        self.header.target.map(|t| t as usize)
    }

    pub fn set_target(&mut self, target: Option<usize>) -> Result<(), GedeError> {
        if let Some(t) = target {
            if t >= self.schema().len() {
                return Err(GedeError::InvalidConfig(format!("target column {t} outside schema")));
            }
        }
        self.header.target = target.map(|t| t as u32);
        Ok(())
    }

    /// Size of the uncompressed binary view of the original records, in bits.
    pub fn raw_bits(&self) -> u64 {
        self.n() * u64::from(self.l_t())
    }

    /// Base id and deviation bits of stored row `row` (originals first,
    /// then condensed rows).
    pub fn record_parts(&self, row: u64) -> (u64, Vec<bool>) {
        let rb = self.header.record_bits();
        let start = row * rb;
        let id = get_bits(&self.records, start, self.header.id_bits());
        let dev_start = start + u64::from(self.header.id_bits());
        let dev = (0..u64::from(self.l_d())).map(|k| get_bit(&self.records, dev_start + k)).collect();
        (id, dev)
    }

    pub fn base_bits(&self, id: u64) -> Vec<bool> {
        let l_b = u64::from(self.l_b());
        (0..l_b).map(|k| get_bit(&self.bases, id * l_b + k)).collect()
    }

    fn write_row(&self, out: &mut BitMatrix, out_row: usize, row: u64, dev_positions: &[u32]) {
        let (id, dev) = self.record_parts(row);
        for (bit, &p) in self.base_bits(id).into_iter().zip(&self.header.base_positions) {
            out.set(out_row, p as usize, bit);
        }
        for (bit, &p) in dev.into_iter().zip(dev_positions) {
            out.set(out_row, p as usize, bit);
        }
    }

    /// Checks every invariant, including the block contents.
    pub fn validate(&self) -> Result<(), GedeError> {
        let h = &self.header;
        h.validate()?;
        let corrupt = |msg: &str| Err(GedeError::CorruptContainer(msg.to_string()));
        if self.bases.len() as u64 != h.base_block_bytes() {
            return corrupt("base block length");
        }
        if self.records.len() as u64 != h.record_block_bytes() {
            return corrupt("record block length");
        }
        if self.weights.len() as u64 != h.m {
            return corrupt("weight count");
        }
        if h.m > 0 {
            if self.weights.iter().any(|&w| w == 0 || w > h.n) {
                return corrupt("weight out of range");
            }
            if self.weights.iter().try_fold(0u64, |a, &w| a.checked_add(w)) != Some(h.n) {
                return corrupt("weights do not sum to n");
            }
        }
        if h.id_bits() == 0 {
            return Ok(());
        }
        let mut used = vec![false; h.n_b as usize];
        for r in 0..h.rows() {
            let id = get_bits(&self.records, r * h.record_bits(), h.id_bits());
            if id >= h.n_b {
                return corrupt("base id out of range");
            }
            used[id as usize] = true;
        }
        if used.iter().any(|u| !u) {
            return corrupt("unreferenced base");
        }
        let mut seen = HashSet::with_capacity(h.n_b as usize);
        for id in 0..h.n_b {
            if !seen.insert(self.base_bits(id)) {
                return corrupt("duplicate base");
            }
        }
        Ok(())
    }
}

/// Rebuilds the original bit matrix.
pub fn decompress(cd: &CompressedDataset) -> Result<BitMatrix, GedeError> {
    cd.validate()?;
    Ok(rows_matrix(cd, 0..cd.n()))
}

fn rows_matrix(cd: &CompressedDataset, rows: std::ops::Range<u64>) -> BitMatrix {
    let dev = cd.header.deviation_positions();
    let mut out = BitMatrix::zeroed((rows.end - rows.start) as usize, cd.schema().clone());
    for (k, r) in rows.enumerate() {
        cd.write_row(&mut out, k, r, &dev);
    }
    out
}

/// Decodes original record `index` without touching other records.
pub fn random_access(cd: &CompressedDataset, index: u64) -> Result<Record, GedeError> {
    if index >= cd.n() {
        return Err(GedeError::IndexOutOfRange { index, len: cd.n() });
    }
    let dev = cd.header.deviation_positions();
    let mut row = BitMatrix::zeroed(1, cd.schema().clone());
    cd.write_row(&mut row, 0, index, &dev);
    Ok(row.decode_row(0))
}

/// The weighted condensed samples, read back or regenerated.
pub fn get_condensed(cd: &CompressedDataset) -> Result<CondensedSet, GedeError> {
    match cd.mode() {
        CondensedMode::None => Err(GedeError::NoCondensedData),
        CondensedMode::Stored => {
            let bm = rows_matrix(cd, cd.n()..cd.n() + cd.m());
            Ok(CondensedSet {
                schema: cd.schema().clone(),
                samples: (0..bm.n()).map(|r| bm.decode_row(r)).collect(),
                weights: cd.weights.clone(),
                source_beta: cd.header.beta as usize,
            })
        }
        CondensedMode::OnDemand => {
            let bm = decompress(cd)?;
            let cb = ClusterBits {
                positions: cd.cluster_positions().to_vec(),
                beta: cd.header.beta as usize,
            };
            cluster_condense(&bm, &cb)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::{ColumnSchema, Value};

    fn two_bit_schema() -> Schema {
        Schema::new(vec![ColumnSchema::int("x", 0, 2)]).unwrap()
    }

    #[test]
    fn single_base_duplicates() {
        // base "10" at both positions, no deviation bits, three records
        let header = ContainerHeader {
            schema: two_bit_schema(),
            target: None,
            mode: CondensedMode::None,
            n: 3,
            m: 0,
            n_b: 1,
            beta: 0,
            tau: 1,
            base_positions: vec![0, 1],
            cluster_positions: vec![],
        };
        let cd = CompressedDataset::from_parts(header, vec![0b1000_0000], vec![], vec![]).unwrap();
        let bm = decompress(&cd).unwrap();
        assert_eq!(bm.n(), 3);
        for r in 0..3 {
            assert_eq!(bm.row_string(r), "10");
            assert_eq!(random_access(&cd, r as u64).unwrap(), vec![Value::Int(2)]);
        }
        assert!(matches!(random_access(&cd, 3), Err(GedeError::IndexOutOfRange { .. })));
        assert!(matches!(get_condensed(&cd), Err(GedeError::NoCondensedData)));
    }

    #[test]
    fn detects_corruption() {
        let header = ContainerHeader {
            schema: two_bit_schema(),
            target: None,
            mode: CondensedMode::None,
            n: 2,
            m: 0,
            n_b: 2,
            beta: 0,
            tau: 1,
            base_positions: vec![0],
            cluster_positions: vec![],
        };
        // records: id 0 dev 1, id 0 dev 0 -> base 1 unreferenced
        let err = CompressedDataset::from_parts(header.clone(), vec![0b0100_0000], vec![0b0100_0000], vec![]);
        assert!(matches!(err, Err(GedeError::CorruptContainer(_))));
        // duplicate bases
        let err = CompressedDataset::from_parts(header.clone(), vec![0b0000_0000], vec![0b0110_0000], vec![]);
        assert!(matches!(err, Err(GedeError::CorruptContainer(_))));
        // valid: bases 0 and 1
        let ok = CompressedDataset::from_parts(header, vec![0b0100_0000], vec![0b0110_0000], vec![]).unwrap();
        let bm = decompress(&ok).unwrap();
        assert_eq!(bm.row_string(0), "01");
        assert_eq!(bm.row_string(1), "10");
    }
}
