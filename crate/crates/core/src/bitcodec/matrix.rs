use super::schema::{Record, Schema, Value};
use super::CodecError;

/// Row-major bit matrix: `n` records of `l_t` bits each.
///
/// Bit position `p` of a row lives in word `p / 64` at bit `63 - p % 64`,
/// so reading a row's words in order reads its bits MSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    width: usize,
    stride: usize,
    words: Vec<u64>,
    schema: Schema,
}

impl BitMatrix {
    pub fn zeroed(n: usize, schema: Schema) -> Self {
        let width = schema.total_bits() as usize;
        let stride = width.div_ceil(64);
        Self { n, width, stride, words: vec![0; n * stride], schema }
    }

    /// Builds a matrix bit by bit. Mostly useful for tests.
    pub fn from_fn(n: usize, schema: Schema, mut bit: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bm = Self::zeroed(n, schema);
        for r in 0..n {
            for p in 0..bm.width {
                if bit(r, p) {
                    bm.set(r, p, true);
                }
            }
        }
        bm
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bits per record.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    #[inline]
    pub fn get(&self, row: usize, pos: usize) -> bool {
        debug_assert!(row < self.n && pos < self.width);
        let w = self.words[row * self.stride + pos / 64];
        (w >> (63 - pos % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, pos: usize, value: bool) {
        debug_assert!(row < self.n && pos < self.width);
        let w = &mut self.words[row * self.stride + pos / 64];
        let mask = 1u64 << (63 - pos % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.words[row * self.stride..(row + 1) * self.stride]
    }

    /// Reads `len` (≤ 64) bits starting at `start`, MSB first.
    pub fn read_field(&self, row: usize, start: usize, len: usize) -> u64 {
        debug_assert!(len <= 64);
        let mut v = 0u64;
        for p in start..start + len {
            v = (v << 1) | u64::from(self.get(row, p));
        }
        v
    }

    pub fn write_field(&mut self, row: usize, start: usize, len: usize, value: u64) {
        for j in 0..len {
            let bit = (value >> (len - 1 - j)) & 1 == 1;
            self.set(row, start + j, bit);
        }
    }

    /// Row as a '0'/'1' string.
    pub fn row_string(&self, row: usize) -> String {
        (0..self.width).map(|p| if self.get(row, p) { '1' } else { '0' }).collect()
    }

    pub fn decode_row(&self, row: usize) -> Record {
        self.schema
            .columns()
            .iter()
            .enumerate()
            .map(|(c, col)| {
                let range = self.schema.column_range(c);
                let raw = self.read_field(row, range.start as usize, col.bit_width as usize);
                col.decode_value(raw)
            })
            .collect()
    }

    /// Stacks `other` below `self`. Schemas must agree.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, CodecError> {
        if self.schema != other.schema {
            return Err(CodecError::SchemaMismatch("stacked matrices differ in schema".into()));
        }
        let mut words = Vec::with_capacity(self.words.len() + other.words.len());
        words.extend_from_slice(&self.words);
        words.extend_from_slice(&other.words);
        Ok(BitMatrix {
            n: self.n + other.n,
            width: self.width,
            stride: self.stride,
            words,
            schema: self.schema.clone(),
        })
    }

    /// Keeps the first `n` rows.
    pub fn truncated(&self, n: usize) -> BitMatrix {
        let n = n.min(self.n);
        BitMatrix {
            n,
            width: self.width,
            stride: self.stride,
            words: self.words[..n * self.stride].to_vec(),
            schema: self.schema.clone(),
        }
    }
}

/// Encodes typed records into their fixed-width bit form.
pub fn encode_tabular(rows: &[Record], schema: &Schema) -> Result<BitMatrix, CodecError> {
    let mut bm = BitMatrix::zeroed(rows.len(), schema.clone());
    for (r, row) in rows.iter().enumerate() {
        schema.check_record(row)?;
        for (c, (col, value)) in schema.columns().iter().zip(row).enumerate() {
            let raw = col.encode_value(value)?;
            let start = schema.column_range(c).start as usize;
            bm.write_field(r, start, col.bit_width as usize, raw);
        }
    }
    Ok(bm)
}

/// Decodes all rows, or only `indices` when given.
pub fn decode_tabular(bm: &BitMatrix, indices: Option<&[usize]>) -> Result<Vec<Record>, CodecError> {
    match indices {
        None => Ok((0..bm.n()).map(|r| bm.decode_row(r)).collect()),
        Some(idx) => idx
            .iter()
            .map(|&i| {
                if i >= bm.n() {
                    Err(CodecError::IndexOutOfRange { index: i, len: bm.n() })
                } else {
                    Ok(bm.decode_row(i))
                }
            })
            .collect(),
    }
}

/// Converts numeric columns to f64 in a record; helper for callers that
/// treat records as feature vectors.
pub fn record_to_f64(row: &[Value]) -> Vec<f64> {
    row.iter().map(Value::as_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::schema::ColumnSchema;
    use proptest::prelude::*;

    fn int4() -> Schema {
        Schema::new(vec![ColumnSchema::int("x", 0, 4)]).unwrap()
    }

    #[test]
    fn int_rows_expand_msb_first() {
        let bm = encode_tabular(&[vec![Value::Int(3)], vec![Value::Int(5)]], &int4()).unwrap();
        assert_eq!(bm.width(), 4);
        assert_eq!(bm.row_string(0), "0011");
        assert_eq!(bm.row_string(1), "0101");
    }

    #[test]
    fn decode_inverts_encode_example() {
        let bm = BitMatrix::from_fn(1, int4(), |_, p| p >= 2);
        assert_eq!(decode_tabular(&bm, None).unwrap(), vec![vec![Value::Int(3)]]);
    }

    #[test]
    fn float_zero_is_all_zero_bits() {
        let s = Schema::new(vec![ColumnSchema::float32("f")]).unwrap();
        let bm = encode_tabular(&[vec![Value::F32(0.0)]], &s).unwrap();
        assert_eq!(bm.row_string(0), "0".repeat(32));
    }

    #[test]
    fn empty_index_list_gives_no_records() {
        let bm = encode_tabular(&[vec![Value::Int(3)]], &int4()).unwrap();
        assert!(decode_tabular(&bm, Some(&[])).unwrap().is_empty());
        assert!(matches!(
            decode_tabular(&bm, Some(&[1])),
            Err(CodecError::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let err = encode_tabular(&[vec![Value::Int(1), Value::Int(2)]], &int4()).unwrap_err();
        assert!(matches!(err, CodecError::SchemaMismatch(_)));
    }

    #[test]
    fn float32_matrix_round_trip() {
        let s = Schema::new((0..5).map(|i| ColumnSchema::float32(format!("c{i}"))).collect()).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let rows: Vec<Record> = (0..100)
            .map(|_| {
                (0..5)
                    .map(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        Value::F32(f32::from_bits(state as u32))
                    })
                    .collect()
            })
            .collect();
        let bm = encode_tabular(&rows, &s).unwrap();
        assert_eq!(decode_tabular(&bm, None).unwrap(), rows);
    }

    fn value_strategy() -> impl Strategy<Value = (ColumnSchema, Vec<Value>)> {
        prop_oneof![
            prop::collection::vec(any::<u32>(), 1..20).prop_map(|v| (
                ColumnSchema::float32("f"),
                v.into_iter().map(|b| Value::F32(f32::from_bits(b))).collect()
            )),
            prop::collection::vec(any::<u64>(), 1..20).prop_map(|v| (
                ColumnSchema::float64("d"),
                v.into_iter().map(|b| Value::F64(f64::from_bits(b))).collect()
            )),
            prop::collection::vec(any::<i64>(), 1..20).prop_map(|v| (
                ColumnSchema::int("i", 0, 1),
                v.into_iter().map(Value::Int).collect()
            )),
            prop::collection::vec(0i64..50, 1..20).prop_map(|v| (
                ColumnSchema::categorical("k", 0, 1),
                v.into_iter().map(Value::Cat).collect()
            )),
        ]
    }

    proptest! {
        #[test]
        fn typed_round_trip_is_bit_exact(cols in prop::collection::vec(value_strategy(), 1..6)) {
            let n = cols.iter().map(|(_, v)| v.len()).min().unwrap();
            let rows: Vec<Record> = (0..n).map(|r| cols.iter().map(|(_, v)| v[r]).collect()).collect();
            let names: Vec<_> = cols.iter().enumerate()
                .map(|(i, (c, _))| (format!("{}{i}", c.name), c.kind)).collect();
            let schema = Schema::infer(&names, &rows).unwrap();
            let bm = encode_tabular(&rows, &schema).unwrap();
            prop_assert_eq!(bm.width(), schema.total_bits() as usize);
            prop_assert_eq!(decode_tabular(&bm, None).unwrap(), rows);
        }
    }
}
