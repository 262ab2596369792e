use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodecError;

/// Storage class of a tabular column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Float32,
    Float64,
    Int,
    Categorical,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Float32 => "float32",
            ColumnKind::Float64 => "float64",
            ColumnKind::Int => "int",
            ColumnKind::Categorical => "categorical",
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, ColumnKind::Float32 | ColumnKind::Float64)
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ColumnKind::Float32 => 0,
            ColumnKind::Float64 => 1,
            ColumnKind::Int => 2,
            ColumnKind::Categorical => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => ColumnKind::Float32,
            1 => ColumnKind::Float64,
            2 => ColumnKind::Int,
            3 => ColumnKind::Categorical,
            _ => return None,
        })
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColumnKind {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "float32" | "f32" => Ok(ColumnKind::Float32),
            "float64" | "f64" | "float" => Ok(ColumnKind::Float64),
            "int" | "integer" => Ok(ColumnKind::Int),
            "categorical" | "cat" => Ok(ColumnKind::Categorical),
            other => Err(CodecError::Schema(format!("unknown column kind `{other}`"))),
        }
    }
}

/// One column of a record: its kind, how many bits it occupies and the
/// offset subtracted from integer values before encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub bit_width: u32,
    #[serde(default)]
    pub offset: i64,
}

impl ColumnSchema {
    pub fn float32(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Float32, bit_width: 32, offset: 0 }
    }

    pub fn float64(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Float64, bit_width: 64, offset: 0 }
    }

    pub fn int(name: impl Into<String>, offset: i64, bit_width: u32) -> Self {
        Self { name: name.into(), kind: ColumnKind::Int, bit_width, offset }
    }

    pub fn categorical(name: impl Into<String>, offset: i64, bit_width: u32) -> Self {
        Self { name: name.into(), kind: ColumnKind::Categorical, bit_width, offset }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let ok = match self.kind {
            ColumnKind::Float32 => self.bit_width == 32,
            ColumnKind::Float64 => self.bit_width == 64,
            ColumnKind::Int | ColumnKind::Categorical => (1..=64).contains(&self.bit_width),
        };
        if !ok {
            return Err(CodecError::Schema(format!(
                "column `{}`: bit width {} is invalid for {}",
                self.name, self.bit_width, self.kind
            )));
        }
        if self.kind.is_float() && self.offset != 0 {
            return Err(CodecError::Schema(format!(
                "column `{}`: float columns take no offset",
                self.name
            )));
        }
        Ok(())
    }

    /// Raw field bits for `value`, right-aligned in a u64.
    pub fn encode_value(&self, value: &Value) -> Result<u64, CodecError> {
        match (self.kind, value) {
            (ColumnKind::Float32, Value::F32(v)) => Ok(u64::from(v.to_bits())),
            (ColumnKind::Float64, Value::F64(v)) => Ok(v.to_bits()),
            (ColumnKind::Int, Value::Int(v)) | (ColumnKind::Categorical, Value::Cat(v)) => {
                let shifted = i128::from(*v) - i128::from(self.offset);
                let limit = 1i128 << self.bit_width;
                if shifted < 0 || shifted >= limit {
                    return Err(CodecError::RangeOverflow {
                        column: self.name.clone(),
                        value: *v,
                        offset: self.offset,
                        bit_width: self.bit_width,
                    });
                }
                Ok(shifted as u64)
            }
            (kind, v) => Err(CodecError::SchemaMismatch(format!(
                "column `{}` is {kind} but got {}",
                self.name,
                v.kind()
            ))),
        }
    }

    pub fn decode_value(&self, raw: u64) -> Value {
        match self.kind {
            ColumnKind::Float32 => Value::F32(f32::from_bits(raw as u32)),
            ColumnKind::Float64 => Value::F64(f64::from_bits(raw)),
            ColumnKind::Int => Value::Int((i128::from(self.offset) + i128::from(raw)) as i64),
            ColumnKind::Categorical => {
                Value::Cat((i128::from(self.offset) + i128::from(raw)) as i64)
            }
        }
    }
}

/// A single typed cell.
///
/// Equality is bit equality: two floats are equal when their IEEE-754
/// patterns are, so NaN payloads compare and `0.0 != -0.0`.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    F32(f32),
    F64(f64),
    Int(i64),
    Cat(i64),
}

impl Value {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Value::F32(_) => ColumnKind::Float32,
            Value::F64(_) => ColumnKind::Float64,
            Value::Int(_) => ColumnKind::Int,
            Value::Cat(_) => ColumnKind::Categorical,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::F32(v) => f64::from(v),
            Value::F64(v) => v,
            Value::Int(v) | Value::Cat(v) => v as f64,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Value::Int(v) | Value::Cat(v) => Some(v),
            _ => None,
        }
    }

    pub fn parse(kind: ColumnKind, text: &str) -> Result<Self, CodecError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(CodecError::MissingValue);
        }
        let bad = || CodecError::SchemaMismatch(format!("`{t}` is not a valid {kind}"));
        Ok(match kind {
            ColumnKind::Float32 => Value::F32(t.parse().map_err(|_| bad())?),
            ColumnKind::Float64 => Value::F64(t.parse().map_err(|_| bad())?),
            ColumnKind::Int => Value::Int(t.parse().map_err(|_| bad())?),
            ColumnKind::Categorical => Value::Cat(t.parse().map_err(|_| bad())?),
        })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::F32(a), Value::F32(b)) => a.to_bits() == b.to_bits(),
            (Value::F64(a), Value::F64(b)) => a.to_bits() == b.to_bits(),
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Cat(a), Value::Cat(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::F32(v) => write!(f, "{v}"),
            Value::F64(v) => write!(f, "{v}"),
            Value::Int(v) | Value::Cat(v) => write!(f, "{v}"),
        }
    }
}

pub type Record = Vec<Value>;

/// Ordered column list with precomputed bit offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<ColumnSchema>,
    starts: Vec<u32>,
    total_bits: u32,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self, CodecError> {
        if columns.is_empty() {
            return Err(CodecError::Schema("schema has no columns".into()));
        }
        let mut starts = Vec::with_capacity(columns.len());
        let mut total: u64 = 0;
        for c in &columns {
            c.validate()?;
            starts.push(total as u32);
            total += u64::from(c.bit_width);
        }
        if total > u64::from(u32::MAX) {
            return Err(CodecError::Schema("record wider than 2^32 bits".into()));
        }
        Ok(Self { columns, starts, total_bits: total as u32 })
    }

    /// Builds a schema from column names and kinds, choosing for integer
    /// and categorical columns the observed minimum as offset and the
    /// smallest width that covers the observed range.
    pub fn infer(names: &[(String, ColumnKind)], rows: &[Record]) -> Result<Self, CodecError> {
        let mut columns = Vec::with_capacity(names.len());
        for (c, (name, kind)) in names.iter().enumerate() {
            let col = match kind {
                ColumnKind::Float32 => ColumnSchema::float32(name.clone()),
                ColumnKind::Float64 => ColumnSchema::float64(name.clone()),
                ColumnKind::Int | ColumnKind::Categorical => {
                    let mut lo = i64::MAX;
                    let mut hi = i64::MIN;
                    for (r, row) in rows.iter().enumerate() {
                        let v = row.get(c).ok_or_else(|| {
                            CodecError::SchemaMismatch(format!("row {r} has {} fields", row.len()))
                        })?;
                        let x = match (kind, v) {
                            (ColumnKind::Int, Value::Int(x)) => *x,
                            (ColumnKind::Categorical, Value::Cat(x)) => *x,
                            _ => {
                                return Err(CodecError::SchemaMismatch(format!(
                                    "row {r} column `{name}` is {} not {kind}",
                                    v.kind()
                                )))
                            }
                        };
                        lo = lo.min(x);
                        hi = hi.max(x);
                    }
                    if rows.is_empty() {
                        lo = 0;
                        hi = 0;
                    }
                    let span = (i128::from(hi) - i128::from(lo)) as u128;
                    let width = (128 - span.leading_zeros()).max(1);
                    ColumnSchema { name: name.clone(), kind: *kind, bit_width: width, offset: lo }
                }
            };
            columns.push(col);
        }
        Self::new(columns)
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    /// Bit positions occupied by column `c`, MSB first.
    pub fn column_range(&self, c: usize) -> Range<u32> {
        let s = self.starts[c];
        s..s + self.columns[c].bit_width
    }

    pub fn column_of(&self, position: u32) -> usize {
        self.starts.partition_point(|&s| s <= position) - 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn check_record(&self, row: &[Value]) -> Result<(), CodecError> {
        if row.len() != self.columns.len() {
            return Err(CodecError::SchemaMismatch(format!(
                "record has {} fields, schema has {}",
                row.len(),
                self.columns.len()
            )));
        }
        Ok(())
    }
}
