//! Binary view of typed tabular data and per-bit entropy statistics.

mod entropy;
mod matrix;
mod schema;
mod table;

pub use entropy::{binary_entropy, bit_entropy, EntropyProfile};
pub use matrix::{decode_tabular, encode_tabular, record_to_f64, BitMatrix};
pub use schema::{ColumnKind, ColumnSchema, Record, Schema, Value};
pub use table::{format_schema_sidecar, parse_schema_sidecar, read_csv, write_csv, Table};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("record does not match schema: {0}")]
    SchemaMismatch(String),
    #[error("value {value} in column `{column}` does not fit {bit_width} bits above offset {offset}")]
    RangeOverflow { column: String, value: i64, offset: i64, bit_width: u32 },
    #[error("index {index} out of range for {len} records")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("missing value")]
    MissingValue,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
