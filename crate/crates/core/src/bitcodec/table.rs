//! CSV ingestion and the schema sidecar file.
//!
//! The CSV header carries one `name:kind` cell per column; every later
//! line is a record. A sidecar schema (TOML, one `[[column]]` table per
//! column with the `ColumnSchema` fields) replaces inference when given.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::schema::{ColumnKind, ColumnSchema, Record, Schema, Value};
use super::CodecError;

/// Parsed CSV contents before a bit layout is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, ColumnKind)>,
    pub rows: Vec<Record>,
}

impl Table {
    pub fn infer_schema(&self) -> Result<Schema, CodecError> {
        Schema::infer(&self.columns, &self.rows)
    }

    /// Checks that `schema` names the same columns with the same kinds.
    pub fn conform(&self, schema: &Schema) -> Result<(), CodecError> {
        if schema.len() != self.columns.len() {
            return Err(CodecError::SchemaMismatch(format!(
                "sidecar has {} columns, csv has {}",
                schema.len(),
                self.columns.len()
            )));
        }
        for (col, (name, kind)) in schema.columns().iter().zip(&self.columns) {
            if &col.name != name || col.kind != *kind {
                return Err(CodecError::SchemaMismatch(format!(
                    "sidecar column `{}:{}` does not match csv column `{name}:{kind}`",
                    col.name, col.kind
                )));
            }
        }
        Ok(())
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<Table, CodecError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut columns = Vec::with_capacity(header.len());
    for cell in header.iter() {
        let (name, kind) = cell
            .rsplit_once(':')
            .ok_or_else(|| CodecError::Schema(format!("header cell `{cell}` is not `name:kind`")))?;
        if name.is_empty() {
            return Err(CodecError::Schema("empty column name".into()));
        }
        columns.push((name.to_string(), kind.parse::<ColumnKind>()?));
    }
    if columns.is_empty() {
        return Err(CodecError::Schema("csv has no columns".into()));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != columns.len() {
            return Err(CodecError::SchemaMismatch(format!(
                "line {}: {} fields, expected {}",
                line + 2,
                rec.len(),
                columns.len()
            )));
        }
        let row = rec
            .iter()
            .zip(&columns)
            .map(|(cell, (_, kind))| Value::parse(*kind, cell))
            .collect::<Result<Record, _>>()
            .map_err(|e| match e {
                CodecError::MissingValue => CodecError::SchemaMismatch(format!("line {}: missing value", line + 2)),
                other => other,
            })?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn write_csv<W: Write>(writer: W, schema: &Schema, rows: &[Record]) -> Result<(), CodecError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(schema.columns().iter().map(|c| format!("{}:{}", c.name, c.kind)))
        .map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    column: Vec<ColumnSchema>,
}

pub fn parse_schema_sidecar(text: &str) -> Result<Schema, CodecError> {
    let sc: Sidecar = toml::from_str(text).map_err(|e| CodecError::Schema(e.to_string()))?;
    Schema::new(sc.column)
}

pub fn format_schema_sidecar(schema: &Schema) -> String {
    let sc = Sidecar { column: schema.columns().to_vec() };
    toml::to_string(&sc).expect("schema serializes")
}

fn csv_err(e: csv::Error) -> CodecError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CodecError::Io(io),
            _ => unreachable!(),
        }
    } else {
        CodecError::Schema(e.to_string())
    }
}
