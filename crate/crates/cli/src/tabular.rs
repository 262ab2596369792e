use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use egd_core::bitcodec::{
    bit_entropy, decode_tabular, encode_tabular, parse_schema_sidecar, read_csv, write_csv, Record, Schema,
};
use egd_core::gede::{compress as gede_compress, decompress as gede_decompress, get_condensed, CompressedDataset, SearchConfig, MAGIC};
use egd_core::mltrain::{evaluate, train as fit, ModelKind, Samples, Standardizer, TrainConfig};

use crate::error::{CliError, Exit};
use crate::{emit, CompressArgs, DecompressArgs, EntropyArgs, Mode, Model, StatsArgs, TrainArgs};

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn is_container(path: &Path) -> Result<bool, CliError> {
    let mut head = [0u8; 4];
    let mut f = open(path)?;
    let mut got = 0;
    while got < head.len() {
        match f.read(&mut head[got..]).map_err(|e| CliError::io(path, e))? {
            0 => break,
            k => got += k,
        }
    }
    Ok(got == head.len() && head == MAGIC)
}

fn load_container(path: &Path) -> Result<CompressedDataset, CliError> {
    Ok(CompressedDataset::read_from(BufReader::new(open(path)?))?)
}

/// Rows of a CSV, conformed to the sidecar schema when one is given.
fn load_csv(path: &Path, sidecar: Option<&Path>) -> Result<(Schema, Vec<Record>), CliError> {
    let table = read_csv(BufReader::new(open(path)?))?;
    let schema = match sidecar {
        Some(p) => {
            let mut text = String::new();
            open(p)?.read_to_string(&mut text).map_err(|e| CliError::io(p, e))?;
            let s = parse_schema_sidecar(&text)?;
            table.conform(&s)?;
            s
        }
        None => table.infer_schema()?,
    };
    Ok((schema, table.rows))
}

/// Schema and all original records of a CSV or container.
fn load_records(path: &Path, sidecar: Option<&Path>) -> Result<(Schema, Vec<Record>, Option<usize>), CliError> {
    if is_container(path)? {
        let cd = load_container(path)?;
        let rows = decode_tabular(&gede_decompress(&cd)?, None)?;
        Ok((cd.schema().clone(), rows, cd.target()))
    } else {
        let (schema, rows) = load_csv(path, sidecar)?;
        Ok((schema, rows, None))
    }
}

fn column_index(schema: &Schema, name: &str) -> Result<usize, CliError> {
    schema.index_of(name).ok_or_else(|| CliError::schema(format!("no column named `{name}`")))
}

fn stats_report(cd: &CompressedDataset, file_bytes: u64) -> (serde_json::Value, String) {
    let raw_bytes = cd.raw_bits().div_ceil(8);
    let target = cd.target().map(|t| cd.schema().columns()[t].name.clone());
    let value = json!({
        "n": cd.n(), "m": cd.m(), "n_b": cd.n_b(), "l_t": cd.l_t(), "l_b": cd.l_b(), "l_d": cd.l_d(),
        "mode": cd.mode().as_str(), "beta": cd.header().beta, "tau": cd.header().tau, "target": target,
        "best_size_bits": cd.best_size(), "raw_bytes": raw_bytes, "file_bytes": file_bytes,
        "size_ratio": cd.best_size() as f64 / cd.raw_bits() as f64,
        "file_ratio": file_bytes as f64 / raw_bytes as f64,
    });
    let text = format!(
        "n={} m={} n_b={} l_t={} l_b={} l_d={} mode={} beta={} tau={} target={} best_size_bits={} raw_bytes={} \
         file_bytes={} size_ratio={:.4} file_ratio={:.4}",
        cd.n(),
        cd.m(),
        cd.n_b(),
        cd.l_t(),
        cd.l_b(),
        cd.l_d(),
        cd.mode(),
        cd.header().beta,
        cd.header().tau,
        target.as_deref().unwrap_or("-"),
        cd.best_size(),
        raw_bytes,
        file_bytes,
        value["size_ratio"].as_f64().unwrap_or(0.0),
        value["file_ratio"].as_f64().unwrap_or(0.0),
    );
    (value, text)
}

pub fn compress(a: &CompressArgs, json: bool) -> Result<(), CliError> {
    let (schema, rows) = load_csv(&a.input, a.schema.as_deref())?;
    let target = a.target.as_deref().map(|t| column_index(&schema, t)).transpose()?;
    let bm = encode_tabular(&rows, &schema)?;
    let cfg = SearchConfig { beta: a.beta, tau: a.tau, condensed_mode: a.condensed.into(), target };
    let cd = gede_compress(&bm, &cfg)?;
    let out = a.out.clone().unwrap_or_else(|| a.input.with_extension("egd"));
    let mut w = BufWriter::new(File::create(&out).map_err(|e| CliError::io(&out, e))?);
    cd.write_to(&mut w).and_then(|()| w.flush()).map_err(|e| CliError::io(&out, e))?;
    let (mut value, text) = stats_report(&cd, cd.encoded_len());
    value["out"] = json!(out.display().to_string());
    emit(json, &value, &format!("{text} out={}", out.display()));
    Ok(())
}

pub fn decompress(a: &DecompressArgs, json: bool) -> Result<(), CliError> {
    let cd = load_container(&a.input)?;
    let rows = decode_tabular(&gede_decompress(&cd)?, None)?;
    match &a.out {
        Some(out) => {
            let mut w = BufWriter::new(File::create(out).map_err(|e| CliError::io(out, e))?);
            write_csv(&mut w, cd.schema(), &rows)?;
            w.flush().map_err(|e| CliError::io(out, e))?;
            let value = json!({ "rows": rows.len(), "out": out.display().to_string() });
            emit(json, &value, &format!("rows={} out={}", rows.len(), out.display()));
        }
        None => write_csv(std::io::stdout().lock(), cd.schema(), &rows)?,
    }
    Ok(())
}

pub fn stats(a: &StatsArgs, json: bool) -> Result<(), CliError> {
    let file_bytes = std::fs::metadata(&a.input).map_err(|e| CliError::io(&a.input, e))?.len();
    let cd = load_container(&a.input)?;
    let (value, text) = stats_report(&cd, file_bytes);
    emit(json, &value, &text);
    Ok(())
}

pub fn entropy(a: &EntropyArgs, json: bool) -> Result<(), CliError> {
    let (schema, rows, _) = load_records(&a.input, a.schema.as_deref())?;
    let profile = bit_entropy(&encode_tabular(&rows, &schema)?)?;
    let mut columns = Vec::new();
    let mut text = String::new();
    for (c, col) in schema.columns().iter().enumerate() {
        let range = schema.column_range(c);
        let h: Vec<f64> = range.clone().map(|p| profile.entropy(p as usize)).collect();
        let non_constant = range.clone().filter(|&p| !profile.is_constant(p as usize)).count();
        let sum: f64 = h.iter().sum();
        text += &format!(
            "column={} kind={} bits={} non_constant={non_constant} entropy_sum={sum:.4}\n",
            col.name,
            col.kind.as_str(),
            col.bit_width
        );
        if a.bits {
            for (k, p) in range.enumerate() {
                text += &format!("  position={p} bit={k} entropy={:.6}\n", h[k]);
            }
        }
        let mut entry = json!({
            "name": col.name, "kind": col.kind.as_str(), "bits": col.bit_width,
            "non_constant": non_constant, "entropy_sum": sum,
        });
        if a.bits {
            entry["entropies"] = json!(h);
        }
        columns.push(entry);
    }
    let total: f64 = profile.entropies().iter().sum();
    let l_t = schema.total_bits();
    text += &format!("records={} l_t={l_t} entropy_sum={total:.4} mean_entropy={:.4}\n", rows.len(), total / f64::from(l_t));
    let value = json!({ "records": rows.len(), "l_t": l_t, "entropy_sum": total, "columns": columns });
    emit(json, &value, &text);
    Ok(())
}

/// Training samples plus the schema and target they came from.
struct TrainingData {
    samples: Samples,
    schema: Schema,
    target: usize,
    held_out: Option<Vec<Record>>,
}

fn resolve_target(schema: &Schema, flag: Option<&str>, stored: Option<usize>) -> Result<usize, CliError> {
    match (flag, stored) {
        (Some(name), _) => column_index(schema, name),
        (None, Some(t)) => Ok(t),
        (None, None) => Err(CliError::schema("no target column: pass --target")),
    }
}

fn split_fraction(test: Option<&str>) -> Option<f64> {
    let t = test.filter(|t| !Path::new(t).exists())?;
    t.parse::<f64>().ok().filter(|f| *f > 0.0 && *f < 1.0)
}

fn training_data(a: &TrainArgs) -> Result<TrainingData, CliError> {
    let split = split_fraction(a.test.as_deref());
    match a.mode {
        Mode::Condensed => {
            if !is_container(&a.input)? {
                return Err(CliError::new(Exit::Precondition, "condensed training needs an EGD1 container"));
            }
            if split.is_some() {
                return Err(CliError::schema("condensed training needs --test <path>; a split would leak test rows"));
            }
            let cd = load_container(&a.input)?;
            let target = resolve_target(cd.schema(), a.target.as_deref(), cd.target())?;
            let cs = get_condensed(&cd)?;
            Ok(TrainingData { samples: Samples::from_condensed(&cs, target)?, schema: cs.schema, target, held_out: None })
        }
        Mode::Full => {
            let (schema, mut rows, stored) = load_records(&a.input, a.schema.as_deref())?;
            let target = resolve_target(&schema, a.target.as_deref(), stored)?;
            let held_out = match split {
                Some(f) => {
                    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0)));
                    let k = ((rows.len() as f64) * f).round() as usize;
                    if k == 0 || k >= rows.len() {
                        return Err(CliError::schema(format!("split {f} leaves an empty side")));
                    }
                    Some(rows.split_off(rows.len() - k))
                }
                None => None,
            };
            Ok(TrainingData { samples: Samples::from_records(&rows, target, None)?, schema, target, held_out })
        }
    }
}

fn test_rows(a: &TrainArgs, data: &TrainingData) -> Result<Option<Vec<Record>>, CliError> {
    if data.held_out.is_some() {
        return Ok(data.held_out.clone());
    }
    let Some(path) = a.test.as_deref() else { return Ok(None) };
    let path = PathBuf::from(path);
    let (schema, rows, _) = load_records(&path, a.schema.as_deref())?;
    let names = |s: &Schema| s.columns().iter().map(|c| (c.name.clone(), c.kind)).collect::<Vec<_>>();
    if names(&schema) != names(&data.schema) {
        return Err(CliError::schema("test data columns differ from training columns"));
    }
    Ok(Some(rows))
}

pub fn train(a: &TrainArgs, json: bool) -> Result<(), CliError> {
    let kind = match a.model {
        Model::Linreg => ModelKind::Linear,
        Model::Logreg => ModelKind::Logistic,
    };
    let mut cfg = match kind {
        ModelKind::Linear => TrainConfig::linear(),
        ModelKind::Logistic => TrainConfig::logistic(),
    };
    cfg.learning_rate = a.lr.unwrap_or(cfg.learning_rate);
    cfg.tol = a.tol.unwrap_or(cfg.tol);
    cfg.max_iters = a.max_iters.unwrap_or(cfg.max_iters);
    cfg.intercept = !a.no_intercept;
    cfg.loss_every = a.loss_every;
    cfg.seed = a.seed;

    let data = training_data(a)?;
    let test = test_rows(a, &data)?;
    let standardizer = a.standardize.then(|| Standardizer::fit(&data.samples.x, data.samples.weights.as_deref()));
    let report = match &standardizer {
        Some(st) => fit(&data.samples.standardized(st), kind, &cfg)?,
        None => fit(&data.samples, kind, &cfg)?,
    };
    let mut report = report;
    report.standardizer = standardizer.clone();

    let mode = match a.mode {
        Mode::Full => "full",
        Mode::Condensed => "condensed",
    };
    let mut text = format!("mode={mode} target={}\n", data.schema.columns()[data.target].name);
    text += &report.kv_lines();
    let mut value = json!({ "mode": mode, "report": report.to_json() });
    if let Some(rows) = test {
        let t = Samples::from_records(&rows, data.target, None)?;
        let x = match &standardizer {
            Some(st) => st.apply(&t.x),
            None => t.x,
        };
        let metrics = evaluate(&report.params, &x, &t.y)?;
        text += &format!("test_rows={} test_mse={:.9e}", rows.len(), metrics.mse);
        if let Some(acc) = metrics.accuracy {
            text += &format!(" test_accuracy={acc:.6}");
        }
        text.push('\n');
        value["test"] = json!({ "rows": rows.len(), "mse": metrics.mse, "accuracy": metrics.accuracy });
    }
    if let Some(path) = &a.report {
        let f = File::create(path).map_err(|e| CliError::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &value)?;
    }
    emit(json, &value, &text);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_fraction_accepts_only_open_unit_interval() {
        assert_eq!(split_fraction(Some("0.2")), Some(0.2));
        assert_eq!(split_fraction(Some("1")), None);
        assert_eq!(split_fraction(Some("0")), None);
        assert_eq!(split_fraction(Some("test.csv")), None);
        assert_eq!(split_fraction(None), None);
    }
}
