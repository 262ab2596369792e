//! Reference tables used by the acceptance suite, benchmarks and examples.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::bitcodec::{ColumnKind, Record, Schema, Table, Value};
use crate::imgpipe::{read_pnm, Domain, ImageTensor, ImgError};

pub const HOUSING_COLUMNS: [&str; 9] =
    ["MedInc", "HouseAge", "AveRooms", "AveBedrms", "Population", "AveOccup", "Latitude", "Longitude", "MedHouseVal"];

/// Rows of `f64` values into a table of `float32` columns.
pub fn float32_table(names: &[&str], rows: &[Vec<f64>]) -> Table {
    Table {
        columns: names.iter().map(|n| (n.to_string(), ColumnKind::Float32)).collect(),
        rows: rows.iter().map(|r| r.iter().map(|&v| Value::F32(v as f32)).collect()).collect(),
    }
}

/// Reads a headered numeric CSV such as the California Housing export
/// (eight features then `MedHouseVal`).
pub fn load_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), crate::bitcodec::CodecError> {
    use crate::bitcodec::CodecError;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CodecError::Schema(e.to_string()))?;
    let names: Vec<String> = rdr.headers().map_err(|e| CodecError::Schema(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CodecError::SchemaMismatch(e.to_string()))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| CodecError::SchemaMismatch(format!("line {}: `{c}`", i + 2))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

/// Synthetic block-group table with the California Housing layout.
///
/// Counts (households, people, rooms, bedrooms) are drawn as integers and the
/// per-household columns are their ratios; income has four decimals,
/// coordinates two, and the target is whole dollars in `[14999, 500001]`
/// divided by 100000.
pub fn housing_surrogate(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln = |m: f64, s: f64| LogNormal::new(m.ln(), s).expect("valid lognormal");
    let (households, occupancy, rooms, bedroom_share, income) =
        (ln(430.0, 0.55), ln(2.8, 0.25), ln(5.2, 0.25), ln(0.21, 0.1), ln(3.5, 0.45));
    let noise = Normal::<f64>::new(0.0, 0.35).expect("valid normal");
    let age = Normal::<f64>::new(29.0, 12.5).expect("valid normal");
    let round_to = |v: f64, d: i32| (v * 10f64.powi(d)).round() / 10f64.powi(d);
    (0..n)
        .map(|_| {
            let south = rng.gen_bool(0.6);
            let (lat, lon) = if south {
                (34.0 + 0.6 * rng.sample::<f64, _>(rand_distr::StandardNormal), -118.2 + 0.7 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            } else {
                (37.8 + 0.8 * rng.sample::<f64, _>(rand_distr::StandardNormal), -122.0 + 0.6 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            };
            let lat = round_to(lat.clamp(32.54, 41.95), 2);
            let lon = round_to(lon.clamp(-124.35, -114.31), 2);
            let hh = households.sample(&mut rng).round().max(1.0);
            let pop = (hh * occupancy.sample(&mut rng)).round().max(1.0);
            let total_rooms = (hh * rooms.sample(&mut rng)).round().max(1.0);
            let beds = (total_rooms * bedroom_share.sample(&mut rng)).round().max(1.0);
            let med_inc = round_to(income.sample(&mut rng).clamp(0.4999, 15.0001), 4);
            let house_age = age.sample(&mut rng).round().clamp(1.0, 52.0);
            let coast_lon = -117.1 - (lat - 32.5) * (7.1 / 9.5);
            let inland = (lon - coast_lon).max(0.0);
            let log_value = 10.4 + 0.75 * med_inc.ln() + 0.9 * (-inland).exp()
                - 0.004 * (house_age - 29.0)
                - 0.05 * (total_rooms / hh - 5.2)
                - 0.08 * (pop / hh - 2.8).clamp(-2.0, 6.0)
                + noise.sample(&mut rng);
            let dollars = log_value.exp().round().clamp(14999.0, 500001.0);
            vec![med_inc, house_age, total_rooms / hh, beds / hh, pop, pop / hh, lat, lon, dollars / 1e5]
        })
        .collect()
}

pub const CREDIT_FEATURES: usize = 23;

/// Synthetic credit-card default table: 23 integer features in the usual
/// layout (limit, sex, education, marriage, age, six repayment statuses,
/// six bill amounts, six payments) and a `0.0`/`1.0` label column.
pub fn credit_surrogate(n: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = rand_distr::StandardNormal;
    let mut columns: Vec<(String, ColumnKind)> =
        ["LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE"].iter().map(|s| (s.to_string(), ColumnKind::Int)).collect();
    columns.extend((0..6).map(|k| (format!("PAY_{k}"), ColumnKind::Int)));
    columns.extend((1..=6).map(|k| (format!("BILL_AMT{k}"), ColumnKind::Int)));
    columns.extend((1..=6).map(|k| (format!("PAY_AMT{k}"), ColumnKind::Int)));
    columns.push(("default".into(), ColumnKind::Float32));
    let rows = (0..n)
        .map(|_| {
            let risk: f64 = rng.sample(std_normal);
            let limit = ((rng.sample::<f64, _>(std_normal) * 0.7 + 11.8 - 0.3 * risk).exp() / 10_000.0).round().clamp(1.0, 80.0) * 10_000.0;
            let age = (35.0 + 9.0 * rng.sample::<f64, _>(std_normal)).round().clamp(21.0, 79.0);
            let mut row: Vec<i64> = vec![limit as i64, rng.gen_range(1..=2), rng.gen_range(1..=4), rng.gen_range(1..=3), age as i64];
            let mut status = (risk * 1.2 + rng.sample::<f64, _>(std_normal) * 0.8).round().clamp(-2.0, 8.0);
            for _ in 0..6 {
                row.push(status as i64);
                status = (status + rng.gen_range(-1.0..=1.0f64)).round().clamp(-2.0, 8.0);
            }
            let util = (0.45 + 0.2 * risk + 0.2 * rng.sample::<f64, _>(std_normal)).clamp(0.0, 1.1);
            for _ in 0..6 {
                row.push((limit * util * rng.gen_range(0.85..1.15)).round() as i64);
            }
            for _ in 0..6 {
                let frac = (0.12 - 0.05 * risk + 0.05 * rng.sample::<f64, _>(std_normal)).clamp(0.0, 1.0);
                row.push((limit * util * frac).round() as i64);
            }
            let z = -1.6 + 1.3 * risk + 0.25 * f64::from(row[5] as i32) - 0.000002 * limit;
            let y = f64::from(rng.gen::<f64>() < 1.0 / (1.0 + (-z).exp()));
            let mut rec: Record = row.into_iter().map(Value::Int).collect();
            rec.push(Value::F32(y as f32));
            rec
        })
        .collect();
    Table { columns, rows }
}

/// Table over an inferred schema.
pub fn table_schema(t: &Table) -> Schema {
    t.infer_schema().expect("generated tables have valid schemas")
}

/// `per_class` seeded `size × size` crops from each labelled source image.
pub fn random_patches(
    sources: &BTreeMap<u32, ImageTensor>,
    size: usize,
    per_class: usize,
    seed: u64,
) -> Result<BTreeMap<u32, Vec<ImageTensor>>, ImgError> {
    let mut out = BTreeMap::new();
    for (&label, src) in sources {
        if src.height < size || src.width < size {
            return Err(ImgError::ShapeMismatch(format!("class {label} source smaller than {size}×{size}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(label) << 32));
        let patches = (0..per_class)
            .map(|_| {
                let (y0, x0) = (rng.gen_range(0..=src.height - size), rng.gen_range(0..=src.width - size));
                let mut data = Vec::with_capacity(size * size * src.channels);
                for c in 0..src.channels {
                    let plane = src.plane(c);
                    for y in y0..y0 + size {
                        data.extend_from_slice(&plane[y * src.width + x0..y * src.width + x0 + size]);
                    }
                }
                ImageTensor { height: size, width: size, channels: src.channels, data, domain: src.domain }
            })
            .collect();
        out.insert(label, patches);
    }
    Ok(out)
}

/// `class_<label>.ppm` / `.pgm` files in `dir`, keyed by label.
pub fn load_labelled_sources(dir: &Path) -> Result<BTreeMap<u32, ImageTensor>, ImgError> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("class_"))
            .and_then(|s| s.parse::<u32>().ok());
        if let Some(label) = label {
            let img = read_pnm(&std::fs::read(&path)?)?;
            debug_assert!(matches!(img.domain, Domain::SpatialRgb | Domain::SpatialGray));
            out.insert(label, img);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn housing_layout() {
        let rows = housing_surrogate(500, 1);
        assert_eq!(rows.len(), 500);
        for r in &rows {
            assert_eq!(r.len(), 9);
            assert!((0.14999..=5.00001).contains(&r[8]));
            assert!(r[1].fract() == 0.0 && (1.0..=52.0).contains(&r[1]));
            assert!(r[3] <= r[2]);
        }
        assert_eq!(rows, housing_surrogate(500, 1));
    }

    #[test]
    fn credit_layout() {
        let t = credit_surrogate(2000, 2);
        assert_eq!(t.columns.len(), CREDIT_FEATURES + 1);
        let pos = t.rows.iter().filter(|r| r[CREDIT_FEATURES] == Value::F32(1.0)).count();
        assert!((200..1000).contains(&pos), "{pos}");
        table_schema(&t);
    }

    #[test]
    fn patches_are_crops() {
        let src = ImageTensor::new(4, 4, 1, (0..16).collect(), Domain::SpatialGray).unwrap();
        let p = random_patches(&BTreeMap::from([(0, src.clone())]), 2, 5, 9).unwrap();
        for t in &p[&0] {
            let d = t.data[2] - t.data[0];
            assert_eq!(d, 4);
            assert_eq!(t.data[1] - t.data[0], 1);
        }
    }
}
