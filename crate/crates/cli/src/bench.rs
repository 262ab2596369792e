use std::time::Instant;

use serde_json::json;

use egd_core::bitcodec::encode_tabular;
use egd_core::gede::{compress, find_beta_for_fraction, CondensedMode, SearchConfig};
use egd_core::mltrain::{bench, synth, Samples};

use crate::error::CliError;
use crate::{emit, BenchArgs, BenchTask};

pub fn run(a: &BenchArgs, json: bool) -> Result<(), CliError> {
    if a.n == 0 || a.d == 0 || a.reps == 0 {
        return Err(CliError::schema("--n, --d and --reps must be positive"));
    }
    if !(a.fraction > 0.0 && a.fraction <= 1.0) {
        return Err(CliError::schema(format!("--fraction {} not in (0, 1]", a.fraction)));
    }
    let (x, y, _) = synth::linear(a.n, a.d, 0.5, a.seed);
    match a.task {
        BenchTask::GdIter | BenchTask::ClosedForm => {
            let cs = bench::condense_to_fraction(&x, &y, a.fraction)?;
            let condensed = Samples::from_condensed(&cs, a.d)?;
            let full = Samples::full(x, y)?;
            let row = match a.task {
                BenchTask::GdIter => bench::bench_gd(&full, &condensed, a.reps)?,
                _ => bench::bench_closed_form(&full, &condensed, a.reps)?,
            };
            emit(json, &serde_json::to_value(&row)?, &row.kv_line());
        }
        BenchTask::Compress => {
            let (schema, rows) = bench::to_records(&x, &y);
            let bm = encode_tabular(&rows, &schema)?;
            let target = Some(a.d);
            let beta = find_beta_for_fraction(&bm, a.fraction, target)?;
            let cfg = SearchConfig { beta, tau: 16, condensed_mode: CondensedMode::Stored, target };
            let start = Instant::now();
            let cd = compress(&bm, &cfg)?;
            let seconds = start.elapsed().as_secs_f64();
            let ratio = cd.best_size() as f64 / cd.raw_bits() as f64;
            let value = json!({
                "task": "compress", "n": a.n, "m": cd.m(), "d": a.d, "beta": beta, "seconds": seconds,
                "best_size_bits": cd.best_size(), "size_ratio": ratio,
            });
            let text = format!(
                "task=compress n={} m={} d={} beta={beta} seconds={seconds:.6} best_size_bits={} size_ratio={ratio:.4}",
                a.n,
                cd.m(),
                a.d,
                cd.best_size()
            );
            emit(json, &value, &text);
        }
    }
    Ok(())
}
