use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use serde_json::json;

use egd_core::imgpipe::{
    compress_classwise, load_idx_dataset, load_pnm_dir, write_pnm, ArchiveReader, ClasswiseConfig, ImageTensor,
    SampleSpec, TransformChain,
};

use crate::error::CliError;
use crate::{emit, ImagesCompressArgs, SampleArgs};

const LABELS_FILE: &str = "labels.txt";

fn image_file_name(position: usize, label: u32, index: u64, channels: usize) -> String {
    let ext = if channels == 3 { "ppm" } else { "pgm" };
    format!("{position:06}_c{label}_i{index}.{ext}")
}

pub fn sample(a: &SampleArgs, json: bool) -> Result<(), CliError> {
    let reader = ArchiveReader::open(&a.archive)?;
    let spec = SampleSpec { fraction: a.fraction, seed: a.seed, epoch: a.epoch };
    let total = reader.total_bytes()?;
    let epoch = reader.sample_epoch(&spec)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let mut index_text = String::from("file label index\n");
    let indices: Vec<u64> = epoch.indices.values().flatten().copied().collect();
    for (k, ((img, label), index)) in epoch.images.iter().zip(&epoch.labels).zip(indices).enumerate() {
        let name = image_file_name(k, *label, index, img.channels);
        let path = a.out.join(&name);
        fs::write(&path, write_pnm(img)?).map_err(|e| CliError::io(&path, e))?;
        let _ = writeln!(index_text, "{name} {label} {index}");
    }
    let labels_path = a.out.join(LABELS_FILE);
    fs::write(&labels_path, index_text).map_err(|e| CliError::io(&labels_path, e))?;
    let ratio = epoch.bytes_read as f64 / total as f64;
    let value = json!({
        "images": epoch.images.len(), "bytes_read": epoch.bytes_read, "archive_bytes": total,
        "read_ratio": ratio, "out": a.out.display().to_string(),
    });
    let text = format!(
        "images={} bytes_read={} archive_bytes={total} read_ratio={ratio:.4} out={}",
        epoch.images.len(),
        epoch.bytes_read,
        a.out.display()
    );
    emit(json, &value, &text);
    Ok(())
}

fn load_images(a: &ImagesCompressArgs) -> Result<BTreeMap<u32, Vec<ImageTensor>>, CliError> {
    match (&a.idx_images, &a.idx_labels, &a.pnm_dir) {
        (Some(images), Some(labels), None) => Ok(load_idx_dataset(images, labels, a.per_class)?),
        (None, None, Some(dir)) => {
            let mut by_class = load_pnm_dir(dir)?;
            if let Some(k) = a.per_class {
                by_class.values_mut().for_each(|v| v.truncate(k));
            }
            Ok(by_class)
        }
        _ => Err(CliError::schema("give either --idx-images with --idx-labels, or --pnm-dir")),
    }
}

pub fn compress(a: &ImagesCompressArgs, json: bool) -> Result<(), CliError> {
    let images = load_images(a)?;
    let channels = images
        .values()
        .flatten()
        .next()
        .map(|t| t.channels)
        .ok_or_else(|| CliError::schema("no images found"))?;
    let chain = if a.dct { TransformChain::dct_for(channels, a.frac_bits) } else { TransformChain::spatial() };
    let mut cfg = ClasswiseConfig::new(a.beta, a.tau, chain);
    cfg.jobs = a.jobs.max(1);
    cfg.seed = a.seed;
    let archive = compress_classwise(&images, &cfg)?;
    let written = archive.write_dir(&a.out)?;
    let mut text = String::new();
    let mut classes = Vec::new();
    for c in &archive.manifest.classes {
        let _ = writeln!(
            text,
            "class={} count={} bytes={} n_b={} l_b={} l_d={} best_size_bits={}",
            c.label, c.count, c.bytes, c.n_b, c.l_b, c.l_d, c.best_size
        );
        classes.push(json!({
            "label": c.label, "count": c.count, "bytes": c.bytes, "n_b": c.n_b, "l_b": c.l_b, "l_d": c.l_d,
            "best_size_bits": c.best_size,
        }));
    }
    let raw = archive.raw_bytes();
    let ratio = written as f64 / raw as f64;
    let _ = writeln!(
        text,
        "images={} chain={} raw_bytes={raw} archive_bytes={written} ratio={ratio:.4} best_size_bits={} out={}",
        archive.manifest.image_count(),
        archive.manifest.transform_chain,
        archive.best_size_bits(),
        a.out.display()
    );
    let value = json!({
        "images": archive.manifest.image_count(), "chain": archive.manifest.transform_chain,
        "raw_bytes": raw, "archive_bytes": written, "ratio": ratio, "best_size_bits": archive.best_size_bits(),
        "classes": classes, "out": a.out.display().to_string(),
    });
    emit(json, &value, &text);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_file_names_sort_in_draw_order() {
        let a = image_file_name(9, 3, 120, 1);
        let b = image_file_name(10, 0, 5, 3);
        assert!(a < b);
        assert!(a.ends_with(".pgm") && b.ends_with(".ppm"));
    }
}
