//! Image datasets: color and frequency transforms, class-wise compression
//! and per-epoch sampling straight from the compressed archive.

mod archive;
mod chain;
mod color;
mod dct;
mod idx;
mod pnm;
mod tensor;

pub use archive::{
    class_file_name, class_rng, compress_classwise, image_record, sample_indices, ArchiveReader, ClassEntry,
    ClasswiseArchive, ClasswiseConfig, EpochSample, Manifest, SampleSpec, MANIFEST_FILE,
};
pub use chain::{Transform, TransformChain};
pub use color::{rgb_to_ycbcr, ycbcr_to_rgb};
pub use dct::{dct_forward, dct_inverse, Dct2d};
pub use idx::{parse_idx, read_idx_images, read_idx_labels, write_idx, IdxArray};
pub use pnm::{read_pnm, write_pnm};
pub use tensor::{Domain, ImageTensor};

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::bitcodec::CodecError;
use crate::gede::GedeError;

#[derive(Debug, Error)]
pub enum ImgError {
    #[error("expected {expected} input, found {found}")]
    WrongDomain { expected: &'static str, found: Domain },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed image data: {0}")]
    Format(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("no class {0} in archive")]
    UnknownClass(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Gede(#[from] GedeError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Groups IDX images by label, keeping at most `per_class` of each.
pub fn load_idx_dataset(
    images: &Path,
    labels: &Path,
    per_class: Option<usize>,
) -> Result<BTreeMap<u32, Vec<ImageTensor>>, ImgError> {
    let imgs = read_idx_images(&std::fs::read(images)?)?;
    let labs = read_idx_labels(&std::fs::read(labels)?)?;
    if imgs.len() != labs.len() {
        return Err(ImgError::ShapeMismatch(format!("{} images, {} labels", imgs.len(), labs.len())));
    }
    let mut out: BTreeMap<u32, Vec<ImageTensor>> = BTreeMap::new();
    for (img, l) in imgs.into_iter().zip(labs) {
        let class = out.entry(u32::from(l)).or_default();
        if per_class.is_none_or(|k| class.len() < k) {
            class.push(img);
        }
    }
    Ok(out)
}

/// Reads `<dir>/<label>/*.{ppm,pgm}` with numeric label directories; files
/// are taken in name order.
pub fn load_pnm_dir(dir: &Path) -> Result<BTreeMap<u32, Vec<ImageTensor>>, ImgError> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name();
        let label: u32 = name
            .to_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImgError::InvalidConfig(format!("class directory {name:?} is not a number")))?;
        let mut files: Vec<_> = std::fs::read_dir(entry.path())?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "ppm" || e == "pgm"));
        files.sort();
        let imgs = files.iter().map(|p| read_pnm(&std::fs::read(p)?)).collect::<Result<Vec<_>, _>>()?;
        if !imgs.is_empty() {
            out.insert(label, imgs);
        }
    }
    Ok(out)
}
