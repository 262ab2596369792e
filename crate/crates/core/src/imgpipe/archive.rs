//! Class-wise compressed image archives.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitcodec::{encode_tabular, ColumnKind, Record, Schema, Value};
use crate::gede::{compress, CompressedDataset, CondensedMode, ContainerReader, SearchConfig};

use super::{Domain, ImageTensor, ImgError, TransformChain};

pub const MANIFEST_FILE: &str = "manifest";
const FORMAT: &str = "egd-archive";
const MAX_SAMPLES_PER_IMAGE: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub label: u32,
    pub count: u64,
    pub file: String,
    pub bytes: u64,
    pub n_b: u64,
    pub l_b: u32,
    pub l_d: u32,
    pub best_size: u64,
}

/// Archive description, stored as TOML in the `manifest` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub transform_chain: String,
    pub beta: u32,
    pub tau: u32,
    /// Default sampling seed, if one was given at build time.
    pub seed: Option<u64>,
    #[serde(rename = "class")]
    pub classes: Vec<ClassEntry>,
}

pub fn class_file_name(label: u32) -> String {
    format!("class_{label}.egd")
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, ImgError> {
        let m: Manifest = toml::from_str(text).map_err(|e| ImgError::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn chain(&self) -> Result<TransformChain, ImgError> {
        self.transform_chain.parse()
    }

    /// Stored values per image.
    pub fn values_per_image(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn image_count(&self) -> u64 {
        self.classes.iter().map(|c| c.count).sum()
    }

    pub fn validate(&self) -> Result<(), ImgError> {
        let bad = |m: String| Err(ImgError::Manifest(m));
        if self.format != FORMAT || self.version != 1 {
            return bad(format!("unsupported archive {} v{}", self.format, self.version));
        }
        if !matches!(self.channels, 1 | 3) {
            return bad(format!("{} channels", self.channels));
        }
        let samples = self.height.checked_mul(self.width).and_then(|p| p.checked_mul(self.channels));
        if !samples.is_some_and(|s| (1..=MAX_SAMPLES_PER_IMAGE).contains(&s)) {
            return bad(format!("image shape {}×{}×{}", self.height, self.width, self.channels));
        }
        let chain = self.chain()?;
        let probe = ImageTensor {
            height: 1,
            width: 1,
            channels: self.channels,
            data: vec![0; self.channels],
            domain: if self.channels == 1 { Domain::SpatialGray } else { Domain::SpatialRgb },
        };
        chain.apply(&probe)?;
        let mut seen = BTreeSet::new();
        for c in &self.classes {
            if !seen.insert(c.label) {
                return bad(format!("class {} listed twice", c.label));
            }
            if c.file != class_file_name(c.label) {
                return bad(format!("class {} stored in `{}`", c.label, c.file));
            }
            if c.count == 0 {
                return bad(format!("class {} is empty", c.label));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ClasswiseConfig {
    pub search: SearchConfig,
    pub chain: TransformChain,
    pub jobs: usize,
    pub seed: Option<u64>,
}

impl ClasswiseConfig {
    pub fn new(beta: usize, tau: usize, chain: TransformChain) -> Self {
        Self { search: SearchConfig { beta, tau, condensed_mode: CondensedMode::None, target: None }, chain, jobs: 1, seed: None }
    }
}

/// One container per class plus the manifest describing them.
#[derive(Debug, Clone)]
pub struct ClasswiseArchive {
    pub manifest: Manifest,
    pub containers: BTreeMap<u32, CompressedDataset>,
}

/// Stored samples of one image as a record of integer columns.
pub fn image_record(t: &ImageTensor) -> Record {
    t.data.iter().map(|&v| Value::Int(i64::from(v))).collect()
}

fn stored_domain(chain: &TransformChain, channels: usize) -> Domain {
    if chain.has_dct() {
        Domain::DctCoeff
    } else if !chain.0.is_empty() {
        Domain::YCbCr
    } else if channels == 1 {
        Domain::SpatialGray
    } else {
        Domain::SpatialRgb
    }
}

fn compress_class(images: &[ImageTensor], cfg: &ClasswiseConfig) -> Result<CompressedDataset, ImgError> {
    let records: Vec<Record> =
        images.iter().map(|img| cfg.chain.apply(img).map(|t| image_record(&t))).collect::<Result<_, _>>()?;
    let names: Vec<(String, ColumnKind)> = (0..records[0].len()).map(|k| (format!("s{k}"), ColumnKind::Int)).collect();
    let schema = Schema::infer(&names, &records)?;
    let bm = encode_tabular(&records, &schema)?;
    Ok(compress(&bm, &cfg.search)?)
}

/// Compresses every class independently with no condensed samples.
pub fn compress_classwise(
    classes: &BTreeMap<u32, Vec<ImageTensor>>,
    cfg: &ClasswiseConfig,
) -> Result<ClasswiseArchive, ImgError> {
    if cfg.search.condensed_mode != CondensedMode::None {
        return Err(ImgError::InvalidConfig("class-wise compression stores no condensed samples".into()));
    }
    let first = classes
        .values()
        .flat_map(|v| v.first())
        .next()
        .ok_or_else(|| ImgError::InvalidConfig("no images".into()))?;
    for (label, imgs) in classes {
        if imgs.is_empty() {
            return Err(ImgError::InvalidConfig(format!("class {label} has no images")));
        }
        if let Some(i) = imgs.iter().position(|i| !i.same_shape(first) || i.domain != first.domain) {
            return Err(ImgError::ShapeMismatch(format!("class {label} image {i} differs from the first image")));
        }
    }
    let labels: Vec<u32> = classes.keys().copied().collect();
    let jobs = cfg.jobs.clamp(1, labels.len().max(1));
    let mut results: BTreeMap<u32, Result<CompressedDataset, ImgError>> = BTreeMap::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let mine: Vec<u32> = labels.iter().copied().skip(j).step_by(jobs).collect();
                s.spawn(move || mine.into_iter().map(|l| (l, compress_class(&classes[&l], cfg))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            results.extend(h.join().expect("compression worker panicked"));
        }
    });
    let mut containers = BTreeMap::new();
    let mut entries = Vec::new();
    for (label, res) in results {
        let cd = res?;
        entries.push(ClassEntry {
            label,
            count: cd.n(),
            file: class_file_name(label),
            bytes: cd.encoded_len(),
            n_b: cd.n_b(),
            l_b: cd.l_b(),
            l_d: cd.l_d(),
            best_size: cd.best_size(),
        });
        containers.insert(label, cd);
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        version: 1,
        height: first.height,
        width: first.width,
        channels: first.channels,
        transform_chain: cfg.chain.to_string(),
        beta: cfg.search.beta as u32,
        tau: cfg.search.tau as u32,
        seed: cfg.seed,
        classes: entries,
    };
    Ok(ClasswiseArchive { manifest, containers })
}

impl ClasswiseArchive {
    /// Uncompressed size at one byte per sample.
    pub fn raw_bytes(&self) -> u64 {
        self.manifest.classes.iter().map(|c| c.count).sum::<u64>() * self.manifest.values_per_image() as u64
    }

    /// Sum of S* over all classes, in bits.
    pub fn best_size_bits(&self) -> u64 {
        self.containers.values().map(|c| c.best_size()).sum()
    }

    /// Bytes of the manifest plus every container file.
    pub fn total_bytes(&self) -> u64 {
        self.manifest.to_text().len() as u64 + self.containers.values().map(|c| c.encoded_len()).sum::<u64>()
    }

    pub fn write_dir(&self, dir: &Path) -> Result<u64, ImgError> {
        fs::create_dir_all(dir)?;
        for (label, cd) in &self.containers {
            fs::write(dir.join(class_file_name(*label)), cd.to_bytes())?;
        }
        fs::write(dir.join(MANIFEST_FILE), self.manifest.to_text())?;
        Ok(self.total_bytes())
    }

    /// Decodes every image of `label`, in stored order.
    pub fn decode_class(&self, label: u32) -> Result<Vec<ImageTensor>, ImgError> {
        let cd = self.containers.get(&label).ok_or(ImgError::UnknownClass(label))?;
        let chain = self.manifest.chain()?;
        let rows = crate::bitcodec::decode_tabular(&crate::gede::decompress(cd)?, None)?;
        rows.iter().map(|r| record_image(r, &self.manifest, &chain)).collect()
    }
}

fn record_image(r: &Record, m: &Manifest, chain: &TransformChain) -> Result<ImageTensor, ImgError> {
    if r.len() != m.values_per_image() {
        return Err(ImgError::ShapeMismatch(format!("record of {} samples, manifest says {}", r.len(), m.values_per_image())));
    }
    let data = r
        .iter()
        .map(|v| v.as_i64().and_then(|x| i32::try_from(x).ok()))
        .collect::<Option<Vec<i32>>>()
        .ok_or_else(|| ImgError::ShapeMismatch("non-integer or oversized sample".into()))?;
    let t = ImageTensor::new(m.height, m.width, m.channels, data, stored_domain(chain, m.channels))?;
    chain.invert(&t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub fraction: f64,
    pub seed: u64,
    pub epoch: u64,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<(), ImgError> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(ImgError::InvalidConfig(format!("fraction {} not in (0, 1]", self.fraction)));
        }
        Ok(())
    }
}

/// Stream for one (seed, epoch, class): the ChaCha key is the three values
/// little-endian, so every triple gets an independent stream.
pub fn class_rng(seed: u64, epoch: u64, label: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&epoch.to_le_bytes());
    key[16..20].copy_from_slice(&label.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// `⌈fraction·n⌉` distinct indices below `n`, increasing.
pub fn sample_indices(spec: &SampleSpec, label: u32, n: u64) -> Vec<u64> {
    let k = ((spec.fraction * n as f64).ceil() as u64).clamp(u64::from(n > 0), n);
    let mut rng = class_rng(spec.seed, spec.epoch, label);
    let mut idx: Vec<u64> =
        rand::seq::index::sample(&mut rng, n as usize, k as usize).into_iter().map(|i| i as u64).collect();
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSample {
    pub images: Vec<ImageTensor>,
    pub labels: Vec<u32>,
    /// Indices drawn per class.
    pub indices: BTreeMap<u32, Vec<u64>>,
    pub bytes_read: u64,
}

/// Reads an archive directory lazily, one class container at a time.
pub struct ArchiveReader {
    dir: PathBuf,
    manifest: Manifest,
    chain: TransformChain,
    manifest_bytes: u64,
}

impl ArchiveReader {
    pub fn open(dir: &Path) -> Result<Self, ImgError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let manifest = Manifest::parse(&text)?;
        let chain = manifest.chain()?;
        Ok(Self { dir: dir.to_path_buf(), manifest, chain, manifest_bytes: text.len() as u64 })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Manifest plus container file sizes on disk.
    pub fn total_bytes(&self) -> Result<u64, ImgError> {
        let mut total = self.manifest_bytes;
        for c in &self.manifest.classes {
            total += fs::metadata(self.dir.join(&c.file))?.len();
        }
        Ok(total)
    }

    pub fn open_class(&self, label: u32) -> Result<ContainerReader<File>, ImgError> {
        let entry = self.manifest.classes.iter().find(|c| c.label == label).ok_or(ImgError::UnknownClass(label))?;
        let rd = ContainerReader::open(File::open(self.dir.join(&entry.file))?)?;
        if rd.len() != entry.count || rd.header().schema.len() != self.manifest.values_per_image() {
            return Err(ImgError::Manifest(format!("container for class {label} disagrees with the manifest")));
        }
        Ok(rd)
    }

    pub fn decode(&self, rd: &mut ContainerReader<File>, index: u64) -> Result<ImageTensor, ImgError> {
        record_image(&rd.record(index)?, &self.manifest, &self.chain)
    }

    /// Draws and decodes a fresh subset of every class.
    pub fn sample_epoch(&self, spec: &SampleSpec) -> Result<EpochSample, ImgError> {
        spec.validate()?;
        let mut out = EpochSample { images: Vec::new(), labels: Vec::new(), indices: BTreeMap::new(), bytes_read: self.manifest_bytes };
        for c in &self.manifest.classes {
            let mut rd = self.open_class(c.label)?;
            let idx = sample_indices(spec, c.label, c.count);
            for &i in &idx {
                out.images.push(self.decode(&mut rd, i)?);
                out.labels.push(c.label);
            }
            out.bytes_read += rd.bytes_read();
            out.indices.insert(c.label, idx);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(v: i32) -> ImageTensor {
        ImageTensor::new(2, 2, 1, vec![v, v, 0, 255], Domain::SpatialGray).unwrap()
    }

    #[test]
    fn identical_images_share_one_base() {
        let classes = BTreeMap::from([(3, vec![gray(9); 20])]);
        let a = compress_classwise(&classes, &ClasswiseConfig::new(0, 4, TransformChain::spatial())).unwrap();
        assert_eq!(a.containers[&3].n_b(), 1);
        assert_eq!(a.decode_class(3).unwrap(), vec![gray(9); 20]);
        assert!(a.manifest.to_text().contains("class_3.egd"));
    }

    #[test]
    fn rejects_mixed_shapes_and_condensing() {
        let odd = ImageTensor::new(1, 4, 1, vec![0; 4], Domain::SpatialGray).unwrap();
        let classes = BTreeMap::from([(0, vec![gray(1)]), (1, vec![odd])]);
        let cfg = ClasswiseConfig::new(0, 4, TransformChain::spatial());
        assert!(matches!(compress_classwise(&classes, &cfg), Err(ImgError::ShapeMismatch(_))));
        let mut stored = cfg;
        stored.search.condensed_mode = CondensedMode::Stored;
        assert!(compress_classwise(&BTreeMap::from([(0, vec![gray(1)])]), &stored).is_err());
    }

    #[test]
    fn manifest_round_trip_and_validation() {
        let classes = BTreeMap::from([(0, vec![gray(1), gray(2)]), (7, vec![gray(5)])]);
        let a = compress_classwise(&classes, &ClasswiseConfig::new(2, 4, TransformChain::dct_for(1, 1))).unwrap();
        let text = a.manifest.to_text();
        assert_eq!(Manifest::parse(&text).unwrap(), a.manifest);
        assert!(Manifest::parse(&text.replace("class_7.egd", "../x.egd")).is_err());
        assert!(Manifest::parse(&text.replace("channels = 1", "channels = 2")).is_err());
        assert!(Manifest::parse("format = 1").is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let spec = SampleSpec { fraction: 0.1, seed: 42, epoch: 3 };
        let a = sample_indices(&spec, 1, 1000);
        assert_eq!(a.len(), 100);
        assert_eq!(a, sample_indices(&spec, 1, 1000));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a, sample_indices(&SampleSpec { epoch: 4, ..spec }, 1, 1000));
        assert_ne!(a, sample_indices(&spec, 2, 1000));
        assert_eq!(sample_indices(&SampleSpec { fraction: 1.0, ..spec }, 0, 7), (0..7).collect::<Vec<_>>());
        assert_eq!(sample_indices(&SampleSpec { fraction: 1e-9, ..spec }, 0, 7).len(), 1);
    }

    #[test]
    fn ten_epochs_cover_most_indices() {
        // expected coverage 1 − 0.9^10 ≈ 0.651
        let mut seen = BTreeSet::new();
        for epoch in 0..10 {
            seen.extend(sample_indices(&SampleSpec { fraction: 0.1, seed: 5, epoch }, 0, 1000));
        }
        assert!(seen.len() > 600, "{}", seen.len());
    }
}
