//! IDX arrays (optionally gzip-compressed) as used by MNIST-style datasets.

use std::io::Read;

use flate2::read::GzDecoder;

use super::{ImageTensor, ImgError};

/// Largest decompressed IDX payload accepted.
const MAX_DECODED: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

fn gunzip_if_needed(bytes: &[u8]) -> Result<std::borrow::Cow<'_, [u8]>, ImgError> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .take(MAX_DECODED + 1)
            .read_to_end(&mut out)
            .map_err(|e| ImgError::Format(format!("gzip: {e}")))?;
        if out.len() as u64 > MAX_DECODED {
            return Err(ImgError::Format("decompressed IDX too large".into()));
        }
        Ok(out.into())
    } else {
        Ok(bytes.into())
    }
}

/// Parses an unsigned-byte IDX array.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray, ImgError> {
    let bytes = gunzip_if_needed(bytes)?;
    let bad = |m: &str| ImgError::Format(format!("IDX: {m}"));
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(bad("bad magic"));
    }
    if bytes[2] != 0x08 {
        return Err(bad("only unsigned byte data is supported"));
    }
    let ndim = bytes[3] as usize;
    let body = 4 + 4 * ndim;
    if ndim == 0 || bytes.len() < body {
        return Err(bad("truncated dimensions"));
    }
    let dims: Vec<usize> =
        bytes[4..body].chunks_exact(4).map(|c| u32::from_be_bytes(c.try_into().unwrap()) as usize).collect();
    let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| bad("size overflow"))?;
    if bytes.len() - body != total {
        return Err(bad(&format!("expected {total} data bytes, found {}", bytes.len() - body)));
    }
    Ok(IdxArray { dims, data: bytes[body..].to_vec() })
}

/// `N × H × W` grayscale images.
pub fn read_idx_images(bytes: &[u8]) -> Result<Vec<ImageTensor>, ImgError> {
    let a = parse_idx(bytes)?;
    let [n, h, w] = a.dims[..] else {
        return Err(ImgError::Format(format!("IDX images need 3 dimensions, found {}", a.dims.len())));
    };
    if n > 0 && h * w == 0 {
        return Err(ImgError::Format("empty image shape".into()));
    }
    a.data.chunks_exact(h * w).take(n).map(|px| ImageTensor::from_interleaved(h, w, 1, px)).collect()
}

pub fn read_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, ImgError> {
    let a = parse_idx(bytes)?;
    if a.dims.len() != 1 {
        return Err(ImgError::Format(format!("IDX labels need 1 dimension, found {}", a.dims.len())));
    }
    Ok(a.data)
}

pub fn write_idx(dims: &[usize], data: &[u8]) -> Vec<u8> {
    let mut out = vec![0, 0, 0x08, dims.len() as u8];
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(data);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::{write::GzEncoder, Compression};
    use std::io::Write;

    #[test]
    fn plain_and_gzip() {
        let raw = write_idx(&[2, 2, 3], &(0..12).collect::<Vec<u8>>());
        let imgs = read_idx_images(&raw).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[1].data, (6..12).collect::<Vec<i32>>());
        let mut gz = GzEncoder::new(Vec::new(), Compression::default());
        gz.write_all(&raw).unwrap();
        assert_eq!(read_idx_images(&gz.finish().unwrap()).unwrap(), imgs);
        assert_eq!(read_idx_labels(&write_idx(&[3], &[7, 8, 9])).unwrap(), vec![7, 8, 9]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_idx(&[0, 0, 8]).is_err());
        assert!(parse_idx(&[0, 0, 0x0d, 1, 0, 0, 0, 1, 0]).is_err());
        assert!(parse_idx(&write_idx(&[4], &[1, 2, 3])).is_err());
        assert!(read_idx_images(&write_idx(&[3], &[1, 2, 3])).is_err());
        assert!(parse_idx(&[0, 0, 8, 3, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff]).is_err());
    }
}
