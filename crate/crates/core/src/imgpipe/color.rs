//! Full-range BT.601 RGB ⇄ YCbCr.

use super::{Domain, ImageTensor, ImgError};

#[inline]
pub(crate) fn forward_px(r: f64, g: f64, b: f64) -> [f64; 3] {
    [
        0.299 * r + 0.587 * g + 0.114 * b,
        128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b,
        128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b,
    ]
}

#[inline]
pub(crate) fn inverse_px(y: f64, cb: f64, cr: f64) -> [f64; 3] {
    let (cb, cr) = (cb - 128.0, cr - 128.0);
    [y + 1.402 * cr, y - 0.344_136 * cb - 0.714_136 * cr, y + 1.772 * cb]
}

#[inline]
pub(crate) fn to_u8(v: f64) -> i32 {
    v.round().clamp(0.0, 255.0) as i32
}

fn map(img: &ImageTensor, from: Domain, to: Domain, f: fn(f64, f64, f64) -> [f64; 3]) -> Result<ImageTensor, ImgError> {
    if img.domain != from {
        return Err(ImgError::WrongDomain { expected: if from == Domain::SpatialRgb { "spatial_rgb" } else { "ycbcr" }, found: img.domain });
    }
    let p = img.plane_len();
    let mut data = vec![0; img.data.len()];
    for i in 0..p {
        let v = f(f64::from(img.data[i]), f64::from(img.data[p + i]), f64::from(img.data[2 * p + i]));
        for c in 0..3 {
            data[c * p + i] = to_u8(v[c]);
        }
    }
    Ok(ImageTensor { data, domain: to, ..img.clone() })
}

/// Rounded, clamped YCbCr.
pub fn rgb_to_ycbcr(img: &ImageTensor) -> Result<ImageTensor, ImgError> {
    map(img, Domain::SpatialRgb, Domain::YCbCr, forward_px)
}

pub fn ycbcr_to_rgb(img: &ImageTensor) -> Result<ImageTensor, ImgError> {
    map(img, Domain::YCbCr, Domain::SpatialRgb, inverse_px)
}
