//! Ordered transforms between pixels and stored integer samples.

use std::fmt;
use std::str::FromStr;

use super::color::{forward_px, inverse_px, to_u8};
use super::dct::{dequantize, quantize, Dct2d, MAX_FRAC_BITS};
use super::{rgb_to_ycbcr, ycbcr_to_rgb, Domain, ImageTensor, ImgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Full-range BT.601 color conversion.
    YCbCr,
    /// Orthonormal whole-channel DCT, coefficients kept to `frac_bits`
    /// fractional bits.
    Dct { frac_bits: u8 },
}

/// Transforms applied in order on the way in; inverted in reverse order on
/// the way out. When a color conversion feeds a DCT, the intermediate YCbCr
/// planes stay unrounded and only the coefficients are rounded.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformChain(pub Vec<Transform>);

impl TransformChain {
    pub fn spatial() -> Self {
        Self(Vec::new())
    }

    /// Color conversion for RGB input, then a DCT.
    pub fn dct_for(channels: usize, frac_bits: u8) -> Self {
        let mut v = Vec::new();
        if channels == 3 {
            v.push(Transform::YCbCr);
        }
        v.push(Transform::Dct { frac_bits });
        Self(v)
    }

    pub fn has_dct(&self) -> bool {
        self.0.iter().any(|t| matches!(t, Transform::Dct { .. }))
    }

    fn validate(&self, channels: usize) -> Result<(), ImgError> {
        let bad = |m: &str| Err(ImgError::InvalidConfig(format!("transform chain `{self}`: {m}")));
        match self.0.as_slice() {
            [] => Ok(()),
            [Transform::Dct { .. }] => Ok(()),
            [Transform::YCbCr] | [Transform::YCbCr, Transform::Dct { .. }] if channels == 3 => Ok(()),
            [Transform::YCbCr, ..] if channels != 3 => bad("color conversion needs three channels"),
            _ => bad("unsupported order"),
        }
    }

    /// Spatial image to stored samples.
    pub fn apply(&self, img: &ImageTensor) -> Result<ImageTensor, ImgError> {
        self.validate(img.channels)?;
        let spatial = match img.channels {
            1 => Domain::SpatialGray,
            _ => Domain::SpatialRgb,
        };
        if img.domain != spatial {
            return Err(ImgError::WrongDomain { expected: "spatial", found: img.domain });
        }
        match self.0.as_slice() {
            [] => Ok(img.clone()),
            [Transform::YCbCr] => rgb_to_ycbcr(img),
            [.., Transform::Dct { frac_bits }] => {
                let planes = float_planes(img, self.0.len() == 2);
                let dct = Dct2d::new(img.height, img.width);
                let data = planes.iter().flat_map(|p| quantize(&dct.forward(p), *frac_bits)).collect();
                ImageTensor::new(img.height, img.width, img.channels, data, Domain::DctCoeff)
            }
            _ => unreachable!("validated"),
        }
    }

    /// Stored samples back to a spatial image.
    pub fn invert(&self, t: &ImageTensor) -> Result<ImageTensor, ImgError> {
        self.validate(t.channels)?;
        let spatial = if t.channels == 1 { Domain::SpatialGray } else { Domain::SpatialRgb };
        match self.0.as_slice() {
            [] => ImageTensor::new(t.height, t.width, t.channels, t.data.clone(), spatial),
            [Transform::YCbCr] => ycbcr_to_rgb(&ImageTensor { domain: Domain::YCbCr, ..t.clone() }),
            [.., Transform::Dct { frac_bits }] => {
                let dct = Dct2d::new(t.height, t.width);
                let planes: Vec<Vec<f64>> =
                    (0..t.channels).map(|c| dct.inverse(&dequantize(t.plane(c), *frac_bits))).collect();
                let p = t.plane_len();
                let mut data = vec![0; t.data.len()];
                if self.0.len() == 2 {
                    for i in 0..p {
                        let rgb = inverse_px(planes[0][i], planes[1][i], planes[2][i]);
                        for c in 0..3 {
                            data[c * p + i] = to_u8(rgb[c]);
                        }
                    }
                } else {
                    for (c, plane) in planes.iter().enumerate() {
                        for i in 0..p {
                            data[c * p + i] = to_u8(plane[i]);
                        }
                    }
                }
                ImageTensor::new(t.height, t.width, t.channels, data, spatial)
            }
            _ => unreachable!("validated"),
        }
    }
}

fn float_planes(img: &ImageTensor, ycbcr: bool) -> Vec<Vec<f64>> {
    let p = img.plane_len();
    let mut planes: Vec<Vec<f64>> = (0..img.channels).map(|c| img.plane(c).iter().map(|&v| f64::from(v)).collect()).collect();
    if ycbcr {
        for i in 0..p {
            let v = forward_px(planes[0][i], planes[1][i], planes[2][i]);
            for (plane, vc) in planes.iter_mut().zip(v) {
                plane[i] = vc;
            }
        }
    }
    planes
}

impl fmt::Display for TransformChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let tags: Vec<String> = self
            .0
            .iter()
            .map(|t| match t {
                Transform::YCbCr => "ycbcr-bt601".to_string(),
                Transform::Dct { frac_bits } => format!("dct2-ortho:{frac_bits}"),
            })
            .collect();
        f.write_str(&tags.join(","))
    }
}

impl FromStr for TransformChain {
    type Err = ImgError;

    fn from_str(s: &str) -> Result<Self, ImgError> {
        let s = s.trim();
        if s == "none" || s.is_empty() {
            return Ok(Self::spatial());
        }
        s.split(',')
            .map(|tag| match tag.trim() {
                "ycbcr-bt601" => Ok(Transform::YCbCr),
                t => match t.strip_prefix("dct2-ortho:").and_then(|f| f.parse::<u8>().ok()) {
                    Some(frac_bits) if frac_bits <= MAX_FRAC_BITS => Ok(Transform::Dct { frac_bits }),
                    _ => Err(ImgError::InvalidConfig(format!("unknown transform `{t}`"))),
                },
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}
