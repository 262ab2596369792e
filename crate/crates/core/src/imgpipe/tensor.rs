use std::fmt;

use super::ImgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    SpatialRgb,
    SpatialGray,
    YCbCr,
    DctCoeff,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::SpatialRgb => "spatial_rgb",
            Domain::SpatialGray => "spatial_gray",
            Domain::YCbCr => "ycbcr",
            Domain::DctCoeff => "dct_coeff",
        })
    }
}

/// Planar image: channel `c`, row `y`, column `x` lives at
/// `data[(c·height + y)·width + x]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<i32>,
    pub domain: Domain,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<i32>, domain: Domain) -> Result<Self, ImgError> {
        let t = Self { height, width, channels, data, domain };
        t.validate()?;
        Ok(t)
    }

    /// From interleaved 8-bit samples, as stored in PPM/PGM and IDX.
    pub fn from_interleaved(height: usize, width: usize, channels: usize, bytes: &[u8]) -> Result<Self, ImgError> {
        let domain = match channels {
            1 => Domain::SpatialGray,
            3 => Domain::SpatialRgb,
            c => return Err(ImgError::ShapeMismatch(format!("{c} channels"))),
        };
        if bytes.len() != height * width * channels {
            return Err(ImgError::ShapeMismatch(format!("{} bytes for {height}×{width}×{channels}", bytes.len())));
        }
        let plane = height * width;
        let mut data = vec![0i32; bytes.len()];
        for (i, px) in bytes.chunks_exact(channels).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                data[c * plane + i] = i32::from(v);
            }
        }
        Ok(Self { height, width, channels, data, domain })
    }

    pub fn to_interleaved(&self) -> Result<Vec<u8>, ImgError> {
        if !matches!(self.domain, Domain::SpatialGray | Domain::SpatialRgb) {
            return Err(ImgError::WrongDomain { expected: "spatial", found: self.domain });
        }
        let plane = self.plane_len();
        let mut out = vec![0u8; self.data.len()];
        for i in 0..plane {
            for c in 0..self.channels {
                out[i * self.channels + c] = self.data[c * plane + i] as u8;
            }
        }
        Ok(out)
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn plane(&self, c: usize) -> &[i32] {
        let p = self.plane_len();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn same_shape(&self, other: &ImageTensor) -> bool {
        (self.height, self.width, self.channels) == (other.height, other.width, other.channels)
    }

    pub fn max_abs_diff(&self, other: &ImageTensor) -> i32 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ImgError> {
        if self.data.len() != self.height * self.width * self.channels {
            return Err(ImgError::ShapeMismatch(format!(
                "{} samples for {}×{}×{}",
                self.data.len(),
                self.height,
                self.width,
                self.channels
            )));
        }
        let channels_ok = match self.domain {
            Domain::SpatialGray => self.channels == 1,
            Domain::SpatialRgb | Domain::YCbCr => self.channels == 3,
            Domain::DctCoeff => matches!(self.channels, 1 | 3),
        };
        if !channels_ok {
            return Err(ImgError::ShapeMismatch(format!("{} channels in {} domain", self.channels, self.domain)));
        }
        if self.domain != Domain::DctCoeff && self.data.iter().any(|v| !(0..=255).contains(v)) {
            return Err(ImgError::ShapeMismatch("sample outside 0..=255".into()));
        }
        Ok(())
    }
}
