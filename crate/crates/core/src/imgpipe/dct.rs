//! Orthonormal whole-channel 2D DCT-II and its inverse.

use super::color::to_u8;
use super::{Domain, ImageTensor, ImgError};

/// Separable orthonormal DCT for one `height × width` plane.
#[derive(Debug, Clone)]
pub struct Dct2d {
    height: usize,
    width: usize,
    ch: Vec<f64>,
    cw: Vec<f64>,
}

/// Row-major `n × n` basis: `c[k][i] = s_k cos(π(2i+1)k / 2n)`.
fn basis(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for k in 0..n {
        let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for i in 0..n {
            c[k * n + i] = s * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    c
}

impl Dct2d {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width, ch: basis(height), cw: basis(width) }
    }

    /// `C_h · X · C_wᵀ`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x, false)
    }

    /// `C_hᵀ · Y · C_w`.
    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        self.apply(y, true)
    }

    fn apply(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let at = |c: &[f64], n: usize, k: usize, i: usize| if transpose { c[i * n + k] } else { c[k * n + i] };
        // along rows: t[r][k] = Σ_i x[r][i]·b_w(k, i)
        let mut t = vec![0.0; h * w];
        for r in 0..h {
            for k in 0..w {
                t[r * w + k] = (0..w).map(|i| x[r * w + i] * at(&self.cw, w, k, i)).sum();
            }
        }
        let mut out = vec![0.0; h * w];
        for k in 0..h {
            for c in 0..w {
                out[k * w + c] = (0..h).map(|i| at(&self.ch, h, k, i) * t[i * w + c]).sum();
            }
        }
        out
    }
}

/// Coefficients stored as `round(c · 2^frac_bits)`.
pub(crate) fn quantize(coeffs: &[f64], frac_bits: u8) -> Vec<i32> {
    let s = f64::from(1u32 << frac_bits);
    coeffs.iter().map(|c| (c * s).round() as i32).collect()
}

pub(crate) fn dequantize(coeffs: &[i32], frac_bits: u8) -> Vec<f64> {
    let s = f64::from(1u32 << frac_bits);
    coeffs.iter().map(|&c| f64::from(c) / s).collect()
}

pub(crate) const MAX_FRAC_BITS: u8 = 8;

fn check_frac(frac_bits: u8) -> Result<(), ImgError> {
    if frac_bits > MAX_FRAC_BITS {
        return Err(ImgError::InvalidConfig(format!("at most {MAX_FRAC_BITS} fractional bits")));
    }
    Ok(())
}

/// Per-channel DCT of a spatial or YCbCr tensor.
pub fn dct_forward(img: &ImageTensor, frac_bits: u8) -> Result<ImageTensor, ImgError> {
    check_frac(frac_bits)?;
    if img.domain == Domain::DctCoeff {
        return Err(ImgError::WrongDomain { expected: "spatial or ycbcr", found: img.domain });
    }
    let dct = Dct2d::new(img.height, img.width);
    let mut data = Vec::with_capacity(img.data.len());
    for c in 0..img.channels {
        let plane: Vec<f64> = img.plane(c).iter().map(|&v| f64::from(v)).collect();
        data.extend(quantize(&dct.forward(&plane), frac_bits));
    }
    Ok(ImageTensor { data, domain: Domain::DctCoeff, ..img.clone() })
}

/// Inverse DCT, rounded and clamped to `0..=255`, tagged `domain`.
pub fn dct_inverse(coeffs: &ImageTensor, frac_bits: u8, domain: Domain) -> Result<ImageTensor, ImgError> {
    check_frac(frac_bits)?;
    if coeffs.domain != Domain::DctCoeff {
        return Err(ImgError::WrongDomain { expected: "dct_coeff", found: coeffs.domain });
    }
    let dct = Dct2d::new(coeffs.height, coeffs.width);
    let mut data = Vec::with_capacity(coeffs.data.len());
    for c in 0..coeffs.channels {
        data.extend(dct.inverse(&dequantize(coeffs.plane(c), frac_bits)).into_iter().map(to_u8));
    }
    ImageTensor::new(coeffs.height, coeffs.width, coeffs.channels, data, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gray(h: usize, w: usize, data: Vec<i32>) -> ImageTensor {
        ImageTensor::new(h, w, 1, data, Domain::SpatialGray).unwrap()
    }

    #[test]
    fn constant_channel_is_pure_dc() {
        let c = 100;
        let co = dct_forward(&gray(4, 6, vec![c; 24]), 0).unwrap();
        assert_eq!(co.data[0], (f64::from(c) * 24f64.sqrt()).round() as i32);
        assert!(co.data[1..].iter().all(|&v| v == 0));
        assert!(dct_forward(&gray(3, 3, vec![0; 9]), 0).unwrap().data.iter().all(|&v| v == 0));
    }

    #[test]
    fn random_channel_round_trip_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let img = gray(32, 32, (0..1024).map(|_| rng.gen_range(0..=255)).collect());
            for frac in [0, 1] {
                let co = dct_forward(&img, frac).unwrap();
                let back = dct_inverse(&co, frac, Domain::SpatialGray).unwrap();
                assert!(img.max_abs_diff(&back) <= 2);
                // energy of rounded coefficients stays within the rounding bound
                let s = f64::from(1u32 << frac);
                let e_px: f64 = img.data.iter().map(|&v| f64::from(v).powi(2)).sum();
                let e_co: f64 = co.data.iter().map(|&v| (f64::from(v) / s).powi(2)).sum();
                let bound = 2.0 * e_px.sqrt() * (1024.0f64).sqrt() * 0.5 / s + 1024.0 * 0.25 / (s * s);
                assert!((e_px - e_co).abs() <= bound, "{e_px} {e_co}");
            }
        }
    }

    #[test]
    fn unrounded_transform_is_orthonormal() {
        let dct = Dct2d::new(5, 7);
        let x: Vec<f64> = (0..35).map(|i| f64::from(i * 7 % 11)).collect();
        let back = dct.inverse(&dct.forward(&x));
        assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn domain_checks() {
        let co = dct_forward(&gray(2, 2, vec![1; 4]), 0).unwrap();
        assert!(dct_forward(&co, 0).is_err());
        assert!(dct_inverse(&gray(2, 2, vec![1; 4]), 0, Domain::SpatialGray).is_err());
        assert!(dct_forward(&gray(2, 2, vec![1; 4]), 9).is_err());
    }
}
