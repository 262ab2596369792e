//! Binary PGM (P5) and PPM (P6) with 8-bit samples.

use super::{Domain, ImageTensor, ImgError};

fn bad(m: &str) -> ImgError {
    ImgError::Format(format!("PNM: {m}"))
}

/// Header tokens are separated by whitespace; `#` starts a comment that
/// runs to the end of the line.
fn header_token(bytes: &[u8], pos: &mut usize) -> Result<u64, ImgError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err(bad("truncated header")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&v| v <= u64::from(u32::MAX))
        .ok_or_else(|| bad("expected a number"))
}

pub fn read_pnm(bytes: &[u8]) -> Result<ImageTensor, ImgError> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(bad("only P5 and P6 are supported")),
    };
    let mut pos = 2;
    let width = header_token(bytes, &mut pos)? as usize;
    let height = header_token(bytes, &mut pos)? as usize;
    let maxval = header_token(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing separator before samples"));
    }
    let body = &bytes[pos + 1..];
    let need = width.checked_mul(height).and_then(|p| p.checked_mul(channels)).ok_or_else(|| bad("size overflow"))?;
    if body.len() != need {
        return Err(bad(&format!("expected {need} sample bytes, found {}", body.len())));
    }
    ImageTensor::from_interleaved(height, width, channels, body)
}

pub fn write_pnm(img: &ImageTensor) -> Result<Vec<u8>, ImgError> {
    let magic = match img.domain {
        Domain::SpatialGray => "P5",
        Domain::SpatialRgb => "P6",
        d => return Err(ImgError::WrongDomain { expected: "spatial", found: d }),
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_interleaved()?);
    Ok(out)
}
