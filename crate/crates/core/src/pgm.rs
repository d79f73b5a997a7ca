//! PGM (P2 ASCII and P5 binary) reading and P5 writing, 8-bit only.

use std::fs;
use std::path::Path;

use crate::{Error, GrayImage, Result};

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("{what} out of range")))
    }
}

/// Decodes a P2 or P5 PGM. Sample values are kept verbatim (no rescaling by maxval).
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(Error::Parse("missing magic number".into()));
    }
    let binary = match &bytes[..2] {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::Parse(format!(
                "bad magic {:?}, expected P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut header = Header {
        data: bytes,
        pos: 2,
    };
    let width = header.number("width")? as usize;
    let height = header.number("height")? as usize;
    let maxval = header.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse("image dimensions overflow".into()))?;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(header.pos) {
            Some(c) if c.is_ascii_whitespace() => header.pos += 1,
            _ => return Err(Error::Parse("missing whitespace after maxval".into())),
        }
        let raster = &bytes[header.pos..];
        if raster.len() < count {
            return Err(Error::Parse(format!(
                "truncated raster: {} of {count} bytes",
                raster.len()
            )));
        }
        raster[..count]
            .iter()
            .map(|&b| check_sample(b as u32, maxval))
            .collect::<Result<_>>()?
    } else {
        (0..count)
            .map(|_| {
                header
                    .number("sample")
                    .and_then(|v| check_sample(v, maxval))
            })
            .collect::<Result<_>>()?
    };
    GrayImage::new(width, height, pixels)
}

fn check_sample(v: u32, maxval: u32) -> Result<f64> {
    if v > maxval {
        return Err(Error::Parse(format!("sample {v} exceeds maxval {maxval}")));
    }
    Ok(v as f64)
}

/// Rounds half-up and clamps to `[0, 255]`.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Encodes as binary PGM: `"P5\n<w> <h>\n255\n"` followed by one byte per pixel.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.pixels().iter().map(|&p| quantize(p)));
    out
}

/// The image as it would be after a [`write_pgm`]/[`read_pgm`] cycle.
pub fn quantized(image: &GrayImage) -> GrayImage {
    image.map(|p| quantize(p) as f64)
}

pub fn read_pgm_file(path: impl AsRef<Path>) -> Result<GrayImage> {
    read_pgm(&fs::read(path)?)
}

pub fn write_pgm_file(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    fs::write(path, write_pgm(image))?;
    Ok(())
}
