//! Grayscale images, symmetric padding, patch vectorization and the
//! aggregation buffer for overlapping patch estimates.

use crate::{Error, Result};

/// Row-major grayscale image with real-valued intensities.
///
/// Values nominally lie in `[0, 255]` but are never clamped here; clamping
/// happens only when exporting to 8 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pixels ({width}x{height})", width * height),
                actual: format!("{} pixels", pixels.len()),
            });
        }
        if !pixels.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every pixel.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn transpose(&self) -> GrayImage {
        GrayImage::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }

    /// Sub-image of `width × height` pixels starting at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<GrayImage> {
        if row + height > self.height || col + width > self.width {
            return Err(Error::OutOfBounds {
                row,
                col,
                size: width.max(height),
                width: self.width,
                height: self.height,
            });
        }
        Ok(GrayImage::from_fn(width, height, |r, c| {
            self.get(row + r, col + c)
        }))
    }

    /// Removes `margin` pixels from every side; inverse of [`pad_symmetric`].
    pub fn crop_margin(&self, margin: usize) -> Result<GrayImage> {
        if 2 * margin > self.width || 2 * margin > self.height {
            return Err(Error::MarginTooLarge {
                margin,
                width: self.width,
                height: self.height,
            });
        }
        self.crop(
            margin,
            margin,
            self.width - 2 * margin,
            self.height - 2 * margin,
        )
    }
}

/// Mirror index with the edge pixel repeated: `-1 → 0`, `-2 → 1`, `len → len-1`.
#[inline]
fn reflect(i: isize, len: usize) -> usize {
    let len = len as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= len {
        2 * len - i - 1
    } else {
        i
    };
    j as usize
}

/// Extends `image` by `margin` pixels on every side with symmetric
/// (edge-repeating) reflection.
pub fn pad_symmetric(image: &GrayImage, margin: usize) -> Result<GrayImage> {
    if margin > image.width.min(image.height) {
        return Err(Error::MarginTooLarge {
            margin,
            width: image.width,
            height: image.height,
        });
    }
    let m = margin as isize;
    let cols: Vec<usize> = (0..image.width + 2 * margin)
        .map(|c| reflect(c as isize - m, image.width))
        .collect();
    let mut pixels = Vec::with_capacity(cols.len() * (image.height + 2 * margin));
    for r in 0..image.height + 2 * margin {
        let src = image.row(reflect(r as isize - m, image.height));
        pixels.extend(cols.iter().map(|&c| src[c]));
    }
    Ok(GrayImage {
        width: image.width + 2 * margin,
        height: image.height + 2 * margin,
        pixels,
    })
}

/// A vectorized `d × d` block.
///
/// `values` is column-major: entry `j·d + i` is pixel (`row + i`, `col + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub row: usize,
    pub col: usize,
    pub size: usize,
    pub values: Vec<f64>,
}

pub fn extract_patch(image: &GrayImage, row: usize, col: usize, size: usize) -> Result<Patch> {
    let mut values = vec![0.0; size * size];
    extract_into(image, row, col, size, &mut values)?;
    Ok(Patch {
        row,
        col,
        size,
        values,
    })
}

/// Writes the column-major vectorization of the patch at (`row`, `col`) into `out`.
pub fn extract_into(
    image: &GrayImage,
    row: usize,
    col: usize,
    size: usize,
    out: &mut [f64],
) -> Result<()> {
    if row + size > image.height || col + size > image.width {
        return Err(Error::OutOfBounds {
            row,
            col,
            size,
            width: image.width,
            height: image.height,
        });
    }
    debug_assert_eq!(out.len(), size * size);
    for i in 0..size {
        let src = &image.row(row + i)[col..col + size];
        for (j, &v) in src.iter().enumerate() {
            out[j * size + i] = v;
        }
    }
    Ok(())
}

/// Per-pixel sum and count of patch estimates over a rectangular region.
///
/// The region may be a band of a larger image (`origin_row`, `origin_col`),
/// so that workers can aggregate locally and [`merge`](Self::merge) later.
#[derive(Debug, Clone)]
pub struct Accumulator {
    origin_row: usize,
    origin_col: usize,
    width: usize,
    height: usize,
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl Accumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self::with_origin(0, 0, width, height)
    }

    pub fn with_origin(origin_row: usize, origin_col: usize, width: usize, height: usize) -> Self {
        Self {
            origin_row,
            origin_col,
            width,
            height,
            sum: vec![0.0; width * height],
            count: vec![0; width * height],
        }
    }

    fn check(&self, row: usize, col: usize, size: usize) -> Result<(usize, usize)> {
        let oob = || Error::OutOfBounds {
            row,
            col,
            size,
            width: self.width,
            height: self.height,
        };
        let r = row.checked_sub(self.origin_row).ok_or_else(oob)?;
        let c = col.checked_sub(self.origin_col).ok_or_else(oob)?;
        if r + size > self.height || c + size > self.width {
            return Err(oob());
        }
        Ok((r, c))
    }

    pub fn accumulate(&mut self, patch: &Patch) -> Result<()> {
        self.accumulate_values(patch.row, patch.col, patch.size, |k| patch.values[k])
    }

    /// Adds a column-major patch estimate whose entry `k` is `value(k)`.
    pub fn accumulate_values(
        &mut self,
        row: usize,
        col: usize,
        size: usize,
        value: impl Fn(usize) -> f64,
    ) -> Result<()> {
        let (r0, c0) = self.check(row, col, size)?;
        for j in 0..size {
            for i in 0..size {
                let idx = (r0 + i) * self.width + c0 + j;
                self.sum[idx] += value(j * size + i);
                self.count[idx] += 1;
            }
        }
        Ok(())
    }

    /// Adds the sums and counts of `other`, which must lie inside `self`.
    pub fn merge(&mut self, other: &Accumulator) -> Result<()> {
        let r0 = other.origin_row.checked_sub(self.origin_row);
        let c0 = other.origin_col.checked_sub(self.origin_col);
        let (r0, c0) = match (r0, c0) {
            (Some(r), Some(c))
                if r + other.height <= self.height && c + other.width <= self.width =>
            {
                (r, c)
            }
            _ => {
                return Err(Error::OutOfBounds {
                    row: other.origin_row,
                    col: other.origin_col,
                    size: other.width.max(other.height),
                    width: self.width,
                    height: self.height,
                })
            }
        };
        for r in 0..other.height {
            let dst = (r0 + r) * self.width + c0;
            let src = r * other.width;
            for c in 0..other.width {
                self.sum[dst + c] += other.sum[src + c];
                self.count[dst + c] += other.count[src + c];
            }
        }
        Ok(())
    }

    /// The `width × height` sub-region starting at absolute (`row`, `col`).
    pub fn cropped(
        &self,
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    ) -> Result<Accumulator> {
        let (r0, c0) = self.check(row, col, 0)?;
        if r0 + height > self.height || c0 + width > self.width {
            return Err(Error::OutOfBounds {
                row,
                col,
                size: width.max(height),
                width: self.width,
                height: self.height,
            });
        }
        let mut out = Accumulator::with_origin(row, col, width, height);
        for r in 0..height {
            let src = (r0 + r) * self.width + c0;
            out.sum[r * width..(r + 1) * width].copy_from_slice(&self.sum[src..src + width]);
            out.count[r * width..(r + 1) * width].copy_from_slice(&self.count[src..src + width]);
        }
        Ok(out)
    }

    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.count[(row - self.origin_row) * self.width + col - self.origin_col]
    }

    /// Per-pixel mean of the estimates.
    pub fn finalize(&self) -> Result<GrayImage> {
        let uncovered = self.count.iter().filter(|&&c| c == 0).count();
        if uncovered > 0 {
            return Err(Error::UncoveredPixels(uncovered));
        }
        let pixels = self
            .sum
            .iter()
            .zip(&self.count)
            .map(|(s, &c)| s / c as f64)
            .collect();
        Ok(GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        })
    }
}
