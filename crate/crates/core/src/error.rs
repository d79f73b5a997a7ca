use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("input contains NaN or infinite values")]
    NonFinite,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("PGM parse error: {0}")]
    Parse(String),

    #[error("unsupported PGM maxval {0} (expected 1..=255)")]
    UnsupportedMaxval(u32),

    #[error("padding margin {margin} exceeds image size {width}x{height}")]
    MarginTooLarge {
        margin: usize,
        width: usize,
        height: usize,
    },

    #[error("{size}x{size} patch at ({row}, {col}) lies outside a {width}x{height} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("image {width}x{height} is smaller than the {patch}x{patch} patch")]
    ImageTooSmall {
        width: usize,
        height: usize,
        patch: usize,
    },

    #[error("search window at ({row}, {col}) of side {side} leaves the padded image")]
    WindowOutOfBounds { row: isize, col: isize, side: usize },

    #[error("{0} pixels received no estimate")]
    UncoveredPixels(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
