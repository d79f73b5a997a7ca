//! Patch-based low-rank (PLR) image denoising.
//!
//! A noisy grayscale image is covered by a grid of reference patches. For each
//! reference, the most similar patches in a surrounding search window are
//! stacked as the columns of a similarity matrix, centered on their mean, and
//! denoised by keeping only the principal components whose coefficient
//! variance exceeds a threshold `t²`. Keeping those components is the same
//! as hard-thresholding the singular values of the similarity matrix at
//! `t·√m`, which is the exact minimizer of
//!
//! ```text
//! ‖S − X‖²_F + m·t²·rank(X)
//! ```
//!
//! Overlapping patch estimates are averaged back into the image.
//!
//! The crate is organized as:
//!
//! - [`linalg`]: small dense matrices, Jacobi eigensolver, SVD, hard
//!   thresholding and a brute-force rank-penalty oracle.
//! - [`image`] and [`pgm`]: grayscale images, symmetric padding, patch
//!   vectorization, aggregation, PGM I/O.
//! - [`denoiser`]: block matching, similarity groups and the full pipeline.
//! - [`metrics`]: seeded Gaussian noise, MSE and PSNR.
//! - [`bench`] and [`verify`]: the benchmark harness and the randomized
//!   verification suite behind the `plr` binary ([`cli`]).
//!
//! ```no_run
//! use plr::{denoiser::{denoise_image, DenoiseParams}, metrics, pgm};
//!
//! let clean = pgm::read_pgm_file("lena.pgm").unwrap();
//! let noisy = metrics::add_gaussian_noise(&clean, metrics::NoiseSpec::new(20.0, 7));
//! let restored = denoise_image(&noisy, &DenoiseParams::new(20.0)).unwrap();
//! println!("{:.2} dB", metrics::psnr(&clean, &restored).unwrap());
//! ```

pub mod bench;
pub mod cli;
pub mod denoiser;
mod error;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod pgm;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use image::GrayImage;
pub use linalg::Matrix;
