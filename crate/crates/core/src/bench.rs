//! PSNR / wall-time benchmark over a corpus of clean PGM images.
//!
//! For every image and noise level the clean image is corrupted with seeded
//! Gaussian noise, clamped and quantized to 8 bits (exactly what a noisy PGM
//! on disk would hold), denoised, and scored against the clean image on the
//! unclamped real-valued output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::denoiser::{denoise_image, DenoiseParams};
use crate::metrics::{add_gaussian_noise, psnr, NoiseSpec};
use crate::pgm::{quantized, read_pgm_file};
use crate::{Error, GrayImage, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "image", "sigma", "d", "n", "m", "t_factor", "stride", "path", "psnr_db", "seconds",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub sigma: f64,
    pub params: DenoiseParams,
    pub noisy_psnr_db: f64,
    pub psnr_db: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sigmas: Vec<f64>,
    pub seed: u64,
    /// Denoising parameters; `sigma` is overwritten per run.
    pub params: DenoiseParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![10.0, 20.0],
            seed: 0,
            params: DenoiseParams::new(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub seed: u64,
    pub params: DenoiseParams,
    pub rows: Vec<BenchRow>,
    /// Corpus files that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl BenchReport {
    /// CSV with a `#`-prefixed metadata block followed by one row per (image, sigma).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let p = &self.params;
        writeln!(out, "# plr benchmark report")?;
        writeln!(
            out,
            "# defaults: d={} n={} m={} t_factor={} stride={} path={}",
            p.patch_size, p.window, p.group_size, p.t_factor, p.stride, p.path
        )?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(
            out,
            "# noisy input: clamped to [0,255] and quantized to 8 bits before denoising"
        )?;
        writeln!(
            out,
            "# psnr: unclamped real-valued output against the clean image"
        )?;
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for r in &self.rows {
            let q = &r.params;
            csv.write_record([
                r.image.clone(),
                r.sigma.to_string(),
                q.patch_size.to_string(),
                q.window.to_string(),
                q.group_size.to_string(),
                q.t_factor.to_string(),
                q.stride.to_string(),
                q.path.to_string(),
                format!("{:.4}", r.psnr_db),
                format!("{:.3}", r.seconds),
            ])
            .map_err(csv_error)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Noisy input as the benchmark denoises it.
pub fn noisy_input(clean: &GrayImage, sigma: f64, seed: u64) -> GrayImage {
    quantized(&add_gaussian_noise(clean, NoiseSpec::new(sigma, seed)))
}

pub fn bench_image(
    name: &str,
    clean: &GrayImage,
    sigma: f64,
    config: &BenchConfig,
) -> Result<BenchRow> {
    let noisy = noisy_input(clean, sigma, config.seed);
    let params = DenoiseParams {
        sigma,
        ..config.params.clone()
    };
    let start = Instant::now();
    let restored = denoise_image(&noisy, &params)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchRow {
        image: name.to_string(),
        sigma,
        noisy_psnr_db: psnr(clean, &noisy)?,
        psnr_db: psnr(clean, &restored)?,
        params,
        seconds,
    })
}

/// `*.pgm` files of `dir` (case-insensitive extension), sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every corpus image at every configured sigma. Unreadable files are
/// recorded in `skipped`; denoising failures abort.
pub fn run_bench(dir: &Path, config: &BenchConfig) -> Result<BenchReport> {
    let mut report = BenchReport {
        seed: config.seed,
        params: config.params.clone(),
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for path in corpus_files(dir)? {
        let clean = match read_pgm_file(&path) {
            Ok(img) => img,
            Err(e) => {
                report.skipped.push((path, e.to_string()));
                continue;
            }
        };
        let name = path
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        for &sigma in &config.sigmas {
            report.rows.push(bench_image(&name, &clean, sigma, config)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgm::write_pgm_file;

    fn small_config() -> BenchConfig {
        let params = DenoiseParams {
            window: 11,
            group_size: 30,
            ..DenoiseParams::with_patch_size(0.0, 4)
        };
        BenchConfig {
            sigmas: vec![10.0, 20.0],
            seed: 1,
            params,
        }
    }

    #[test]
    fn one_image_two_sigmas() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(32, 32, |r, c| ((r * 8 + c * 3) % 200) as f64);
        write_pgm_file(dir.path().join("ramp.pgm"), &img).unwrap();
        fs::write(dir.path().join("broken.PGM"), b"P5\n9 9\n255\n").unwrap();
        fs::write(dir.path().join("notes.txt"), b"ignored").unwrap();

        let report = run_bench(dir.path(), &small_config()).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.skipped.len(), 1);
        assert!(report.rows.iter().all(|r| r.image == "ramp"));

        let csv = report.to_csv_string();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("ramp,10,4,11,30,1.5,4,pca,"));
        assert!(csv.contains("# seed: 1"));
    }

    #[test]
    fn empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        assert!(run_bench(dir.path(), &small_config())
            .unwrap()
            .rows
            .is_empty());
    }
}
