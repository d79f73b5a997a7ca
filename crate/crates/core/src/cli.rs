//! The `plr` command line.
//!
//! Exit codes: 0 success, 1 nothing to do, 2 usage, 3 I/O, 4 computation.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, BenchConfig};
use crate::denoiser::{denoise_image, DenoiseParams, GroupPath};
use crate::metrics::{add_gaussian_noise, psnr, NoiseSpec};
use crate::pgm::{read_pgm_file, write_pgm_file};
use crate::verify::{run_verify, VerifyOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_COMPUTE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "plr", version, about = "Patch-based low-rank image denoising")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoise a PGM image with known noise level.
    Denoise(DenoiseArgs),
    /// Add seeded Gaussian noise to a PGM image.
    Noise(NoiseArgs),
    /// Print the PSNR (dB) between two PGM images.
    Psnr { a: PathBuf, b: PathBuf },
    /// Noise, denoise and score every PGM in a directory.
    Bench(BenchArgs),
    /// Run the randomized oracle / equivalence / variance-identity checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, default_value_t = DenoiseParams::DEFAULT_PATCH_SIZE)]
    patch_size: usize,
    #[arg(long, default_value_t = DenoiseParams::DEFAULT_WINDOW)]
    window: usize,
    /// Patches per group [default: 5·patch-size²].
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long, default_value_t = DenoiseParams::DEFAULT_T_FACTOR)]
    t_factor: f64,
    /// Reference grid step [default: patch-size].
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value = "pca", value_parser = ["pca", "svd"])]
    path: String,
    /// Worker threads, 0 = available parallelism.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl ParamArgs {
    fn params(&self, sigma: f64) -> Result<DenoiseParams, Error> {
        let d = self.patch_size;
        let params = DenoiseParams {
            patch_size: d,
            window: self.window,
            group_size: self.group_size.unwrap_or(5 * d * d),
            sigma,
            t_factor: self.t_factor,
            stride: self.stride.unwrap_or(d),
            path: self.path.parse::<GroupPath>()?,
            threads: self.threads,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    input: PathBuf,
    output: PathBuf,
    /// Noise standard deviation (intensity units).
    #[arg(long)]
    sigma: f64,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skew the thresholds under test; the suite must then fail.
    #[cfg(feature = "fault-injection")]
    #[arg(long)]
    inject_threshold_fault: bool,
}

/// Command failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse(_) | Error::UnsupportedMaxval(_) => EXIT_IO,
            Error::InvalidParams(_) => EXIT_USAGE,
            _ => EXIT_COMPUTE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn io_context<'a>(what: &str, path: &'a std::path::Path) -> impl FnOnce(Error) -> Failure + 'a {
    let what = what.to_string();
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{what} {}: {}", path.display(), f.message);
        f
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Denoise(a) => cmd_denoise(a),
        Command::Noise(a) => cmd_noise(a),
        Command::Psnr { a, b } => cmd_psnr(a, b),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("plr: {}", f.message);
            f.code
        }
    }
}

fn cmd_denoise(args: DenoiseArgs) -> Result<i32, Failure> {
    if args.sigma.is_nan() || args.sigma < 0.0 {
        return Err(fail(
            EXIT_USAGE,
            format!("--sigma must be >= 0, got {}", args.sigma),
        ));
    }
    let params = args.params.params(args.sigma)?;
    let noisy = read_pgm_file(&args.input).map_err(io_context("reading", &args.input))?;
    let start = Instant::now();
    let restored = denoise_image(&noisy, &params)?;
    let seconds = start.elapsed().as_secs_f64();
    write_pgm_file(&args.output, &restored).map_err(io_context("writing", &args.output))?;
    println!(
        "denoised {}x{} (sigma {}, path {}) in {seconds:.3} s",
        noisy.width(),
        noisy.height(),
        params.sigma,
        params.path
    );
    Ok(EXIT_OK)
}

fn cmd_noise(args: NoiseArgs) -> Result<i32, Failure> {
    if !args.sigma.is_finite() || args.sigma < 0.0 {
        return Err(fail(
            EXIT_USAGE,
            format!("--sigma must be >= 0, got {}", args.sigma),
        ));
    }
    let clean = read_pgm_file(&args.input).map_err(io_context("reading", &args.input))?;
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(args.sigma, args.seed));
    write_pgm_file(&args.output, &noisy).map_err(io_context("writing", &args.output))?;
    Ok(EXIT_OK)
}

fn cmd_psnr(a: PathBuf, b: PathBuf) -> Result<i32, Failure> {
    let ia = read_pgm_file(&a).map_err(io_context("reading", &a))?;
    let ib = read_pgm_file(&b).map_err(io_context("reading", &b))?;
    let db = psnr(&ia, &ib)?;
    if db.is_infinite() {
        println!("inf");
    } else {
        println!("{db:.6}");
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs) -> Result<i32, Failure> {
    if args.sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(fail(EXIT_USAGE, "--sigmas must be non-negative"));
    }
    let params = args.params.params(0.0)?;
    let config = BenchConfig {
        sigmas: args.sigmas,
        seed: args.seed,
        params,
    };
    let report =
        run_bench(&args.corpus, &config).map_err(io_context("benchmarking", &args.corpus))?;
    for (path, reason) in &report.skipped {
        eprintln!("plr: warning: skipping {}: {reason}", path.display());
    }
    if report.rows.is_empty() {
        eprintln!("plr: no readable PGM images in {}", args.corpus.display());
        return Ok(EXIT_EMPTY);
    }
    let file = File::create(&args.out).map_err(|e| io_context("writing", &args.out)(e.into()))?;
    report
        .write_csv(BufWriter::new(file))
        .map_err(io_context("writing", &args.out))?;
    println!(
        "{:<16} {:>6} {:>10} {:>10} {:>8}",
        "image", "sigma", "noisy dB", "PSNR dB", "seconds"
    );
    for r in &report.rows {
        println!(
            "{:<16} {:>6} {:>10.2} {:>10.2} {:>8.2}",
            r.image, r.sigma, r.noisy_psnr_db, r.psnr_db, r.seconds
        );
    }
    println!("wrote {} rows to {}", report.rows.len(), args.out.display());
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Failure> {
    #[cfg(feature = "fault-injection")]
    let threshold_skew = if args.inject_threshold_fault {
        0.7
    } else {
        1.0
    };
    #[cfg(not(feature = "fault-injection"))]
    let threshold_skew = 1.0;

    if args.trials == 0 {
        eprintln!("plr: warning: --trials 0, nothing verified");
        return Ok(EXIT_OK);
    }
    let options = VerifyOptions {
        trials: args.trials,
        seed: args.seed,
        threshold_skew,
    };
    let report = run_verify(&options)?;
    println!(
        "{} oracle agreements ({} near-tie levels skipped, worst {:.1e})",
        report.oracle, report.oracle.skipped, report.oracle.worst
    );
    println!(
        "{} path agreements (worst {:.1e})",
        report.paths, report.paths.worst
    );
    println!(
        "{} variance identity checks (worst {:.1e})",
        report.variance, report.variance.worst
    );
    if report.all_passed() {
        println!("all checks passed");
        Ok(EXIT_OK)
    } else {
        println!("verification FAILED");
        Ok(EXIT_COMPUTE)
    }
}
