//! Denoise a PGM file.
//!
//! ```text
//! cargo run --release --example denoise_pgm -- noisy.pgm out.pgm 20
//! ```

use std::env;
use std::process::ExitCode;

use plr::denoiser::{denoise_image, DenoiseParams};
use plr::pgm::{read_pgm_file, write_pgm_file};

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    let [input, output, sigma] = args.as_slice() else {
        eprintln!("usage: denoise_pgm <noisy.pgm> <out.pgm> <sigma>");
        return ExitCode::from(2);
    };
    let Ok(sigma) = sigma.parse::<f64>() else {
        eprintln!("sigma must be a number");
        return ExitCode::from(2);
    };
    let result = read_pgm_file(input)
        .and_then(|noisy| denoise_image(&noisy, &DenoiseParams::new(sigma)))
        .and_then(|restored| write_pgm_file(output, &restored));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
