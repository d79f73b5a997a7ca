//! Seeded noise and PSNR on a synthetic image, and on a file if one is given.

use std::env;

use plr::metrics::{add_gaussian_noise, psnr, NoiseSpec};
use plr::pgm::{quantized, read_pgm_file};
use plr::GrayImage;

fn main() -> plr::Result<()> {
    let clean = match env::args().nth(1) {
        Some(path) => read_pgm_file(path)?,
        None => GrayImage::from_fn(256, 256, |r, c| {
            128.0 + 60.0 * ((r as f64 / 17.0).sin() + (c as f64 / 23.0).cos()) / 2.0
        }),
    };
    println!(
        "{:>6} {:>10} {:>12} {:>10}",
        "sigma", "PSNR dB", "8-bit dB", "analytic"
    );
    for sigma in [5.0, 10.0, 20.0, 40.0] {
        let noisy = add_gaussian_noise(&clean, NoiseSpec::new(sigma, 42));
        let analytic = 20.0 * (255.0 / sigma).log10();
        println!(
            "{sigma:>6} {:>10.3} {:>12.3} {analytic:>10.3}",
            psnr(&clean, &noisy)?,
            psnr(&clean, &quantized(&noisy))?
        );
    }
    let a = add_gaussian_noise(&clean, NoiseSpec::new(20.0, 7));
    let b = add_gaussian_noise(&clean, NoiseSpec::new(20.0, 7));
    println!("same seed, same noise: {}", a == b);
    Ok(())
}
