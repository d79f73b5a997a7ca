//! Oracle coefficient selection versus the threshold `t = factor·sigma`.

use plr::denoiser::{
    build_group, denoise_image, group_basis, ideal_coefficients, pca_mask, DenoiseParams, Pipeline,
};
use plr::metrics::{add_gaussian_noise, psnr, NoiseSpec};
use plr::pgm::quantized;
use plr::GrayImage;

fn main() -> plr::Result<()> {
    let sigma = 20.0;
    let clean = GrayImage::from_fn(96, 96, |r, c| {
        let (x, y) = (c as f64, r as f64);
        128.0 + 50.0 * (x / 9.0).sin() * (y / 13.0).cos() + if x + y > 96.0 { 30.0 } else { -30.0 }
    });
    let noisy = quantized(&add_gaussian_noise(&clean, NoiseSpec::new(sigma, 5)));

    let params = DenoiseParams::new(sigma);
    let noisy_pipe = Pipeline::new(&noisy, &params)?;
    let clean_pipe = Pipeline::new(&clean, &params)?;
    let (mut agree, mut total) = (0, 0);
    for r in noisy_pipe.references() {
        let group = noisy_pipe.group(r)?;
        let basis = group_basis(&group)?;
        // Clean patches at the positions matched in the noisy image.
        let clean_group = build_group(clean_pipe.padded(), &group.coords, params.patch_size)?;
        let ideal = ideal_coefficients(&clean_group, &basis, sigma)?;
        let chosen = pca_mask(&basis, group.len(), params.threshold());
        agree += ideal.iter().zip(&chosen).filter(|(a, b)| a == b).count();
        total += ideal.len();
    }
    println!("t = 1.5 sigma matches the oracle mask on {agree}/{total} components");

    println!("noisy: {:.2} dB", psnr(&clean, &noisy)?);
    for factor in [1.0, 1.25, 1.5, 1.75, 2.0, 2.5] {
        let p = DenoiseParams {
            t_factor: factor,
            ..params.clone()
        };
        println!(
            "t = {factor:.2} sigma: {:.2} dB",
            psnr(&clean, &denoise_image(&noisy, &p)?)?
        );
    }
    Ok(())
}
