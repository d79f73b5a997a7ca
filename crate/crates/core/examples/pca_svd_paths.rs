//! The two group estimators side by side on one block-matched group.

use plr::denoiser::{denoise_group, DenoiseParams, GroupPath, Pipeline};
use plr::metrics::{add_gaussian_noise, NoiseSpec};
use plr::GrayImage;

fn main() -> plr::Result<()> {
    let clean = GrayImage::from_fn(64, 64, |r, c| {
        if (r / 8 + c / 8) % 2 == 0 {
            70.0
        } else {
            180.0
        }
    });
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(20.0, 3));
    let params = DenoiseParams::new(20.0);
    let pipeline = Pipeline::new(&noisy, &params)?;
    let reference = pipeline.references()[27];
    let group = pipeline.group(reference)?;
    println!(
        "group at {reference:?}: {} patches of {} pixels",
        group.len(),
        group.matrix.rows()
    );

    for t in [0.0, 10.0, params.threshold(), 60.0] {
        let pca = denoise_group(&group, t, GroupPath::Pca)?;
        let svd = denoise_group(&group, t, GroupPath::Svd)?;
        println!(
            "t = {t:>4}: rank {:>2} / {:>2}, max difference {:.1e}",
            pca.rank,
            svd.rank,
            pca.matrix.max_abs_diff(&svd.matrix)
        );
    }
    Ok(())
}
