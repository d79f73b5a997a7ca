//! Hard thresholding of singular values against a brute-force rank-penalty solver.

use plr::linalg::{hard_threshold_svd, rank_min_oracle, svd, Matrix};
use plr::rng::SplitMix64;

fn main() -> plr::Result<()> {
    let mut rng = SplitMix64::new(1);
    let y = Matrix::from_fn(5, 9, |_, _| rng.uniform(-1.0, 1.0));
    let s = svd(&y)?;
    println!("singular values: {:.4?}", s.singular);
    for q in [0.2, 0.5, 0.8, 1.2] {
        let root_mu = q * s.singular[0];
        let (best, cost) = rank_min_oracle(&y, root_mu * root_mu)?;
        let hard = hard_threshold_svd(&y, root_mu)?;
        let kept = s.singular.iter().filter(|&&v| v > root_mu).count();
        println!(
            "sqrt(mu) = {root_mu:.4}: keeps {kept}, objective {cost:.6}, max |oracle - threshold| = {:.1e}",
            best.max_abs_diff(&hard)
        );
    }
    Ok(())
}
