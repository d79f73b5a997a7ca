//! Randomized self-checks of the identities the denoiser relies on.
//!
//! - Rank-penalty oracle: hard thresholding at `√μ` must coincide with the
//!   brute-force minimizer of `‖Y − X‖²_F + μ·rank(X)`.
//! - Path equivalence: PCA-basis thresholding and singular-value
//!   thresholding produce the same group estimate.
//! - Variance identity: `(1/m)·Σ_l ⟨s_l, g_k⟩² = λ_k/m` for every component.

use std::fmt;

use crate::denoiser::{
    coefficient_variances, denoise_group_pca, denoise_group_svd, group_basis, SimilarityGroup,
};
use crate::linalg::{hard_threshold_svd, rank_min_oracle, svd, Matrix};
use crate::rng::SplitMix64;
use crate::Result;

/// Entrywise agreement between hard thresholding and the oracle.
pub const ORACLE_TOL: f64 = 1e-10;
/// Draws with `√μ` this close to a singular value are skipped (non-unique minimizer).
pub const TIE_EXCLUSION: f64 = 1e-9;
/// Entrywise agreement between the PCA and SVD group estimates.
pub const PATH_TOL: f64 = 1e-8;
/// Relative tolerance of the variance identity.
pub const VARIANCE_TOL: f64 = 1e-8;
/// Multiples of `Σ_max` used as `√μ`.
pub const MU_LEVELS: [f64; 4] = [0.25, 0.5, 0.9, 1.5];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Multiplier applied to the threshold on the implementation side of each
    /// comparison. 1.0 for a real run; anything else should make the suite fail.
    pub threshold_skew: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            threshold_skew: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
    /// Comparisons excluded because of a near tie.
    pub skipped: usize,
    /// Largest observed deviation.
    pub worst: f64,
}

impl Tally {
    fn record(&mut self, ok: bool, deviation: f64) {
        self.total += 1;
        if ok {
            self.passed += 1;
        }
        self.worst = self.worst.max(deviation);
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.passed, self.total)
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub oracle: Tally,
    pub paths: Tally,
    pub variance: Tally,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.oracle.all_passed() && self.paths.all_passed() && self.variance.all_passed()
    }
}

/// Random matrix with at most 8 rows and `rows..=12` columns, entries in `[−1, 1]`.
pub fn random_small_matrix(rng: &mut SplitMix64) -> Matrix {
    let rows = rng.range_inclusive(1, 8);
    let cols = rng.range_inclusive(rows, 12);
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
}

/// A `d² × m` similarity group resembling real data: a smooth low-rank
/// structure around mid-gray plus white noise of std-dev `sigma`.
pub fn random_group(rng: &mut SplitMix64, d: usize, m: usize, sigma: f64) -> SimilarityGroup {
    let dim = d * d;
    let rank = 4;
    let atoms: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    let base: Vec<f64> = (0..dim).map(|_| rng.uniform(60.0, 190.0)).collect();
    let mut raw = Matrix::zeros(dim, m);
    for l in 0..m {
        let weights: Vec<f64> = (0..rank)
            .map(|j| 40.0 / (j + 1) as f64 * rng.standard_normal())
            .collect();
        for i in 0..dim {
            let structure: f64 = atoms.iter().zip(&weights).map(|(a, w)| a[i] * w).sum();
            raw[(i, l)] = base[i] + structure + sigma * rng.standard_normal();
        }
    }
    SimilarityGroup::from_columns(raw, vec![(0, 0); m], d).expect("dimensions are consistent")
}

/// Outcome of one oracle comparison on a matrix.
pub enum OracleCheck {
    Agree(f64),
    Disagree(f64),
    /// `√μ` lies within [`TIE_EXCLUSION`] of a singular value.
    Tie,
}

/// Compares `hard_threshold_svd(y, skew·√μ)` with `rank_min_oracle(y, μ)`.
pub fn check_oracle(y: &Matrix, root_mu: f64, skew: f64) -> Result<OracleCheck> {
    let wide = if y.rows() <= y.cols() {
        y.clone()
    } else {
        y.transpose()
    };
    let singular = svd(&wide)?.singular;
    if singular
        .iter()
        .any(|s| (s - root_mu).abs() <= TIE_EXCLUSION)
    {
        return Ok(OracleCheck::Tie);
    }
    let (oracle, _) = rank_min_oracle(&wide, root_mu * root_mu)?;
    let hard = hard_threshold_svd(&wide, root_mu * skew)?;
    let dev = oracle.max_abs_diff(&hard);
    Ok(if dev <= ORACLE_TOL {
        OracleCheck::Agree(dev)
    } else {
        OracleCheck::Disagree(dev)
    })
}

/// One tally entry per random matrix, each tested at every level of [`MU_LEVELS`].
pub fn oracle_suite(options: &VerifyOptions) -> Result<Tally> {
    let mut rng = SplitMix64::new(options.seed);
    let mut tally = Tally::default();
    for _ in 0..options.trials {
        let y = random_small_matrix(&mut rng);
        let smax = svd(&y)?.singular[0];
        let mut ok = true;
        let mut worst = 0.0f64;
        for q in MU_LEVELS {
            match check_oracle(&y, q * smax, options.threshold_skew)? {
                OracleCheck::Agree(dev) => worst = worst.max(dev),
                OracleCheck::Disagree(dev) => {
                    ok = false;
                    worst = worst.max(dev);
                }
                OracleCheck::Tie => tally.skipped += 1,
            }
        }
        tally.record(ok, worst);
    }
    Ok(tally)
}

/// PCA versus SVD group estimates on random 49 × 245 groups at `t = 1.5·20`.
pub fn path_suite(options: &VerifyOptions) -> Result<Tally> {
    let mut rng = SplitMix64::new(options.seed ^ 0x7061_7468);
    let (sigma, t) = (20.0, 30.0);
    let mut tally = Tally::default();
    for _ in 0..options.trials {
        let group = random_group(&mut rng, 7, 245, sigma);
        let pca = denoise_group_pca(&group, t * options.threshold_skew)?;
        let svd = denoise_group_svd(&group, t)?;
        let dev = pca.matrix.max_abs_diff(&svd.matrix);
        tally.record(dev <= PATH_TOL, dev);
    }
    Ok(tally)
}

/// Largest relative deviation of the variance identity over all components of a group.
pub fn variance_identity_deviation(group: &SimilarityGroup) -> Result<f64> {
    let basis = group_basis(group)?;
    let variances = coefficient_variances(group, &basis)?;
    let m = group.len() as f64;
    let floor = basis.eigenvalues.first().copied().unwrap_or(0.0) / m * f64::EPSILON;
    Ok(variances
        .iter()
        .zip(&basis.eigenvalues)
        .map(|(v, l)| {
            let expected = l / m;
            (v - expected).abs() / expected.max(floor).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max))
}

pub fn variance_suite(options: &VerifyOptions) -> Result<Tally> {
    let mut rng = SplitMix64::new(options.seed ^ 0x7661_7269);
    let mut tally = Tally::default();
    for _ in 0..options.trials {
        let group = random_group(&mut rng, 7, 245, 20.0);
        let dev = variance_identity_deviation(&group)?;
        tally.record(dev <= VARIANCE_TOL, dev);
    }
    Ok(tally)
}

pub fn run_verify(options: &VerifyOptions) -> Result<VerifyReport> {
    Ok(VerifyReport {
        oracle: oracle_suite(options)?,
        paths: path_suite(options)?,
        variance: variance_suite(options)?,
    })
}
