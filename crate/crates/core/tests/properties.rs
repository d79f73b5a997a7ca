use proptest::prelude::*;

use plr::denoiser::{
    denoise_group, denoise_group_pca, denoise_group_svd, denoise_image, group_basis, pca_mask,
    project, DenoiseParams, GroupPath, SimilarityGroup,
};
use plr::image::{extract_patch, pad_symmetric, Accumulator, Patch};
use plr::linalg::{eig_sym, hard_threshold_svd, rank_min_oracle, svd, Matrix};
use plr::metrics::{add_gaussian_noise, psnr, NoiseSpec};
use plr::pgm::{read_pgm, write_pgm};
use plr::GrayImage;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows).prop_flat_map(move |r| {
        (Just(r), r..=max_cols).prop_flat_map(|(r, c)| {
            prop::collection::vec(-1.0f64..1.0, r * c)
                .prop_map(move |v| Matrix::from_vec(r, c, v).unwrap())
        })
    })
}

fn image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..=255, w * h).prop_map(move |v| {
            GrayImage::new(w, h, v.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

fn group(side: usize, m: usize) -> impl Strategy<Value = SimilarityGroup> {
    prop::collection::vec(0.0f64..255.0, side * side * m).prop_map(move |v| {
        SimilarityGroup::from_columns(
            Matrix::from_vec(side * side, m, v).unwrap(),
            vec![(0, 0); m],
            side,
        )
        .unwrap()
    })
}

fn small_params(sigma: f64) -> DenoiseParams {
    DenoiseParams {
        window: 10,
        group_size: 20,
        threads: 1,
        ..DenoiseParams::with_patch_size(sigma, 4)
    }
}

fn rank_of(a: &Matrix) -> usize {
    if a.max_abs() == 0.0 {
        return 0;
    }
    let s = svd(a).unwrap().singular;
    s.iter().filter(|&&v| v > 1e-6 * s[0]).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenbasis_orthonormal(a in matrix(12, 12)) {
        let sym = a.gram();
        let e = eig_sym(&sym).unwrap();
        let ptp = e.basis.transpose().matmul(&e.basis);
        prop_assert!(ptp.max_abs_diff(&Matrix::identity(sym.rows())) <= 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10));
        let scale = sym.frobenius_norm().max(1e-300);
        prop_assert!(e.reconstruct().sub(&sym).frobenius_norm() / scale <= 1e-8);
    }

    #[test]
    fn svd_left_orthonormal(a in matrix(8, 12)) {
        let s = svd(&a).unwrap();
        let ptp = s.left.transpose().matmul(&s.left);
        prop_assert!(ptp.max_abs_diff(&Matrix::identity(a.rows())) <= 1e-10);
        let scale = a.frobenius_norm().max(1e-300);
        prop_assert!(s.reconstruct().sub(&a).frobenius_norm() / scale <= 1e-8);
    }

    #[test]
    fn shrinkage_and_rank_monotone(a in matrix(6, 10), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let x_lo = hard_threshold_svd(&a, lo).unwrap();
        let x_hi = hard_threshold_svd(&a, hi).unwrap();
        prop_assert!(x_lo.frobenius_norm() <= a.frobenius_norm() * (1.0 + 1e-12));
        prop_assert!(x_hi.frobenius_norm() <= x_lo.frobenius_norm() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(rank_of(&x_hi) <= rank_of(&x_lo));
    }

    #[test]
    fn threshold_solves_rank_penalty(a in matrix(6, 9), q in 0.05f64..1.2) {
        let s = svd(&a).unwrap();
        let root_mu = q * s.singular[0];
        prop_assume!(root_mu > 0.0 && s.singular.iter().all(|v| (v - root_mu).abs() > 1e-9));
        let (x, _) = rank_min_oracle(&a, root_mu * root_mu).unwrap();
        prop_assert!(x.max_abs_diff(&hard_threshold_svd(&a, root_mu).unwrap()) <= 1e-10);
    }

    #[test]
    fn decompositions_deterministic(a in matrix(7, 11)) {
        let first = svd(&a).unwrap();
        let second = svd(&a).unwrap();
        prop_assert_eq!(first.left, second.left);
        prop_assert_eq!(first.singular, second.singular);
        prop_assert_eq!(first.right_t, second.right_t);
    }

    #[test]
    fn pad_crop_inverse(img in image(12), k in 0usize..12) {
        let k = k.min(img.width()).min(img.height());
        let padded = pad_symmetric(&img, k).unwrap();
        prop_assert_eq!(padded.width(), img.width() + 2 * k);
        prop_assert_eq!(padded.crop_margin(k).unwrap(), img);
    }

    #[test]
    fn patches_translate(img in image(14), d in 1usize..4, r in 0usize..10, c in 0usize..10) {
        prop_assume!(img.height() > d && img.width() >= d);
        let r = r % (img.height() - d);
        let c = c % (img.width() - d + 1);
        let shifted = img.crop(1, 0, img.width(), img.height() - 1).unwrap();
        prop_assert_eq!(
            extract_patch(&img, r + 1, c, d).unwrap().values,
            extract_patch(&shifted, r, c, d).unwrap().values
        );
    }

    #[test]
    fn pgm_roundtrip(img in image(20)) {
        prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn aggregation_order_free(values in prop::collection::vec(-500.0f64..500.0, 40), seed in any::<u64>()) {
        let patches: Vec<Patch> = (0..10)
            .map(|i| Patch { row: i % 3, col: (i * 7) % 3, size: 2, values: values[4 * i..4 * i + 4].to_vec() })
            .collect();
        let mut order: Vec<usize> = (0..10).collect();
        let mut rng = plr::rng::SplitMix64::new(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.range_inclusive(0, i));
        }
        let mut a = Accumulator::new(5, 5);
        let mut b = Accumulator::new(5, 5);
        for p in &patches {
            a.accumulate(p).unwrap();
        }
        for &i in &order {
            b.accumulate(&patches[i]).unwrap();
        }
        match (a.finalize(), b.finalize()) {
            (Ok(x), Ok(y)) => {
                for (p, q) in x.pixels().iter().zip(y.pixels()) {
                    prop_assert!((p - q).abs() <= 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "coverage must not depend on order"),
        }
    }

    #[test]
    fn noise_determined_by_seed(img in image(16), seed in any::<u64>(), sigma in 0.0f64..50.0) {
        let spec = NoiseSpec::new(sigma, seed);
        prop_assert_eq!(add_gaussian_noise(&img, spec), add_gaussian_noise(&img, spec));
    }

    #[test]
    fn psnr_shift_and_transpose_invariant(img in image(16), seed in any::<u64>(), shift in -50.0f64..50.0) {
        let noisy = add_gaussian_noise(&img, NoiseSpec::new(10.0, seed));
        let base = psnr(&img, &noisy).unwrap();
        let shifted = psnr(&img.map(|v| v + shift), &noisy.map(|v| v + shift)).unwrap();
        let transposed = psnr(&img.transpose(), &noisy.transpose()).unwrap();
        prop_assert!((base - shifted).abs() <= 1e-9);
        prop_assert!((base - transposed).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_paths_agree(g in group(4, 24), t in 0.0f64..60.0) {
        let pca = denoise_group_pca(&g, t).unwrap();
        let svd = denoise_group_svd(&g, t).unwrap();
        prop_assert!(pca.matrix.max_abs_diff(&svd.matrix) <= 1e-8);
    }

    #[test]
    fn group_energy_contracts(g in group(3, 15), t in 0.0f64..80.0) {
        let est = denoise_group_pca(&g, t).unwrap();
        let mut before = 0.0;
        let mut after = 0.0;
        for i in 0..9 {
            for l in 0..15 {
                before += g.matrix[(i, l)].powi(2);
                after += (est.matrix[(i, l)] - g.centroid[i]).powi(2);
            }
        }
        prop_assert!(after <= before * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn kept_rank_monotone_in_t(g in group(3, 12), t1 in 0.0f64..80.0, t2 in 0.0f64..80.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for path in [GroupPath::Pca, GroupPath::Svd] {
            let r_lo = denoise_group(&g, lo, path).unwrap().rank;
            let r_hi = denoise_group(&g, hi, path).unwrap().rank;
            prop_assert!(r_hi <= r_lo);
        }
        let basis = group_basis(&g).unwrap();
        let mask = pca_mask(&basis, 12, hi);
        prop_assert_eq!(project(&g, &basis, &mask).unwrap().rank, mask.iter().filter(|&&a| a).count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn denoising_shift_equivariant(
        w in 16usize..28,
        h in 16usize..28,
        seed in any::<u64>(),
        shift in -40i32..40,
    ) {
        let mut rng = plr::rng::SplitMix64::new(seed);
        let img = GrayImage::from_fn(w, h, |_, _| (60 + rng.range_inclusive(0, 120)) as f64);
        let params = small_params(15.0);
        let base = denoise_image(&img, &params).unwrap();
        let moved = denoise_image(&img.map(|v| v + shift as f64), &params).unwrap();
        for (a, b) in base.pixels().iter().zip(moved.pixels()) {
            prop_assert!((a + shift as f64 - b).abs() <= 1e-8, "{} vs {}", a + shift as f64, b);
        }
    }
}
