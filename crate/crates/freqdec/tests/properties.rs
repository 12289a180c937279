//! Randomized property tests for the library-wide invariants: perfect
//! reconstruction, linearity, shift covariance, scale invariance of the
//! spectral entropy, Fisher permutation equivariance, metric symmetry, and
//! the raw container round trip.

use freqdec::alc::{accumulate_fisher, init_alc};
use freqdec::dtcwt::{dtcwt_level1, idtcwt_level1};
use freqdec::dwt::{dwt2_level1, idwt2_level1};
use freqdec::filterbank::FilterBank1D;
use freqdec::io::{read_raw_from, write_raw_to, ChannelVolume, LabelVolume, Volume3D};
use freqdec::metrics::{dice_score, freq_entropy, ssim};
use freqdec::nsct::{nsct_decompose, NsctConfig};
use freqdec::Plane;
use proptest::prelude::*;

fn plane_strategy(max: usize) -> impl Strategy<Value = Plane> {
    (4usize..=max / 2, 4usize..=max / 2, any::<u64>()).prop_map(|(hh, hw, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(2 * hh, 2 * hw, |_, _| rng.gen_range(-1.0..1.0))
    })
}

fn volume_strategy() -> impl Strategy<Value = Volume3D> {
    (2usize..=4, 2usize..=4, 2usize..=4, any::<u64>()).prop_map(|(d, h, w, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = d * h * w;
        Volume3D::from_vec((d, h, w), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dwt_and_dtcwt_reconstruct(img in plane_strategy(24)) {
        let bank = FilterBank1D::dtcwt_13_19();
        let rec = idwt2_level1(&dwt2_level1(&img, &bank).unwrap(), &bank).unwrap();
        prop_assert!(rec.max_abs_diff(&img) < 1e-9);
        let rec = idtcwt_level1(&dtcwt_level1(&img).unwrap()).unwrap();
        prop_assert!(rec.max_abs_diff(&img) < 1e-9);
    }

    #[test]
    fn nsct_reconstructs_and_is_linear(img in plane_strategy(20), s in -3.0f64..3.0) {
        let cfg = NsctConfig::default();
        let dec = nsct_decompose(&img, cfg).unwrap();
        let rec = freqdec::nsct::nsct_reconstruct(&dec, cfg).unwrap();
        prop_assert!(rec.max_abs_diff(&img) < 1e-9);
        // linearity: decomposing s * img scales every subband by s
        let dec_s = nsct_decompose(&img.scale(s), cfg).unwrap();
        prop_assert!(dec_s.lowpass.max_abs_diff(&dec.lowpass.scale(s)) < 1e-9);
        for (lv, lv_s) in dec.bands.iter().zip(&dec_s.bands) {
            for (b, b_s) in lv.iter().zip(lv_s) {
                prop_assert!(b_s.max_abs_diff(&b.scale(s)) < 1e-9);
            }
        }
    }

    #[test]
    fn nsct_commutes_with_shifts(img in plane_strategy(16), dy in 0isize..8, dx in 0isize..8) {
        let cfg = NsctConfig::new(1, 2).unwrap();
        let direct = nsct_decompose(&img.circshift(dy, dx), cfg).unwrap();
        let shifted = nsct_decompose(&img, cfg).unwrap();
        prop_assert!(direct.lowpass.max_abs_diff(&shifted.lowpass.circshift(dy, dx)) < 1e-9);
        for (b, sb) in direct.bands[0].iter().zip(&shifted.bands[0]) {
            prop_assert!(b.max_abs_diff(&sb.circshift(dy, dx)) < 1e-9);
        }
    }

    #[test]
    fn entropy_is_scale_invariant(vol in volume_strategy(), s in 1e-3f64..1e3) {
        let e = freq_entropy(&vol).unwrap();
        let e_s = freq_entropy(&vol.map(|v| v * s)).unwrap();
        prop_assert!((e - e_s).abs() < 1e-9);
    }

    #[test]
    fn fisher_is_permutation_equivariant(seed in any::<u64>(), n_seq in 2usize..6) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grads: Vec<Vec<f64>> = (0..n_seq)
            .map(|_| (0..27).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let mut fwd = init_alc(1, 1, (3, 3, 3)).unwrap();
        let mut rev = init_alc(1, 1, (3, 3, 3)).unwrap();
        for g in &grads {
            accumulate_fisher(&mut fwd, g).unwrap();
        }
        for g in grads.iter().rev() {
            accumulate_fisher(&mut rev, g).unwrap();
        }
        for (a, b) in fwd.fisher.iter().zip(&rev.fisher) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_container_round_trips(vol in volume_strategy(), c in 1usize..4) {
        // storage is f32; writing once quantizes, a second pass is exact
        let cv = ChannelVolume::new(vec![vol; c]).unwrap();
        let mut buf = Vec::new();
        write_raw_to(&cv, &mut buf).unwrap();
        let once = read_raw_from(&mut buf.as_slice()).unwrap();
        let mut buf2 = Vec::new();
        write_raw_to(&once, &mut buf2).unwrap();
        let twice = read_raw_from(&mut buf2.as_slice()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.dims(), cv.dims());
        for (a, b) in once.channels[0].data.iter().zip(&cv.channels[0].data) {
            prop_assert!((a - b).abs() <= (b.abs() + 1.0) * f32::EPSILON as f64);
        }
    }

    #[test]
    fn metric_symmetry(a in plane_strategy(16), seed in any::<u64>()) {
        let b = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Plane::from_fn(a.h, a.w, |_, _| rng.gen_range(-1.0..1.0))
        };
        let xy = ssim(&a, &b).unwrap();
        let yx = ssim(&b, &a).unwrap();
        prop_assert!((xy - yx).abs() < 1e-12);
    }

    #[test]
    fn dice_symmetry(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dims = (4, 4, 4);
        let la: Vec<u16> = (0..64).map(|_| rng.gen_range(0..3u16)).collect();
        let lb: Vec<u16> = (0..64).map(|_| rng.gen_range(0..3u16)).collect();
        let a = LabelVolume::new(dims, 3, la).unwrap();
        let b = LabelVolume::new(dims, 3, lb).unwrap();
        for cls in 0..3 {
            prop_assert_eq!(
                dice_score(&a, &b, cls).unwrap(),
                dice_score(&b, &a, cls).unwrap()
            );
        }
    }
}
