//! Single-level 2D discrete wavelet transform (periodized), the baseline
//! decomposition and the shift-variance foil for the dual-tree transform.

use crate::error::{Error, Result};
use crate::filterbank::{
    analysis_rows, conv1d_axis, decimate_rows, synthesis_rows, upsample_rows, ExtensionMode,
    FilterBank1D,
};
use crate::plane::Plane;

/// Level-1 subbands. First letter = row (vertical) filter, second = column
/// (horizontal) filter. Original dims are kept so odd inputs (padded to even
/// by edge replication) invert exactly.
#[derive(Debug, Clone)]
pub struct Subbands2D {
    pub ll: Plane,
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
    pub orig_dims: (usize, usize),
}

fn pad_to_even(slice: &Plane) -> Plane {
    let h = slice.h + slice.h % 2;
    let w = slice.w + slice.w % 2;
    if (h, w) == (slice.h, slice.w) {
        return slice.clone();
    }
    Plane::from_fn(h, w, |y, x| slice.get(y.min(slice.h - 1), x.min(slice.w - 1)))
}

/// Single-level 2D DWT with the given bank (periodized, phase-0 decimation).
pub fn dwt2_level1(slice: &Plane, bank: &FilterBank1D) -> Result<Subbands2D> {
    if slice.h == 0 || slice.w == 0 {
        return Err(Error::invalid("empty input"));
    }
    let orig_dims = (slice.h, slice.w);
    let p = pad_to_even(slice);
    // columns first (x axis), then rows
    let (lo, hi) = analysis_rows(&p, bank, 0);
    let split_rows = |img: &Plane| -> (Plane, Plane) {
        let l = conv1d_axis(img, &bank.analysis_lo, 0, ExtensionMode::Periodic);
        let h = conv1d_axis(img, &bank.analysis_hi, 0, ExtensionMode::Periodic);
        (decimate_rows(&l, 0), decimate_rows(&h, 0))
    };
    let (ll, hl) = split_rows(&lo);
    let (lh, hh) = split_rows(&hi);
    Ok(Subbands2D {
        ll,
        lh,
        hl,
        hh,
        orig_dims,
    })
}

/// Inverse of `dwt2_level1`; crops back to the recorded original dims.
pub fn idwt2_level1(sub: &Subbands2D, bank: &FilterBank1D) -> Result<Plane> {
    let (hh2, ww2) = (sub.ll.h, sub.ll.w);
    for (name, p) in [("lh", &sub.lh), ("hl", &sub.hl), ("hh", &sub.hh)] {
        if p.h != hh2 || p.w != ww2 {
            return Err(Error::shape(format!("subband {name} size mismatch")));
        }
    }
    let (ph, pw) = (2 * hh2, 2 * ww2);
    let merge_rows = |lo: &Plane, hi: &Plane| -> Plane {
        let ul = upsample_rows(lo, ph, 0);
        let uh = upsample_rows(hi, ph, 0);
        conv1d_axis(&ul, &bank.synthesis_lo, 0, ExtensionMode::Periodic).axpy(
            1.0,
            &conv1d_axis(&uh, &bank.synthesis_hi, 0, ExtensionMode::Periodic),
        )
    };
    let lo = merge_rows(&sub.ll, &sub.hl);
    let hi = merge_rows(&sub.lh, &sub.hh);
    let full = synthesis_rows(&lo, &hi, bank, pw, 0);
    let (oh, ow) = sub.orig_dims;
    if (oh, ow) == (full.h, full.w) {
        Ok(full)
    } else {
        Ok(Plane::from_fn(oh, ow, |y, x| full.get(y, x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_plane(h: usize, w: usize, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(h, w, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn constant_image_haar() {
        let c = 0.7;
        let img = Plane::from_fn(16, 16, |_, _| c);
        let sub = dwt2_level1(&img, &FilterBank1D::haar()).unwrap();
        for &v in &sub.ll.data {
            assert!((v - 2.0 * c).abs() < 1e-12);
        }
        for band in [&sub.lh, &sub.hl, &sub.hh] {
            for &v in &band.data {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn impulse_response_matches_tensor_taps() {
        // delta at an even position: each subband holds the 2D tensor filter
        // taps at the co-located (decimated) position.
        let mut img = Plane::zeros(16, 16);
        img.set(8, 8, 1.0);
        let bank = FilterBank1D::haar();
        let sub = dwt2_level1(&img, &bank).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // analysis Haar lowpass taps at n=0,1; highpass h1[n] = (-1)^(n-1) g0[n-1]
        // lands at n in {0,1} with taps (-s, s).
        assert!((sub.ll.get(4, 4) - s * s).abs() < 1e-12);
        assert!((sub.hl.get(4, 4) - (-s) * s).abs() < 1e-12);
        assert!((sub.lh.get(4, 4) - s * (-s)).abs() < 1e-12);
        assert!((sub.hh.get(4, 4) - s * s).abs() < 1e-12);
    }

    #[test]
    fn round_trip_haar_16() {
        let img = rand_plane(16, 16, 1);
        let bank = FilterBank1D::haar();
        let rec = idwt2_level1(&dwt2_level1(&img, &bank).unwrap(), &bank).unwrap();
        assert!(rec.max_abs_diff(&img) < 1e-10);
    }

    #[test]
    fn round_trip_13_19_and_odd_dims() {
        let bank = FilterBank1D::dtcwt_13_19();
        let img = rand_plane(32, 32, 2);
        let rec = idwt2_level1(&dwt2_level1(&img, &bank).unwrap(), &bank).unwrap();
        assert!(rec.max_abs_diff(&img) < 1e-10);
        // odd dims: padded forward, cropped inverse; interior agrees exactly
        let odd = rand_plane(15, 17, 3);
        let rec = idwt2_level1(&dwt2_level1(&odd, &FilterBank1D::haar()).unwrap(), &FilterBank1D::haar())
            .unwrap();
        assert_eq!((rec.h, rec.w), (15, 17));
        assert!(rec.max_abs_diff(&odd) < 1e-10);
    }

    #[test]
    fn zero_subbands_give_zero_image() {
        let sub = Subbands2D {
            ll: Plane::zeros(8, 8),
            lh: Plane::zeros(8, 8),
            hl: Plane::zeros(8, 8),
            hh: Plane::zeros(8, 8),
            orig_dims: (16, 16),
        };
        let rec = idwt2_level1(&sub, &FilterBank1D::haar()).unwrap();
        assert!(rec.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval_orthonormal_haar() {
        let img = rand_plane(32, 32, 4);
        let sub = dwt2_level1(&img, &FilterBank1D::haar()).unwrap();
        let e = sub.ll.energy() + sub.lh.energy() + sub.hl.energy() + sub.hh.energy();
        assert!((e - img.energy()).abs() < 1e-9);
    }

    #[test]
    fn shift_variance_witness_on_stripes() {
        // half-Nyquist stripes: some 1-pixel shift changes LL energy by more
        // than 1% (the defect the dual-tree transform fixes)
        let mm = crate::io::make_phantom(
            crate::io::PhantomKind::OrientedStripes(0.0),
            (16, 32, 32),
            1,
        )
        .unwrap();
        let img = mm.modalities[0].1.slice(8);
        let bank = FilterBank1D::haar();
        let e0 = dwt2_level1(&img, &bank).unwrap().ll.energy();
        let worst = [(0isize, 1isize), (0, -1), (1, 0), (-1, 0)]
            .iter()
            .map(|&(dy, dx)| {
                let e = dwt2_level1(&img.circshift(dy, dx), &bank).unwrap().ll.energy();
                (e - e0).abs() / e0
            })
            .fold(0.0, f64::max);
        assert!(worst > 0.01, "best relative change {worst}");
    }

    #[test]
    fn size_mismatch_rejected() {
        let sub = Subbands2D {
            ll: Plane::zeros(8, 8),
            lh: Plane::zeros(8, 7),
            hl: Plane::zeros(8, 8),
            hh: Plane::zeros(8, 8),
            orig_dims: (16, 16),
        };
        assert!(idwt2_level1(&sub, &FilterBank1D::haar()).is_err());
    }
}
