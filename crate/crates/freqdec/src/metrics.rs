//! Analysis and evaluation metrics: SSIM (8x8 uniform sliding window),
//! frequency-domain entropy E, shift-invariance score S over log-amplitude
//! spectra, Dice score, and HD95 surface distance.

use crate::error::{Error, Result};
use crate::io::{LabelVolume, Volume3D};
use crate::plane::Plane;
use num_complex::Complex64;
use rustfft::FftPlanner;

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

const SSIM_WIN: usize = 8;

/// All 8x8 window sums of `a` at unit stride, via a double cumulative sum.
fn window_sums(a: &Plane) -> Plane {
    let (h, w) = (a.h, a.w);
    // inclusive 2D prefix sums with a zero border
    let mut c = vec![0.0; (h + 1) * (w + 1)];
    for y in 0..h {
        for x in 0..w {
            c[(y + 1) * (w + 1) + (x + 1)] = a.get(y, x) + c[y * (w + 1) + (x + 1)]
                + c[(y + 1) * (w + 1) + x]
                - c[y * (w + 1) + x];
        }
    }
    let (oh, ow) = (h - SSIM_WIN + 1, w - SSIM_WIN + 1);
    Plane::from_fn(oh, ow, |y, x| {
        c[(y + SSIM_WIN) * (w + 1) + (x + SSIM_WIN)] - c[y * (w + 1) + (x + SSIM_WIN)]
            - c[(y + SSIM_WIN) * (w + 1) + x]
            + c[y * (w + 1) + x]
    })
}

/// Structural similarity with an 8x8 uniform sliding window, stabilizers
/// C1 = (0.01 L)^2 and C2 = (0.03 L)^2, where L is the larger of the two
/// inputs' dynamic ranges (making the metric symmetric). Mean over windows.
pub fn ssim(a: &Plane, b: &Plane) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::shape("ssim inputs differ in dims"));
    }
    if a.h < SSIM_WIN || a.w < SSIM_WIN {
        return Err(Error::invalid("ssim needs dims >= 8x8"));
    }
    let (a_lo, a_hi) = a.min_max();
    let (b_lo, b_hi) = b.min_max();
    let l = (a_hi - a_lo).max(b_hi - b_lo);
    if l == 0.0 {
        // both images constant: identical structure iff identical value
        return Ok(if a.data[0] == b.data[0] { 1.0 } else { 0.0 });
    }
    let c1 = (0.01 * l).powi(2);
    let c2 = (0.03 * l).powi(2);
    let n = (SSIM_WIN * SSIM_WIN) as f64;
    let sa = window_sums(a);
    let sb = window_sums(b);
    let saa = window_sums(&a.map(|v| v * v));
    let sbb = window_sums(&b.map(|v| v * v));
    let ab = Plane {
        h: a.h,
        w: a.w,
        data: a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x * y)
            .collect(),
    };
    let sab = window_sums(&ab);
    let mut acc = 0.0;
    for i in 0..sa.data.len() {
        let mx = sa.data[i] / n;
        let my = sb.data[i] / n;
        let vx = saa.data[i] / n - mx * mx;
        let vy = sbb.data[i] / n - my * my;
        let cxy = sab.data[i] / n - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
            / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(acc / sa.data.len() as f64)
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// 2D DFT amplitude |X[u, v]|.
pub(crate) fn fft2_amplitude(p: &Plane) -> Plane {
    let mut planner = FftPlanner::new();
    let fft_w = planner.plan_fft_forward(p.w);
    let fft_h = planner.plan_fft_forward(p.h);
    let mut grid: Vec<Complex64> = p.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in grid.chunks_exact_mut(p.w) {
        fft_w.process(row);
    }
    let mut col = vec![Complex64::default(); p.h];
    for x in 0..p.w {
        for y in 0..p.h {
            col[y] = grid[y * p.w + x];
        }
        fft_h.process(&mut col);
        for y in 0..p.h {
            grid[y * p.w + x] = col[y];
        }
    }
    Plane {
        h: p.h,
        w: p.w,
        data: grid.iter().map(|c| c.norm()).collect(),
    }
}

/// 3D DFT of a volume (unnormalized, forward when `inverse` is false),
/// flattened in the volume's (z, y, x) layout.
pub(crate) fn fft3(data: &[Complex64], dims: (usize, usize, usize), inverse: bool) -> Vec<Complex64> {
    let (d, h, w) = dims;
    let mut planner = FftPlanner::new();
    let (fft_w, fft_h, fft_d) = if inverse {
        (
            planner.plan_fft_inverse(w),
            planner.plan_fft_inverse(h),
            planner.plan_fft_inverse(d),
        )
    } else {
        (
            planner.plan_fft_forward(w),
            planner.plan_fft_forward(h),
            planner.plan_fft_forward(d),
        )
    };
    let mut grid = data.to_vec();
    for row in grid.chunks_exact_mut(w) {
        fft_w.process(row);
    }
    let mut buf = vec![Complex64::default(); h.max(d)];
    for z in 0..d {
        for x in 0..w {
            for y in 0..h {
                buf[y] = grid[(z * h + y) * w + x];
            }
            fft_h.process(&mut buf[..h]);
            for y in 0..h {
                grid[(z * h + y) * w + x] = buf[y];
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            for z in 0..d {
                buf[z] = grid[(z * h + y) * w + x];
            }
            fft_d.process(&mut buf[..d]);
            for z in 0..d {
                grid[(z * h + y) * w + x] = buf[z];
            }
        }
    }
    grid
}

/// 3D DFT amplitudes of a volume, flattened.
fn fft3_amplitude(vol: &Volume3D) -> Vec<f64> {
    let data: Vec<Complex64> = vol.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft3(&data, vol.dims, false).iter().map(|c| c.norm()).collect()
}

/// Shannon entropy (natural log) of the normalized 3D DFT amplitude
/// spectrum; zero-amplitude bins contribute nothing.
pub fn freq_entropy(vol: &Volume3D) -> Result<f64> {
    let amps = fft3_amplitude(vol);
    let total: f64 = amps.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("frequency entropy of an all-zero volume"));
    }
    Ok(amps
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| {
            let p = a / total;
            -p * p.ln()
        })
        .sum())
}

/// Entropy of a single plane (depth-1 volume).
pub fn freq_entropy_plane(p: &Plane) -> Result<f64> {
    let vol = Volume3D::from_vec((1, p.h, p.w), p.data.clone())?;
    freq_entropy(&vol)
}

fn log_amplitude(p: &Plane) -> Plane {
    fft2_amplitude(p).map(f64::ln_1p)
}

/// Mean SSIM between the log-amplitude spectrum of `rep(img)` and the
/// spectra of `rep` applied to horizontal circular shifts k in [-K, K],
/// k != 0. An ideal shift-invariant representation scores 1.
pub fn shift_invariance_score_of(
    rep: impl Fn(&Plane) -> Result<Plane>,
    img: &Plane,
    k_max: usize,
) -> Result<f64> {
    if k_max == 0 {
        return Err(Error::invalid("shift range K must be >= 1"));
    }
    if img.w <= 2 * k_max {
        return Err(Error::invalid("image narrower than the shift range"));
    }
    let i0 = log_amplitude(&rep(img)?);
    let mut acc = 0.0;
    for k in -(k_max as isize)..=(k_max as isize) {
        if k == 0 {
            continue;
        }
        let ik = log_amplitude(&rep(&img.circshift(0, k))?);
        acc += ssim(&i0, &ik)?;
    }
    Ok(acc / (2 * k_max) as f64)
}

/// `shift_invariance_score_of` with the identity representation. The DFT
/// shift theorem makes this 1 for any image; meaningful values come from
/// derived representations (see `shift_invariance_score_of`).
pub fn shift_invariance_score(img: &Plane, k_max: usize) -> Result<f64> {
    shift_invariance_score_of(|p| Ok(p.clone()), img, k_max)
}

// ---------------------------------------------------------------------------
// Segmentation metrics
// ---------------------------------------------------------------------------

/// Dice overlap of one class, in percent. Two empty masks count as a
/// perfect match (100) by convention.
pub fn dice_score(a: &LabelVolume, b: &LabelVolume, cls: u16) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::shape("dice inputs differ in dims"));
    }
    let ma = a.mask(cls);
    let mb = b.mask(cls);
    let na = ma.iter().filter(|&&v| v).count();
    let nb = mb.iter().filter(|&&v| v).count();
    if na + nb == 0 {
        return Ok(100.0);
    }
    let inter = ma
        .iter()
        .zip(&mb)
        .filter(|&(&x, &y)| x && y)
        .count();
    Ok(100.0 * 2.0 * inter as f64 / (na + nb) as f64)
}

/// Voxel indices on the mask boundary: in-mask voxels with at least one
/// 6-neighbour outside the mask (voxels at the volume edge count).
fn boundary_voxels(mask: &[bool], dims: (usize, usize, usize)) -> Vec<(usize, usize, usize)> {
    let (d, h, w) = dims;
    let idx = |z: usize, y: usize, x: usize| (z * h + y) * w + x;
    let mut out = Vec::new();
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                if !mask[idx(z, y, x)] {
                    continue;
                }
                let exposed = (z == 0 || !mask[idx(z - 1, y, x)])
                    || (z + 1 == d || !mask[idx(z + 1, y, x)])
                    || (y == 0 || !mask[idx(z, y - 1, x)])
                    || (y + 1 == h || !mask[idx(z, y + 1, x)])
                    || (x == 0 || !mask[idx(z, y, x - 1)])
                    || (x + 1 == w || !mask[idx(z, y, x + 1)]);
                if exposed {
                    out.push((z, y, x));
                }
            }
        }
    }
    out
}

/// Linear-interpolated percentile (q in [0, 100]) of an unsorted sample.
fn percentile(mut vals: Vec<f64>, q: f64) -> f64 {
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    if n == 1 {
        return vals[0];
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    vals[lo] * (1.0 - t) + vals[hi] * t
}

/// 95th percentile of the symmetric boundary-to-boundary distance set,
/// Euclidean with anisotropic voxel `spacing` (D, H, W order), in the
/// spacing's units. Brute-force pairwise distances (desk scale).
pub fn hd95(a: &LabelVolume, b: &LabelVolume, cls: u16, spacing: [f64; 3]) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::shape("hd95 inputs differ in dims"));
    }
    let ba = boundary_voxels(&a.mask(cls), a.dims);
    let bb = boundary_voxels(&b.mask(cls), b.dims);
    if ba.is_empty() || bb.is_empty() {
        return Err(Error::invalid("hd95 undefined for an empty mask"));
    }
    let dist = |p: (usize, usize, usize), q: (usize, usize, usize)| -> f64 {
        let dz = (p.0 as f64 - q.0 as f64) * spacing[0];
        let dy = (p.1 as f64 - q.1 as f64) * spacing[1];
        let dx = (p.2 as f64 - q.2 as f64) * spacing[2];
        (dz * dz + dy * dy + dx * dx).sqrt()
    };
    let mut dists = Vec::with_capacity(ba.len() + bb.len());
    for &p in &ba {
        dists.push(
            bb.iter()
                .map(|&q| dist(p, q))
                .fold(f64::INFINITY, f64::min),
        );
    }
    for &q in &bb {
        dists.push(
            ba.iter()
                .map(|&p| dist(p, q))
                .fold(f64::INFINITY, f64::min),
        );
    }
    Ok(percentile(dists, 95.0))
}
