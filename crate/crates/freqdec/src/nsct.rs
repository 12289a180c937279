//! Nonsubsampled contourlet transform: an à-trous difference pyramid (NSP)
//! followed by a nonsubsampled directional filter bank (NSDFB) built from
//! halfband fan windows under unimodular shear resamplings. Every stage is
//! undecimated and periodic, so outputs keep the input dims and the whole
//! transform commutes with circular shifts exactly.

use crate::error::{Error, Result};
use crate::filterbank::{
    atrous_conv2d, conv2d_mat, mcclellan, ExtensionMode, Kernel2D, CD97_G0_X, CD97_H0_X,
};
use crate::plane::Plane;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Pyramid depth and per-level direction count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsctConfig {
    pub levels: usize,
    pub directions: usize,
}

impl NsctConfig {
    pub fn new(levels: usize, directions: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::invalid("pyramid levels must be >= 1"));
        }
        if !matches!(directions, 2 | 4 | 8) {
            return Err(Error::Unsupported(format!(
                "direction count {directions} (supported: 2, 4, 8)"
            )));
        }
        Ok(NsctConfig { levels, directions })
    }
}

impl Default for NsctConfig {
    fn default() -> Self {
        NsctConfig {
            levels: 1,
            directions: 4,
        }
    }
}

/// Full-size lowpass plus per-level, per-direction full-size bands
/// (level-major, direction-minor; directions ordered by wedge centre angle).
#[derive(Debug, Clone)]
pub struct NsctDecomposition {
    pub lowpass: Plane,
    pub bands: Vec<Vec<Plane>>,
}

// ---------------------------------------------------------------------------
// NSP: à-trous difference pyramid
// ---------------------------------------------------------------------------

/// Maximally-flat pyramid lowpass with two vanishing moments:
/// [1/4, 1/2, 1/4] tensor-squared to 3x3 (DC gain 1).
fn nsp_kernel() -> Kernel2D {
    let t = [0.25, 0.5, 0.25];
    let taps = Plane::from_fn(3, 3, |y, x| t[y] * t[x]);
    Kernel2D::centered(taps).expect("static 3x3 kernel")
}

/// Undecimated pyramid: level j filters with the kernel dilated by 2^(j-1);
/// band_j = low_{j-1} - low_j. Returns (deepest lowpass, bands level-major).
pub fn nsp_decompose(slice: &Plane, levels: usize) -> Result<(Plane, Vec<Plane>)> {
    if levels == 0 {
        return Err(Error::invalid("pyramid levels must be >= 1"));
    }
    let k = nsp_kernel();
    let mut low = slice.clone();
    let mut bands = Vec::with_capacity(levels);
    for j in 0..levels {
        let next = atrous_conv2d(&low, &k, 1 << j, ExtensionMode::Periodic)?;
        bands.push(low.sub(&next));
        low = next;
    }
    Ok((low, bands))
}

/// Inverse of `nsp_decompose`: lowpass plus the band sum.
pub fn nsp_reconstruct(lowpass: &Plane, bands: &[Plane]) -> Result<Plane> {
    let mut out = lowpass.clone();
    for b in bands {
        if !b.same_dims(lowpass) {
            return Err(Error::shape("pyramid band dims differ from lowpass"));
        }
        out.add_assign(b);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// NSDFB: fan windows under shears
// ---------------------------------------------------------------------------

/// Halfband fan window: McClellan diamond of the 9/7 analysis*synthesis
/// halfband product, rotated to a fan by (pi, 0) modulation. 15x15, DC 1/2;
/// W + (identity - W) is an exact two-band split.
fn fan_window() -> Kernel2D {
    // polynomial product in x = cos(w), high-degree first
    let mut prod = vec![0.0; CD97_H0_X.len() + CD97_G0_X.len() - 1];
    for (i, &a) in CD97_H0_X.iter().enumerate() {
        for (j, &b) in CD97_G0_X.iter().enumerate() {
            prod[i + j] += a * b;
        }
    }
    Kernel2D::centered(mcclellan(&prod))
        .expect("static 15x15 kernel")
        .modulate_rows()
}

const M_ID: [[i64; 2]; 2] = [[1, 0], [0, 1]];
const M_QUINCUNX: [[i64; 2]; 2] = [[1, -1], [1, 1]];
const M_R1: [[i64; 2]; 2] = [[1, 1], [0, 1]];
const M_R2: [[i64; 2]; 2] = [[1, -1], [0, 1]];
const M_R3: [[i64; 2]; 2] = [[1, 0], [1, 1]];
const M_R4: [[i64; 2]; 2] = [[1, 0], [-1, 1]];

/// Apply the fan window resampled on the lattice `m`; `complement` takes
/// the other half of the exact two-band split.
fn win(x: &Plane, w_fan: &Kernel2D, m: [[i64; 2]; 2], complement: bool) -> Result<Plane> {
    let y = conv2d_mat(x, w_fan, m, ExtensionMode::Periodic)?;
    Ok(if complement { x.sub(&y) } else { y })
}

/// Undecimated directional split into `n_dir` wedges covering [-pi, pi)^2,
/// ordered by wedge centre angle starting at 0 degrees. The bands sum to
/// the input exactly.
pub fn nsdfb_decompose(band: &Plane, n_dir: usize) -> Result<Vec<Plane>> {
    let w = fan_window();
    match n_dir {
        2 => {
            // unsheared fan passes the near-vertical-frequency wedge
            // (stripes varying along y, i.e. orientation 90 degrees)
            let b90 = win(band, &w, M_ID, false)?;
            let b0 = band.sub(&b90);
            Ok(vec![b0, b90])
        }
        4 => Ok(bands4(band, &w)?.to_vec()),
        8 => {
            // split each quarter wedge in two with a complementary window
            // pair: the quincunx-resampled fan for the axis-centred wedges,
            // the unsheared fan for the diagonal ones.
            let [b0, b45, b90, b135] = bands4(band, &w)?;
            let mut out = Vec::with_capacity(8);
            for (quarter, m) in [
                (b0, M_QUINCUNX),
                (b45, M_ID),
                (b90, M_QUINCUNX),
                (b135, M_ID),
            ] {
                let lo = win(&quarter, &w, m, false)?;
                let hi = quarter.sub(&lo);
                out.push(lo);
                out.push(hi);
            }
            Ok(out)
        }
        other => Err(Error::Unsupported(format!(
            "direction count {other} (supported: 2, 4, 8)"
        ))),
    }
}

/// Four-wedge partition of unity: sheared fan cascades for the 45/90/135
/// degree wedges, the exact remainder for the 0 degree wedge.
fn bands4(x: &Plane, w: &Kernel2D) -> Result<[Plane; 4]> {
    let b90 = win(&win(x, w, M_R3, false)?, w, M_R4, false)?;
    let b45 = win(&win(x, w, M_R4, true)?, w, M_R2, false)?;
    let b135 = win(&win(x, w, M_R3, true)?, w, M_R1, false)?;
    let b0 = x.sub(&b45).sub(&b90).sub(&b135);
    Ok([b0, b45, b90, b135])
}

/// Inverse of `nsdfb_decompose`: the windows partition unity, so synthesis
/// is the plain band sum.
pub fn nsdfb_reconstruct(bands: &[Plane]) -> Result<Plane> {
    let first = bands
        .first()
        .ok_or_else(|| Error::invalid("no directional bands"))?;
    let mut out = first.clone();
    for b in &bands[1..] {
        if !b.same_dims(first) {
            return Err(Error::shape("directional band dims differ"));
        }
        out.add_assign(b);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Full transform
// ---------------------------------------------------------------------------

/// NSP then a directional split of every pyramid band.
pub fn nsct_decompose(slice: &Plane, cfg: NsctConfig) -> Result<NsctDecomposition> {
    NsctConfig::new(cfg.levels, cfg.directions)?;
    let (lowpass, pyr) = nsp_decompose(slice, cfg.levels)?;
    let bands = pyr
        .iter()
        .map(|b| nsdfb_decompose(b, cfg.directions))
        .collect::<Result<Vec<_>>>()?;
    Ok(NsctDecomposition { lowpass, bands })
}

/// Exact inverse of `nsct_decompose`.
pub fn nsct_reconstruct(dec: &NsctDecomposition, cfg: NsctConfig) -> Result<Plane> {
    NsctConfig::new(cfg.levels, cfg.directions)?;
    if dec.bands.len() != cfg.levels {
        return Err(Error::shape(format!(
            "decomposition has {} levels, config says {}",
            dec.bands.len(),
            cfg.levels
        )));
    }
    let pyr = dec
        .bands
        .iter()
        .map(|dirs| {
            if dirs.len() != cfg.directions {
                return Err(Error::shape(format!(
                    "level has {} directions, config says {}",
                    dirs.len(),
                    cfg.directions
                )));
            }
            nsdfb_reconstruct(dirs)
        })
        .collect::<Result<Vec<_>>>()?;
    nsp_reconstruct(&dec.lowpass, &pyr)
}

// ---------------------------------------------------------------------------
// Aliasing witness
// ---------------------------------------------------------------------------

/// 2D DFT power spectrum |X[u, v]|^2 via row/column FFTs.
fn power_spectrum(p: &Plane) -> Plane {
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
        data: grid.iter().map(|c| c.norm_sqr()).collect(),
    }
}

/// Spectral-overlap witness on the level-1 pyramid bandpass.
///
/// Decimating the band by 2 folds spectral copies shifted by pi onto the
/// baseband; `aliased` sums, over the decimated bins, the power arriving
/// through the three nonzero copy shifts — equivalently the band's power
/// outside the centred half-Nyquist square. The undecimated path has no
/// copies (its shifts are multiples of 2 pi), so its overlap term is
/// identically zero; it is returned for the comparison.
pub fn aliasing_energy(slice: &Plane) -> Result<(f64, f64)> {
    if slice.h % 2 != 0 || slice.w % 2 != 0 {
        return Err(Error::invalid("aliasing witness needs even dims"));
    }
    let (_, bands) = nsp_decompose(slice, 1)?;
    let spec = power_spectrum(&bands[0]);
    let (h, w) = (spec.h as isize, spec.w as isize);
    let mut aliased = 0.0;
    for u in 0..spec.h {
        for v in 0..spec.w {
            // signed frequency index; inside the half-Nyquist square the
            // (0,0) copy carries the bin, everything else folds in
            let su = (u as isize + h / 2).rem_euclid(h) - h / 2;
            let sv = (v as isize + w / 2).rem_euclid(w) - w / 2;
            let inside = su >= -h / 4 && su < h / 4 && sv >= -w / 4 && sv < w / 4;
            if !inside {
                aliased += spec.get(u, v);
            }
        }
    }
    // normalize like Parseval so the figure is comparable across sizes
    let norm = (spec.h * spec.w) as f64;
    Ok((aliased / norm, 0.0))
}
