//! Shared convolution primitives: anchored 2D convolution with selectable
//! boundary extension, à-trous (dilated) convolution, integer-matrix
//! (sheared/quincunx) kernel upsampling, 1D filter banks, and the fan filter
//! pair derived from the Cohen–Daubechies 9/7 prototype.

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Boundary handling for convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtensionMode {
    /// Half-sample symmetric: ... x1 x0 | x0 x1 ... xn-1 | xn-1 xn-2 ...
    #[default]
    Symmetric,
    Periodic,
    Zero,
}

/// Map an out-of-range index into [0, n) under the extension mode.
/// Returns `None` for zero extension outside the support.
#[inline]
fn ext_index(mut i: isize, n: usize, mode: ExtensionMode) -> Option<usize> {
    let n = n as isize;
    if i >= 0 && i < n {
        return Some(i as usize);
    }
    match mode {
        ExtensionMode::Zero => None,
        ExtensionMode::Periodic => Some(i.rem_euclid(n) as usize),
        ExtensionMode::Symmetric => {
            // fold over the half-sample mirror until in range
            loop {
                if i < 0 {
                    i = -1 - i;
                } else if i >= n {
                    i = 2 * n - 1 - i;
                } else {
                    return Some(i as usize);
                }
            }
        }
    }
}

/// 2D convolution kernel with an explicit anchor (the tap treated as the
/// origin). Output of a delta input reproduces the taps positioned so the
/// anchor lands on the impulse.
#[derive(Debug, Clone)]
pub struct Kernel2D {
    pub taps: Plane,
    pub anchor: (usize, usize),
}

impl Kernel2D {
    pub fn new(taps: Plane, anchor: (usize, usize)) -> Result<Self> {
        if taps.h == 0 || taps.w == 0 {
            return Err(Error::invalid("empty kernel"));
        }
        if anchor.0 >= taps.h || anchor.1 >= taps.w {
            return Err(Error::invalid("kernel anchor outside taps"));
        }
        if taps.data.iter().any(|t| !t.is_finite()) {
            return Err(Error::Numeric("non-finite kernel tap".into()));
        }
        Ok(Kernel2D { taps, anchor })
    }

    /// Kernel with the anchor at the geometric centre (odd dims expected).
    pub fn centered(taps: Plane) -> Result<Self> {
        let anchor = (taps.h / 2, taps.w / 2);
        Kernel2D::new(taps, anchor)
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.data.iter().sum()
    }

    /// Multiply taps by (-1)^row-offset: shifts the passband by pi along the
    /// row-frequency axis (diamond -> fan).
    pub fn modulate_rows(&self) -> Kernel2D {
        let ay = self.anchor.0 as isize;
        let taps = Plane::from_fn(self.taps.h, self.taps.w, |y, x| {
            let s = if (y as isize - ay).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            s * self.taps.get(y, x)
        });
        Kernel2D {
            taps,
            anchor: self.anchor,
        }
    }

    /// Multiply taps by (-1)^(row+col offset): shifts the passband by
    /// (pi, pi) (lowpass diamond -> highpass diamond).
    pub fn modulate_diag(&self) -> Kernel2D {
        let (ay, ax) = (self.anchor.0 as isize, self.anchor.1 as isize);
        let taps = Plane::from_fn(self.taps.h, self.taps.w, |y, x| {
            let p = (y as isize - ay) + (x as isize - ax);
            let s = if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            s * self.taps.get(y, x)
        });
        Kernel2D {
            taps,
            anchor: self.anchor,
        }
    }

    pub fn scale(&self, s: f64) -> Kernel2D {
        Kernel2D {
            taps: self.taps.scale(s),
            anchor: self.anchor,
        }
    }

    /// Complex frequency response H(w1, w2) sampled on an NxN DFT grid.
    pub fn frequency_response_mag2(&self, n: usize) -> Plane {
        let (ay, ax) = (self.anchor.0 as isize, self.anchor.1 as isize);
        Plane::from_fn(n, n, |u, v| {
            let w1 = 2.0 * std::f64::consts::PI * u as f64 / n as f64;
            let w2 = 2.0 * std::f64::consts::PI * v as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..self.taps.h {
                for j in 0..self.taps.w {
                    let t = self.taps.get(i, j);
                    if t == 0.0 {
                        continue;
                    }
                    let ph = -(w1 * (i as isize - ay) as f64 + w2 * (j as isize - ax) as f64);
                    re += t * ph.cos();
                    im += t * ph.sin();
                }
            }
            re * re + im * im
        })
    }
}

fn check_kernel_fits(img: &Plane, kh: usize, kw: usize) -> Result<()> {
    if kh > 2 * img.h || kw > 2 * img.w {
        return Err(Error::shape(format!(
            "kernel {}x{} larger than twice the {}x{} image",
            kh, kw, img.h, img.w
        )));
    }
    Ok(())
}

/// Anchored "same"-size 2D convolution.
pub fn conv2d(img: &Plane, k: &Kernel2D, ext: ExtensionMode) -> Result<Plane> {
    atrous_conv2d(img, k, 1, ext)
}

/// `conv2d` with the kernel dilated by inserting `dilation - 1` zeros
/// between taps (the à-trous scheme). `dilation = 1` is plain convolution.
pub fn atrous_conv2d(img: &Plane, k: &Kernel2D, dilation: usize, ext: ExtensionMode) -> Result<Plane> {
    if img.h == 0 || img.w == 0 {
        return Err(Error::invalid("empty image"));
    }
    if dilation == 0 {
        return Err(Error::invalid("dilation must be >= 1"));
    }
    let eff_h = (k.taps.h - 1) * dilation + 1;
    let eff_w = (k.taps.w - 1) * dilation + 1;
    check_kernel_fits(img, eff_h, eff_w)?;
    let (ay, ax) = (k.anchor.0 as isize, k.anchor.1 as isize);
    let d = dilation as isize;
    let mut out = Plane::zeros(img.h, img.w);
    for i in 0..k.taps.h {
        for j in 0..k.taps.w {
            let t = k.taps.get(i, j);
            if t == 0.0 {
                continue;
            }
            let dy = (i as isize - ay) * d;
            let dx = (j as isize - ax) * d;
            for y in 0..img.h {
                let sy = match ext_index(y as isize - dy, img.h, ext) {
                    Some(v) => v,
                    None => continue,
                };
                let row_out = y * img.w;
                let row_in = sy * img.w;
                for x in 0..img.w {
                    if let Some(sx) = ext_index(x as isize - dx, img.w, ext) {
                        out.data[row_out + x] += t * img.data[row_in + sx];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Convolution with the kernel's tap positions mapped through an integer
/// matrix `m` (upsampling on the lattice `m`); periodic extension. This is
/// the resampling mechanism of the nonsubsampled directional filter bank.
pub fn conv2d_mat(img: &Plane, k: &Kernel2D, m: [[i64; 2]; 2], ext: ExtensionMode) -> Result<Plane> {
    if img.h == 0 || img.w == 0 {
        return Err(Error::invalid("empty image"));
    }
    let (ay, ax) = (k.anchor.0 as i64, k.anchor.1 as i64);
    let mut out = Plane::zeros(img.h, img.w);
    for i in 0..k.taps.h {
        for j in 0..k.taps.w {
            let t = k.taps.get(i, j);
            if t == 0.0 {
                continue;
            }
            let u = i as i64 - ay;
            let v = j as i64 - ax;
            let dy = (m[0][0] * u + m[0][1] * v) as isize;
            let dx = (m[1][0] * u + m[1][1] * v) as isize;
            for y in 0..img.h {
                let sy = match ext_index(y as isize - dy, img.h, ext) {
                    Some(s) => s,
                    None => continue,
                };
                let row_out = y * img.w;
                let row_in = sy * img.w;
                for x in 0..img.w {
                    if let Some(sx) = ext_index(x as isize - dx, img.w, ext) {
                        out.data[row_out + x] += t * img.data[row_in + sx];
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// 1D filters and banks
// ---------------------------------------------------------------------------

/// 1D filter: taps plus the index of the n = 0 tap.
#[derive(Debug, Clone)]
pub struct Filter1D {
    pub taps: Vec<f64>,
    pub anchor: usize,
}

impl Filter1D {
    pub fn new(taps: Vec<f64>, anchor: usize) -> Self {
        assert!(anchor < taps.len());
        Filter1D { taps, anchor }
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// |H(w)|^2 at a single frequency.
    pub fn mag2(&self, w: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &t) in self.taps.iter().enumerate() {
            let ph = -w * (i as isize - self.anchor as isize) as f64;
            re += t * ph.cos();
            im += t * ph.sin();
        }
        re * re + im * im
    }

    /// Complex response H(w).
    pub fn response(&self, w: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &t) in self.taps.iter().enumerate() {
            let ph = -w * (i as isize - self.anchor as isize) as f64;
            re += t * ph.cos();
            im += t * ph.sin();
        }
        (re, im)
    }
}

/// Anchored 1D convolution along rows (axis = 1) or columns (axis = 0).
pub fn conv1d_axis(img: &Plane, f: &Filter1D, axis: usize, ext: ExtensionMode) -> Plane {
    let mut out = Plane::zeros(img.h, img.w);
    let a = f.anchor as isize;
    match axis {
        0 => {
            for (i, &t) in f.taps.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let dy = i as isize - a;
                for y in 0..img.h {
                    if let Some(sy) = ext_index(y as isize - dy, img.h, ext) {
                        for x in 0..img.w {
                            out.data[y * img.w + x] += t * img.data[sy * img.w + x];
                        }
                    }
                }
            }
        }
        1 => {
            for (i, &t) in f.taps.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let dx = i as isize - a;
                for x in 0..img.w {
                    if let Some(sx) = ext_index(x as isize - dx, img.w, ext) {
                        for y in 0..img.h {
                            out.data[y * img.w + x] += t * img.data[y * img.w + sx];
                        }
                    }
                }
            }
        }
        _ => panic!("axis must be 0 or 1"),
    }
    out
}

/// Two-channel analysis/synthesis bank. Built-in constructors verify
/// perfect reconstruction on a length-64 random signal at construction.
#[derive(Debug, Clone)]
pub struct FilterBank1D {
    pub analysis_lo: Filter1D,
    pub analysis_hi: Filter1D,
    pub synthesis_lo: Filter1D,
    pub synthesis_hi: Filter1D,
}

impl FilterBank1D {
    /// Derive the highpass pair from (h0, g0) via the biorthogonal
    /// relations H1(z) = z^-1 G0(-z), G1(z) = z H0(-z), then verify PR.
    pub fn from_lowpass_pair(h0: Filter1D, g0: Filter1D) -> Result<Self> {
        // h1[n] = (-1)^(n-1) g0[n-1]; stored support shifts by +1.
        let h1_taps: Vec<f64> = g0
            .taps
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let n = j as isize - g0.anchor as isize + 1;
                if (n - 1).rem_euclid(2) == 0 {
                    t
                } else {
                    -t
                }
            })
            .collect();
        let h1 = Filter1D::new(h1_taps, g0.anchor - 1);
        // g1[n] = (-1)^(n+1) h0[n+1]; stored support shifts by -1.
        let g1_taps: Vec<f64> = h0
            .taps
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let n = j as isize - h0.anchor as isize - 1;
                if (n + 1).rem_euclid(2) == 0 {
                    t
                } else {
                    -t
                }
            })
            .collect();
        let g1 = Filter1D::new(g1_taps, h0.anchor + 1);
        let bank = FilterBank1D {
            analysis_lo: h0,
            analysis_hi: h1,
            synthesis_lo: g0,
            synthesis_hi: g1,
        };
        let resid = bank.pr_residual_len64();
        if resid > 1e-8 {
            return Err(Error::Numeric(format!(
                "filter bank fails perfect reconstruction: residual {resid:.3e}"
            )));
        }
        Ok(bank)
    }

    /// Orthonormal Haar bank.
    pub fn haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // analysis h0 supported on n in {0,1}; synthesis g0 on {-1,0}.
        let h0 = Filter1D::new(vec![s, s], 0);
        let g0 = Filter1D::new(vec![s, s], 1);
        Self::from_lowpass_pair(h0, g0).expect("haar bank is PR")
    }

    /// Near-symmetric biorthogonal 13/19-tap level-1 pair used by the
    /// dual-tree transform (taps designed for a flat scaling spectrum;
    /// both lowpass filters sum to sqrt(2)).
    pub fn dtcwt_13_19() -> Self {
        let h0 = Filter1D::new(DTCWT_H0.to_vec(), 6);
        let g0 = Filter1D::new(DTCWT_G0.to_vec(), 9);
        Self::from_lowpass_pair(h0, g0).expect("13/19 bank is PR")
    }

    /// Max |x - reconstruct(decompose(x))| on a fixed pseudo-random
    /// length-64 signal, periodic extension, phase-0 decimation.
    pub fn pr_residual_len64(&self) -> f64 {
        // deterministic signal; no RNG dependency at construction time
        let x: Vec<f64> = (0..64)
            .map(|i| {
                let t = i as f64;
                (0.3 * t).sin() + 0.5 * (1.7 * t + 0.4).cos() + 0.02 * t
            })
            .collect();
        let img = Plane::from_vec(1, 64, x.clone()).unwrap();
        let (lo, hi) = analysis_rows(&img, self, 0);
        let rec = synthesis_rows(&lo, &hi, self, 64, 0);
        rec.data
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Filter every row with (h0, h1), keep columns of the given phase.
pub fn analysis_rows(img: &Plane, bank: &FilterBank1D, phase: usize) -> (Plane, Plane) {
    let lo = conv1d_axis(img, &bank.analysis_lo, 1, ExtensionMode::Periodic);
    let hi = conv1d_axis(img, &bank.analysis_hi, 1, ExtensionMode::Periodic);
    (decimate_cols(&lo, phase), decimate_cols(&hi, phase))
}

/// Inverse of `analysis_rows` for even input width.
pub fn synthesis_rows(lo: &Plane, hi: &Plane, bank: &FilterBank1D, out_w: usize, phase: usize) -> Plane {
    let ul = upsample_cols(lo, out_w, phase);
    let uh = upsample_cols(hi, out_w, phase);
    let a = conv1d_axis(&ul, &bank.synthesis_lo, 1, ExtensionMode::Periodic);
    let b = conv1d_axis(&uh, &bank.synthesis_hi, 1, ExtensionMode::Periodic);
    a.axpy(1.0, &b)
}

pub fn decimate_cols(img: &Plane, phase: usize) -> Plane {
    let w2 = (img.w - phase).div_ceil(2);
    Plane::from_fn(img.h, w2, |y, x| img.get(y, 2 * x + phase))
}

pub fn decimate_rows(img: &Plane, phase: usize) -> Plane {
    let h2 = (img.h - phase).div_ceil(2);
    Plane::from_fn(h2, img.w, |y, x| img.get(2 * y + phase, x))
}

pub fn upsample_cols(img: &Plane, out_w: usize, phase: usize) -> Plane {
    let mut out = Plane::zeros(img.h, out_w);
    for y in 0..img.h {
        for x in 0..img.w {
            out.set(y, 2 * x + phase, img.get(y, x));
        }
    }
    out
}

pub fn upsample_rows(img: &Plane, out_h: usize, phase: usize) -> Plane {
    let mut out = Plane::zeros(out_h, img.w);
    for y in 0..img.h {
        for x in 0..img.w {
            out.set(2 * y + phase, x, img.get(y, x));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// CD 9/7 prototype and the fan pair
// ---------------------------------------------------------------------------

/// CD 9/7 analysis lowpass as a polynomial in x = cos(w), highest degree
/// first (DC-normalized: H(0) = 1).
pub(crate) const CD97_H0_X: [f64; 5] = [
    0.42798011857296064,
    -0.13491294754299965,
    -0.7408731846889212,
    0.6349129475429998,
    0.8128930661159603,
];

/// CD 9/7 synthesis lowpass polynomial in x = cos(w), highest degree first.
pub(crate) const CD97_G0_X: [f64; 4] = [
    -0.3650870524570006,
    -0.11508705245700057,
    0.8650870524570006,
    0.6150870524570007,
];

/// Balance scale for the fan pair: analysis (s, 1/s) flattens the spectral
/// tiling |s H0|^2 + |H1 / s|^2 (deviation 0.053 on a 64x64 grid).
pub(crate) const FAN_BALANCE: f64 = 1.025;

/// McClellan transform: substitute x -> K(w1, w2) into a 1D cosine
/// polynomial, where K is the 3x3 kernel with 0.25 at the four face
/// neighbours (diamond contour). Power-basis Horner with 2D convolution.
pub fn mcclellan(poly_high_first: &[f64]) -> Plane {
    let mut acc = Plane::from_vec(1, 1, vec![poly_high_first[0]]).unwrap();
    for &c in &poly_high_first[1..] {
        acc = conv_full_mcclellan_k(&acc);
        let (cy, cx) = (acc.h / 2, acc.w / 2);
        let v = acc.get(cy, cx);
        acc.set(cy, cx, v + c);
    }
    acc
}

/// Full 2D convolution of `a` with the McClellan kernel K (output grows by 2).
fn conv_full_mcclellan_k(a: &Plane) -> Plane {
    let mut out = Plane::zeros(a.h + 2, a.w + 2);
    for y in 0..a.h {
        for x in 0..a.w {
            let v = a.get(y, x);
            if v == 0.0 {
                continue;
            }
            // K taps: 0.25 at (0,1),(2,1),(1,0),(1,2) of the 3x3 stencil
            out.data[(y) * out.w + (x + 1)] += 0.25 * v;
            out.data[(y + 2) * out.w + (x + 1)] += 0.25 * v;
            out.data[(y + 1) * out.w + (x)] += 0.25 * v;
            out.data[(y + 1) * out.w + (x + 2)] += 0.25 * v;
        }
    }
    out
}

/// Complementary fan (wedge-passband) analysis pair from the CD 9/7
/// prototype: McClellan diamonds, (pi, pi) modulation for the highpass,
/// (pi, 0) modulation to rotate diamonds into fans, and the (s, 1/s)
/// balance scaling.
pub fn fan_filter_pair() -> (Kernel2D, Kernel2D) {
    let d_h0 = Kernel2D::centered(mcclellan(&CD97_H0_X)).unwrap();
    let d_g0 = Kernel2D::centered(mcclellan(&CD97_G0_X)).unwrap();
    let f_h0 = d_h0.modulate_rows().scale(FAN_BALANCE);
    let f_h1 = d_g0.modulate_diag().modulate_rows().scale(1.0 / FAN_BALANCE);
    (f_h0, f_h1)
}

/// Synthesis counterpart of `fan_filter_pair` (scales swapped so the
/// decimated quincunx cascade stays PR).
pub fn fan_synthesis_pair() -> (Kernel2D, Kernel2D) {
    let d_h0 = Kernel2D::centered(mcclellan(&CD97_H0_X)).unwrap();
    let d_g0 = Kernel2D::centered(mcclellan(&CD97_G0_X)).unwrap();
    let f_g0 = d_g0.modulate_rows().scale(1.0 / FAN_BALANCE);
    let f_g1 = d_h0.modulate_diag().modulate_rows().scale(FAN_BALANCE);
    (f_g0, f_g1)
}

// ---------------------------------------------------------------------------
// DTCWT level-1 13/19 taps (sum sqrt(2); anchors 6 and 9)
// ---------------------------------------------------------------------------

pub(crate) const DTCWT_H0: [f64; 13] = [
    0.01537383936097597,
    -0.03785992234211258,
    0.03023339868284349,
    0.04663980501891268,
    -0.19420950099869222,
    0.3447735079164736,
    1.0043113070962937,
    0.3447735079164736,
    -0.19420950099869222,
    0.04663980501891268,
    0.03023339868284349,
    -0.03785992234211258,
    0.01537383936097597,
];

pub(crate) const DTCWT_G0: [f64; 19] = [
    -4.9961651845540939e-4,
    -1.2303655674640000e-3,
    3.1189963652666008e-4,
    4.7033563998855540e-3,
    3.6221580527335063e-3,
    -5.6137511279653711e-3,
    -5.9989176502102434e-2,
    -3.6798338523517057e-3,
    4.1010812592456591e-1,
    7.1874796948234887e-1,
    4.1010812592456591e-1,
    -3.6798338523517057e-3,
    -5.9989176502102434e-2,
    -5.6137511279653711e-3,
    3.6221580527335063e-3,
    4.7033563998855540e-3,
    3.1189963652666008e-4,
    -1.2303655674640000e-3,
    -4.9961651845540939e-4,
];
