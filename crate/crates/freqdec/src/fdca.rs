//! Frequency-domain cross-attention: split a 4D feature map into real and
//! imaginary spectra, derive semantic (per-channel), positional (per-pixel)
//! and slice (per-slice, low-rank Gaussian) attention maps from the real
//! part, modulate both spectra, and return to the spatial domain.

use crate::error::{Error, Result};
use crate::metrics::fft3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Real-valued feature map, c channels of n slices of h x w pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub c: usize,
    pub n: usize,
    pub h: usize,
    pub w: usize,
    /// Row-major (c, n, h, w).
    pub data: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(c: usize, n: usize, h: usize, w: usize) -> Result<Self> {
        if c == 0 || n == 0 || h == 0 || w == 0 {
            return Err(Error::invalid("feature map dims must be >= 1"));
        }
        Ok(FeatureMap {
            c,
            n,
            h,
            w,
            data: vec![0.0; c * n * h * w],
        })
    }

    pub fn from_fn(
        c: usize,
        n: usize,
        h: usize,
        w: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut fm = FeatureMap::zeros(c, n, h, w)?;
        for ci in 0..c {
            for s in 0..n {
                for y in 0..h {
                    for x in 0..w {
                        let v = f(ci, s, y, x);
                        let idx = fm.index(ci, s, y, x);
                        fm.data[idx] = v;
                    }
                }
            }
        }
        Ok(fm)
    }

    #[inline]
    pub fn index(&self, c: usize, s: usize, y: usize, x: usize) -> usize {
        ((c * self.n + s) * self.h + y) * self.w + x
    }

    #[inline]
    pub fn get(&self, c: usize, s: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(c, s, y, x)]
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.c, self.n, self.h, self.w)
    }

    pub fn max_abs_diff(&self, other: &FeatureMap) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Real/imaginary spectrum pair with matching dims.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFeatureMap {
    pub re: FeatureMap,
    pub im: FeatureMap,
}

/// Learned weights for the three attention stages, deterministically
/// initialized from the seed (affines normal(0, 0.02), conv Kaiming fan-in).
#[derive(Debug, Clone)]
pub struct FdcaParams {
    pub c: usize,
    pub n: usize,
    /// Low-rank factor width for the slice Gaussian, min(4, n).
    pub r: usize,
    pub seed: u64,
    // semantic: two c x c affines
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    // positional: 7x7 conv, 2 input channels, 1 output
    pub conv: Vec<f64>,
    pub conv_bias: f64,
    // slice: n x n affines plus the (n*r) x n low-rank factor map
    pub w1s: Vec<f64>,
    pub b1s: Vec<f64>,
    pub w2s: Vec<f64>,
    pub b2s: Vec<f64>,
    pub wmu: Vec<f64>,
    pub bmu: Vec<f64>,
    pub wr: Vec<f64>,
    pub br: Vec<f64>,
    pub wd: Vec<f64>,
    pub bd: Vec<f64>,
}

pub const POS_KERNEL: usize = 7;

impl FdcaParams {
    pub fn new(c: usize, n: usize, seed: u64) -> Result<Self> {
        if c == 0 || n == 0 {
            return Err(Error::invalid("c and n must be >= 1"));
        }
        let r = n.min(4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let affine = Normal::new(0.0, 0.02).expect("valid normal");
        let draw = |k: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..k).map(|_| affine.sample(rng)).collect()
        };
        let w1 = draw(c * c, &mut rng);
        let w2 = draw(c * c, &mut rng);
        // Kaiming normal, fan-in = 2 * 7 * 7
        let fan_in = 2 * POS_KERNEL * POS_KERNEL;
        let kaiming = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("valid normal");
        let conv: Vec<f64> = (0..fan_in).map(|_| kaiming.sample(&mut rng)).collect();
        let w1s = draw(n * n, &mut rng);
        let w2s = draw(n * n, &mut rng);
        let wmu = draw(n * n, &mut rng);
        let wr = draw(n * r * n, &mut rng);
        let wd = draw(n * n, &mut rng);
        Ok(FdcaParams {
            c,
            n,
            r,
            seed,
            w1,
            b1: vec![0.0; c],
            w2,
            b2: vec![0.0; c],
            conv,
            conv_bias: 0.0,
            w1s,
            b1s: vec![0.0; n],
            w2s,
            b2s: vec![0.0; n],
            wmu,
            bmu: vec![0.0; n],
            wr,
            br: vec![0.0; n * r],
            wd,
            bd: vec![0.0; n],
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// y = W x + b with W row-major (rows x cols).
fn matvec(w: &[f64], b: &[f64], x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    (0..rows)
        .map(|i| b[i] + w[i * cols..(i + 1) * cols].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// 3D DFT of every channel over the (n, h, w) axes.
pub fn fft_split(f: &FeatureMap) -> ComplexFeatureMap {
    let (c, n, h, w) = f.dims();
    let mut re = f.clone();
    let mut im = f.clone();
    let vol = n * h * w;
    for ci in 0..c {
        let chunk: Vec<Complex64> = f.data[ci * vol..(ci + 1) * vol]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let spec = fft3(&chunk, (n, h, w), false);
        for (k, z) in spec.iter().enumerate() {
            re.data[ci * vol + k] = z.re;
            im.data[ci * vol + k] = z.im;
        }
    }
    ComplexFeatureMap { re, im }
}

/// Inverse 3D DFT per channel; returns the real part and the L2 norm of the
/// discarded imaginary residual.
pub fn ifft_merge(x: &ComplexFeatureMap) -> Result<(FeatureMap, f64)> {
    if x.re.dims() != x.im.dims() {
        return Err(Error::shape("re/im dims differ"));
    }
    let (c, n, h, w) = x.re.dims();
    let vol = n * h * w;
    let norm = vol as f64;
    let mut out = x.re.clone();
    let mut resid_sq = 0.0;
    for ci in 0..c {
        let chunk: Vec<Complex64> = (0..vol)
            .map(|k| Complex64::new(x.re.data[ci * vol + k], x.im.data[ci * vol + k]))
            .collect();
        let spatial = fft3(&chunk, (n, h, w), true);
        for (k, z) in spatial.iter().enumerate() {
            out.data[ci * vol + k] = z.re / norm;
            resid_sq += (z.im / norm) * (z.im / norm);
        }
    }
    Ok((out, resid_sq.sqrt()))
}

/// Semantic attention: global max/mean pooling over (n, h, w) to c-vectors,
/// one affine each, summed, sigmoid. One weight per channel, in (0,1).
pub fn semantic_attention(f_r: &FeatureMap, params: &FdcaParams) -> Result<Vec<f64>> {
    if f_r.c != params.c {
        return Err(Error::shape("channel count differs from params"));
    }
    let (c, n, h, w) = f_r.dims();
    let vol = n * h * w;
    let mut pmax = vec![f64::NEG_INFINITY; c];
    let mut pmean = vec![0.0; c];
    for ci in 0..c {
        for &v in &f_r.data[ci * vol..(ci + 1) * vol] {
            if v > pmax[ci] {
                pmax[ci] = v;
            }
            pmean[ci] += v;
        }
        pmean[ci] /= vol as f64;
    }
    let a = matvec(&params.w1, &params.b1, &pmax, c, c);
    let b = matvec(&params.w2, &params.b2, &pmean, c, c);
    Ok(a.iter().zip(&b).map(|(x, y)| sigmoid(x + y)).collect())
}

/// Positional attention: max/mean pooling over (c, n) to two h x w maps,
/// 7x7 same-convolution (zero extension) down to one map, sigmoid.
pub fn positional_attention(f_r: &FeatureMap, params: &FdcaParams) -> Result<Vec<f64>> {
    let (c, n, h, w) = f_r.dims();
    if h < POS_KERNEL || w < POS_KERNEL {
        return Err(Error::invalid("spatial dims smaller than the 7x7 kernel"));
    }
    let mut pmax = vec![f64::NEG_INFINITY; h * w];
    let mut pmean = vec![0.0; h * w];
    for ci in 0..c {
        for s in 0..n {
            for y in 0..h {
                for x in 0..w {
                    let v = f_r.get(ci, s, y, x);
                    let p = y * w + x;
                    if v > pmax[p] {
                        pmax[p] = v;
                    }
                    pmean[p] += v;
                }
            }
        }
    }
    let cn = (c * n) as f64;
    for v in pmean.iter_mut() {
        *v /= cn;
    }
    let half = POS_KERNEL as isize / 2;
    let mut out = vec![0.0; h * w];
    for (ch, map) in [&pmax, &pmean].iter().enumerate() {
        let taps = &params.conv[ch * POS_KERNEL * POS_KERNEL..(ch + 1) * POS_KERNEL * POS_KERNEL];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for ky in 0..POS_KERNEL as isize {
                    let sy = y + ky - half;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for kx in 0..POS_KERNEL as isize {
                        let sx = x + kx - half;
                        if sx < 0 || sx >= w as isize {
                            continue;
                        }
                        acc += taps[(ky * POS_KERNEL as isize + kx) as usize]
                            * map[(sy * w as isize + sx) as usize];
                    }
                }
                out[(y * w as isize + x) as usize] += acc;
            }
        }
    }
    Ok(out.iter().map(|&v| sigmoid(v + params.conv_bias)).collect())
}

/// Intermediate slice-attention quantities, exposed for the covariance test.
#[derive(Debug, Clone)]
pub struct SliceAttention {
    pub mu: Vec<f64>,
    /// n x r low-rank factor, row-major.
    pub r_mat: Vec<f64>,
    /// Diagonal variances, strictly positive.
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub m_n: Vec<f64>,
}

/// Slice attention: pool over (c, h, w) to n-vectors, combine with two
/// affines, map to the low-rank Gaussian (mu, R, D), reparameterize
/// v = mu + R e1 + sqrt(D) * e2, sigmoid. Noise may be caller-supplied;
/// otherwise it is drawn deterministically from the params seed.
pub fn slice_attention(
    f_r: &FeatureMap,
    params: &FdcaParams,
    noise: Option<(&[f64], &[f64])>,
) -> Result<SliceAttention> {
    if f_r.n != params.n {
        return Err(Error::shape("slice count differs from params"));
    }
    let (c, n, h, w) = f_r.dims();
    let mut pmax = vec![f64::NEG_INFINITY; n];
    let mut pmean = vec![0.0; n];
    for ci in 0..c {
        for s in 0..n {
            for y in 0..h {
                for x in 0..w {
                    let v = f_r.get(ci, s, y, x);
                    if v > pmax[s] {
                        pmax[s] = v;
                    }
                    pmean[s] += v;
                }
            }
        }
    }
    let chw = (c * h * w) as f64;
    for v in pmean.iter_mut() {
        *v /= chw;
    }
    let r = params.r;
    let s_vec: Vec<f64> = matvec(&params.w1s, &params.b1s, &pmax, n, n)
        .iter()
        .zip(matvec(&params.w2s, &params.b2s, &pmean, n, n))
        .map(|(a, b)| a + b)
        .collect();
    let mu = matvec(&params.wmu, &params.bmu, &s_vec, n, n);
    let r_mat = matvec(&params.wr, &params.br, &s_vec, n * r, n);
    let d: Vec<f64> = matvec(&params.wd, &params.bd, &s_vec, n, n)
        .iter()
        .map(|&x| x.exp())
        .collect();
    let owned;
    let (eps1, eps2): (&[f64], &[f64]) = match noise {
        Some((e1, e2)) => {
            if e1.len() != r || e2.len() != n {
                return Err(Error::shape("noise vectors must have lengths r and n"));
            }
            (e1, e2)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x736c_6963_655f_6eb5);
            let std = Normal::new(0.0, 1.0).expect("valid normal");
            owned = (
                (0..r).map(|_| std.sample(&mut rng)).collect::<Vec<f64>>(),
                (0..n).map(|_| std.sample(&mut rng)).collect::<Vec<f64>>(),
            );
            (&owned.0, &owned.1)
        }
    };
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let low_rank: f64 = (0..r).map(|j| r_mat[i * r + j] * eps1[j]).sum();
            mu[i] + low_rank + d[i].sqrt() * eps2[i]
        })
        .collect();
    let m_n = v.iter().map(|&x| sigmoid(x)).collect();
    Ok(SliceAttention {
        mu,
        r_mat,
        d,
        v,
        m_n,
    })
}

/// The three attention maps, each stored along its own broadcast axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMaps {
    /// Per channel (c).
    pub m_s: Vec<f64>,
    /// Per pixel (h * w).
    pub m_p: Vec<f64>,
    /// Per slice (n).
    pub m_n: Vec<f64>,
}

fn modulate_channels(f: &mut FeatureMap, m_s: &[f64]) {
    let vol = f.n * f.h * f.w;
    for ci in 0..f.c {
        for v in &mut f.data[ci * vol..(ci + 1) * vol] {
            *v *= m_s[ci];
        }
    }
}

fn modulate_pixels(f: &mut FeatureMap, m_p: &[f64]) {
    let hw = f.h * f.w;
    for chunk in f.data.chunks_mut(hw) {
        for (v, &m) in chunk.iter_mut().zip(m_p) {
            *v *= m;
        }
    }
}

fn modulate_slices(f: &mut FeatureMap, m_n: &[f64]) {
    let hw = f.h * f.w;
    for (i, chunk) in f.data.chunks_mut(hw).enumerate() {
        let m = m_n[i % f.n];
        for v in chunk.iter_mut() {
            *v *= m;
        }
    }
}

/// Result of a full FDCA pass.
#[derive(Debug, Clone)]
pub struct FdcaOutput {
    pub output: FeatureMap,
    /// L2 norm of the imaginary part discarded after the inverse transform.
    pub imag_residual: f64,
    pub maps: AttentionMaps,
}

/// Apply pre-computed attention maps to a spectrum pair and return to the
/// spatial domain (test hook; `fdca_apply` builds the maps first).
pub fn fdca_apply_with_maps(
    f: &FeatureMap,
    maps: &AttentionMaps,
) -> Result<(FeatureMap, f64)> {
    let mut spec = fft_split(f);
    for part in [&mut spec.re, &mut spec.im] {
        modulate_channels(part, &maps.m_s);
        modulate_pixels(part, &maps.m_p);
        modulate_slices(part, &maps.m_n);
    }
    ifft_merge(&spec)
}

/// Full chain: FFT split, semantic then positional then slice attention
/// (each derived from the current real part, applied to both parts), IFFT.
pub fn fdca_apply(
    f: &FeatureMap,
    params: &FdcaParams,
    noise: Option<(&[f64], &[f64])>,
) -> Result<FdcaOutput> {
    if f.c != params.c || f.n != params.n {
        return Err(Error::shape("feature map dims differ from params"));
    }
    let mut spec = fft_split(f);
    let m_s = semantic_attention(&spec.re, params)?;
    modulate_channels(&mut spec.re, &m_s);
    modulate_channels(&mut spec.im, &m_s);
    let m_p = positional_attention(&spec.re, params)?;
    modulate_pixels(&mut spec.re, &m_p);
    modulate_pixels(&mut spec.im, &m_p);
    let slice = slice_attention(&spec.re, params, noise)?;
    modulate_slices(&mut spec.re, &slice.m_n);
    modulate_slices(&mut spec.im, &slice.m_n);
    let (output, imag_residual) = ifft_merge(&spec)?;
    Ok(FdcaOutput {
        output,
        imag_residual,
        maps: AttentionMaps {
            m_s,
            m_p,
            m_n: slice.m_n,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_map(c: usize, n: usize, h: usize, w: usize, seed: u64) -> FeatureMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMap::from_fn(c, n, h, w, |_, _, _, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn fft_constant_and_even_symmetry() {
        let c0 = 0.75;
        let f = FeatureMap::from_fn(2, 3, 4, 4, |_, _, _, _| c0).unwrap();
        let spec = fft_split(&f);
        for ci in 0..2 {
            assert!((spec.re.get(ci, 0, 0, 0) - c0 * 48.0).abs() < 1e-12);
        }
        let dc: f64 = spec.re.data.iter().map(|v| v.abs()).sum();
        assert!((dc - 2.0 * c0 * 48.0).abs() < 1e-9, "energy beyond DC");
        assert!(spec.im.data.iter().all(|v| v.abs() < 1e-12));

        // even-symmetric input: f(k) = f(-k mod dims) → purely real spectrum
        let (n, h, w) = (4usize, 6usize, 6usize);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = FeatureMap::zeros(1, n, h, w).unwrap();
        for s in 0..n {
            for y in 0..h {
                for x in 0..w {
                    let v = rng.gen_range(-1.0..1.0);
                    let i1 = g.index(0, s, y, x);
                    let i2 = g.index(0, (n - s) % n, (h - y) % h, (w - x) % w);
                    g.data[i1] = v;
                    g.data[i2] = v;
                }
            }
        }
        let spec = fft_split(&g);
        assert!(spec.im.data.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn fft_matches_naive_dft_and_round_trips() {
        let f = rand_map(2, 3, 4, 5, 7);
        let spec = fft_split(&f);
        // naive O(N^2) 3D DFT oracle
        let (n, h, w) = (3usize, 4usize, 5usize);
        let tau = std::f64::consts::TAU;
        for ci in 0..2 {
            for ks in 0..n {
                for ky in 0..h {
                    for kx in [0usize, 2, 4] {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for s in 0..n {
                            for y in 0..h {
                                for x in 0..w {
                                    let phase = -tau
                                        * (ks as f64 * s as f64 / n as f64
                                            + ky as f64 * y as f64 / h as f64
                                            + kx as f64 * x as f64 / w as f64);
                                    acc += Complex64::from_polar(1.0, phase)
                                        * f.get(ci, s, y, x);
                                }
                            }
                        }
                        assert!((spec.re.get(ci, ks, ky, kx) - acc.re).abs() < 1e-9);
                        assert!((spec.im.get(ci, ks, ky, kx) - acc.im).abs() < 1e-9);
                    }
                }
            }
        }
        let (back, resid) = ifft_merge(&spec).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-9);
        assert!(resid < 1e-9);
    }

    #[test]
    fn semantic_zero_input_and_oracle() {
        let params = FdcaParams::new(3, 2, 1).unwrap();
        let zero = FeatureMap::zeros(3, 2, 8, 8).unwrap();
        let m = semantic_attention(&zero, &params).unwrap();
        assert!(m.iter().all(|&v| v == 0.5));

        let f = rand_map(3, 2, 8, 8, 2);
        let m = semantic_attention(&f, &params).unwrap();
        assert!(m.iter().all(|&v| v > 0.0 && v < 1.0));
        // independent recomputation
        let vol = 2 * 8 * 8;
        let pools: Vec<(f64, f64)> = (0..3)
            .map(|ci| {
                let chunk = &f.data[ci * vol..(ci + 1) * vol];
                (
                    chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    chunk.iter().sum::<f64>() / vol as f64,
                )
            })
            .collect();
        for i in 0..3 {
            let mut z = 0.0;
            for j in 0..3 {
                z += params.w1[i * 3 + j] * pools[j].0 + params.w2[i * 3 + j] * pools[j].1;
            }
            let want = 1.0 / (1.0 + (-z).exp());
            assert!((m[i] - want).abs() < 1e-12);
        }

        let bad = FeatureMap::zeros(4, 2, 8, 8).unwrap();
        assert!(semantic_attention(&bad, &params).is_err());
    }

    #[test]
    fn positional_zero_input_oracle_and_bounds() {
        let params = FdcaParams::new(2, 2, 4).unwrap();
        let zero = FeatureMap::zeros(2, 2, 9, 8).unwrap();
        let m = positional_attention(&zero, &params).unwrap();
        assert!(m.iter().all(|&v| v == 0.5));

        let f = rand_map(2, 2, 9, 8, 5);
        let m = positional_attention(&f, &params).unwrap();
        assert!(m.iter().all(|&v| v > 0.0 && v < 1.0));

        // direct-loop oracle: pool, then correlate with zero padding
        let (h, w) = (9usize, 8usize);
        let mut pmax = vec![f64::NEG_INFINITY; h * w];
        let mut pmean = vec![0.0; h * w];
        for ci in 0..2 {
            for s in 0..2 {
                for y in 0..h {
                    for x in 0..w {
                        let v = f.get(ci, s, y, x);
                        pmax[y * w + x] = pmax[y * w + x].max(v);
                        pmean[y * w + x] += v / 4.0;
                    }
                }
            }
        }
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut z = 0.0;
                for (ch, map) in [&pmax, &pmean].iter().enumerate() {
                    for ky in -3..=3isize {
                        for kx in -3..=3isize {
                            let (sy, sx) = (y + ky, x + kx);
                            if sy >= 0 && sy < h as isize && sx >= 0 && sx < w as isize {
                                z += params.conv
                                    [ch * 49 + ((ky + 3) * 7 + kx + 3) as usize]
                                    * map[(sy * w as isize + sx) as usize];
                            }
                        }
                    }
                }
                let want = 1.0 / (1.0 + (-z).exp());
                assert!((m[(y * w as isize + x) as usize] - want).abs() < 1e-10);
            }
        }

        let small = FeatureMap::zeros(1, 1, 6, 8).unwrap();
        assert!(positional_attention(&small, &params).is_err());
    }

    #[test]
    fn slice_mean_path_and_positive_variances() {
        let params = FdcaParams::new(2, 5, 9).unwrap();
        assert_eq!(params.r, 4);
        let f = rand_map(2, 5, 8, 8, 10);
        let zero1 = vec![0.0; params.r];
        let zero2 = vec![0.0; params.n];
        let att = slice_attention(&f, &params, Some((&zero1, &zero2))).unwrap();
        for (m, mu) in att.m_n.iter().zip(&att.mu) {
            assert_eq!(*m, 1.0 / (1.0 + (-mu).exp()));
        }
        assert!(att.d.iter().all(|&d| d > 0.0));
        assert!(att.m_n.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(slice_attention(&f, &params, Some((&zero2, &zero1))).is_err());
        // r = min(4, n)
        assert_eq!(FdcaParams::new(2, 3, 0).unwrap().r, 3);
    }

    #[test]
    fn slice_covariance_matches_low_rank_model() {
        let params = FdcaParams::new(2, 4, 11).unwrap();
        let f = rand_map(2, 4, 8, 8, 12);
        let n = 4;
        let r = params.r;
        let base = slice_attention(&f, &params, Some((&vec![0.0; r], &vec![0.0; n]))).unwrap();
        // analytic covariance R R^T + diag(D)
        let mut want = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..r {
                    want[i * n + j] += base.r_mat[i * r + k] * base.r_mat[j * r + k];
                }
            }
            want[i * n + i] += base.d[i];
        }
        let trials = 20000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let std = Normal::new(0.0, 1.0).unwrap();
        let mut cov = vec![0.0; n * n];
        for _ in 0..trials {
            let e1: Vec<f64> = (0..r).map(|_| std.sample(&mut rng)).collect();
            let e2: Vec<f64> = (0..n).map(|_| std.sample(&mut rng)).collect();
            let att = slice_attention(&f, &params, Some((&e1, &e2))).unwrap();
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] += (att.v[i] - base.mu[i]) * (att.v[j] - base.mu[j]);
                }
            }
        }
        let mut worst: f64 = 0.0;
        for (c, w) in cov.iter().zip(&want) {
            worst = worst.max((c / trials as f64 - w).abs());
        }
        assert!(worst < 0.05, "covariance deviation {worst:.3}");
    }

    #[test]
    fn apply_identity_maps_zero_input_and_determinism() {
        let f = rand_map(2, 4, 8, 8, 20);
        let ones = AttentionMaps {
            m_s: vec![1.0; 2],
            m_p: vec![1.0; 64],
            m_n: vec![1.0; 4],
        };
        let (out, resid) = fdca_apply_with_maps(&f, &ones).unwrap();
        assert!(out.max_abs_diff(&f) < 1e-9);
        assert!(resid < 1e-9);

        let params = FdcaParams::new(2, 4, 21).unwrap();
        let zero = FeatureMap::zeros(2, 4, 8, 8).unwrap();
        let res = fdca_apply(&zero, &params, None).unwrap();
        assert!(res.output.data.iter().all(|&v| v == 0.0));

        let a = fdca_apply(&f, &params, None).unwrap();
        let b = fdca_apply(&f, &params, None).unwrap();
        assert_eq!(a.output.data, b.output.data);
        assert_eq!(a.maps, b.maps);
        assert!(a.maps.m_s.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(a.maps.m_p.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(a.maps.m_n.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn maps_depend_only_on_real_part() {
        // perturbing only F_i must leave every attention map unchanged,
        // exactly; realized by feeding the same spectrum with a modified
        // imaginary part through the chain
        let f = rand_map(2, 4, 8, 8, 30);
        let params = FdcaParams::new(2, 4, 31).unwrap();
        let noise1 = vec![0.1; params.r];
        let noise2 = vec![-0.2; params.n];

        let run = |im_bump: f64| -> AttentionMaps {
            let mut spec = fft_split(&f);
            for v in spec.im.data.iter_mut() {
                *v += im_bump;
            }
            let m_s = semantic_attention(&spec.re, &params).unwrap();
            modulate_channels(&mut spec.re, &m_s);
            modulate_channels(&mut spec.im, &m_s);
            let m_p = positional_attention(&spec.re, &params).unwrap();
            modulate_pixels(&mut spec.re, &m_p);
            modulate_pixels(&mut spec.im, &m_p);
            let sl = slice_attention(&spec.re, &params, Some((&noise1, &noise2))).unwrap();
            AttentionMaps {
                m_s,
                m_p,
                m_n: sl.m_n,
            }
        };
        assert_eq!(run(0.0), run(3.5));
    }

    #[test]
    fn modulation_broadcasts_along_the_right_axes() {
        let f = FeatureMap::from_fn(2, 3, 8, 8, |_, _, _, _| 1.0).unwrap();
        let maps = AttentionMaps {
            m_s: vec![2.0, 3.0],
            m_p: (0..64).map(|i| 1.0 + i as f64).collect(),
            m_n: vec![5.0, 7.0, 11.0],
        };
        let mut g = f.clone();
        modulate_channels(&mut g, &maps.m_s);
        modulate_pixels(&mut g, &maps.m_p);
        modulate_slices(&mut g, &maps.m_n);
        for ci in 0..2 {
            for s in 0..3 {
                for y in 0..8 {
                    for x in 0..8 {
                        let want = maps.m_s[ci] * maps.m_p[y * 8 + x] * maps.m_n[s];
                        assert_eq!(g.get(ci, s, y, x), want);
                    }
                }
            }
        }
    }
}
