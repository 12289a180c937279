//! Loss functions: soft Dice loss, 3D dynamic focal loss in the frequency
//! domain, the linear warm-up weight schedule, and the total-loss
//! composition with the EWC pull-back term.

use crate::error::{Error, Result};
use crate::io::LabelVolume;
use crate::metrics::fft3;
use num_complex::Complex64;

/// Per-voxel class probability field, laid out class-major over a
/// (D, H, W) grid.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub n_classes: usize,
    pub dims: (usize, usize, usize),
    /// data[(((c * D) + z) * H + y) * W + x]
    pub data: Vec<f64>,
}

impl Prediction {
    pub fn new(n_classes: usize, dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let n = dims.0 * dims.1 * dims.2;
        if n_classes == 0 || n == 0 {
            return Err(Error::invalid("empty prediction"));
        }
        if data.len() != n_classes * n {
            return Err(Error::Length(format!(
                "prediction data length {} != {n_classes} x {n}",
                data.len()
            )));
        }
        if data.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("probabilities must lie in [0, 1]"));
        }
        for v in 0..n {
            let s: f64 = (0..n_classes).map(|c| data[c * n + v]).sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "per-voxel class probabilities sum to {s}, expected 1"
                )));
            }
        }
        Ok(Prediction {
            n_classes,
            dims,
            data,
        })
    }

    /// One class channel's probabilities, flattened (z, y, x).
    pub fn class_channel(&self, c: usize) -> &[f64] {
        let n = self.dims.0 * self.dims.1 * self.dims.2;
        &self.data[c * n..(c + 1) * n]
    }

    /// One-hot prediction from a label volume.
    pub fn one_hot(target: &LabelVolume) -> Self {
        let n = target.dims.0 * target.dims.1 * target.dims.2;
        let mut data = vec![0.0; target.n_classes * n];
        for (v, &cls) in target.data.iter().enumerate() {
            data[cls as usize * n + v] = 1.0;
        }
        Prediction {
            n_classes: target.n_classes,
            dims: target.dims,
            data,
        }
    }
}

const DICE_SMOOTH: f64 = 1e-5;

/// Soft Dice loss averaged over classes:
/// 1 - (1/C) sum_c (2 sum p g + s) / (sum p + sum g + s), s = 1e-5.
pub fn dice_loss(pred: &Prediction, target: &LabelVolume) -> Result<f64> {
    if pred.dims != target.dims {
        return Err(Error::shape("prediction/target dims differ"));
    }
    if target.n_classes > pred.n_classes {
        return Err(Error::invalid("target class id exceeds prediction channels"));
    }
    let n = pred.dims.0 * pred.dims.1 * pred.dims.2;
    let mut dice_sum = 0.0;
    for c in 0..pred.n_classes {
        let p = pred.class_channel(c);
        let mut inter = 0.0;
        let mut psum = 0.0;
        let mut gsum = 0.0;
        for v in 0..n {
            let g = (target.data[v] as usize == c) as u8 as f64;
            inter += p[v] * g;
            psum += p[v];
            gsum += g;
        }
        dice_sum += (2.0 * inter + DICE_SMOOTH) / (psum + gsum + DICE_SMOOTH);
    }
    Ok(1.0 - dice_sum / pred.n_classes as f64)
}

fn check_dfl_shapes(out_l: &Prediction, out_h: &Prediction) -> Result<()> {
    if out_l.dims != out_h.dims || out_l.n_classes != out_h.n_classes {
        return Err(Error::shape("dfl inputs differ in shape"));
    }
    Ok(())
}

/// 3D dynamic focal loss: per class channel, the DFT-amplitude distance
/// m(u,v,w) = |DFT(p_L) - DFT(p_H)| is self-weighted by m^alpha, giving
/// (1/N) sum m^(alpha+2); the result is averaged over class channels.
pub fn dfl(out_l: &Prediction, out_h: &Prediction, alpha: f64) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::invalid("alpha must be >= 0"));
    }
    check_dfl_shapes(out_l, out_h)?;
    let n = out_l.dims.0 * out_l.dims.1 * out_l.dims.2;
    let mut total = 0.0;
    for c in 0..out_l.n_classes {
        let pl = out_l.class_channel(c);
        let ph = out_h.class_channel(c);
        let diff: Vec<Complex64> = pl
            .iter()
            .zip(ph)
            .map(|(a, b)| Complex64::new(a - b, 0.0))
            .collect();
        let spec = fft3(&diff, out_l.dims, false);
        let s: f64 = spec.iter().map(|z| z.norm().powf(alpha + 2.0)).sum();
        total += s / n as f64;
    }
    Ok(total / out_l.n_classes as f64)
}

/// Analytic gradient of `dfl` with respect to `out_l`'s probabilities
/// (same layout as `Prediction::data`). Derivation: with d = p_L - p_H and
/// D = DFT(d), d DFL / d d[x] = (alpha + 2) Re(IDFT(m^alpha . D))[x] / C.
pub fn dfl_grad_out_l(out_l: &Prediction, out_h: &Prediction, alpha: f64) -> Result<Vec<f64>> {
    if alpha < 0.0 {
        return Err(Error::invalid("alpha must be >= 0"));
    }
    check_dfl_shapes(out_l, out_h)?;
    let n = out_l.dims.0 * out_l.dims.1 * out_l.dims.2;
    let c_cls = out_l.n_classes as f64;
    let mut grad = Vec::with_capacity(out_l.data.len());
    for c in 0..out_l.n_classes {
        let pl = out_l.class_channel(c);
        let ph = out_h.class_channel(c);
        let diff: Vec<Complex64> = pl
            .iter()
            .zip(ph)
            .map(|(a, b)| Complex64::new(a - b, 0.0))
            .collect();
        let spec = fft3(&diff, out_l.dims, false);
        let weighted: Vec<Complex64> = spec.iter().map(|z| z * z.norm().powf(alpha)).collect();
        let back = fft3(&weighted, out_l.dims, true);
        // rustfft's inverse is unnormalized: divide by N for the true IDFT
        grad.extend(
            back.iter()
                .map(|z| (alpha + 2.0) * z.re / n as f64 / c_cls),
        );
    }
    Ok(grad)
}

/// Linear warm-up: lambda_max * t / T, clamped at lambda_max past T.
pub fn lambda_schedule(t: f64, t_total: f64, lambda_max: f64) -> Result<f64> {
    if t < 0.0 || t_total < 1.0 {
        return Err(Error::invalid("schedule needs t >= 0 and T >= 1"));
    }
    Ok(lambda_max * (t / t_total).min(1.0))
}

/// Loss composition weights and schedule parameters.
#[derive(Debug, Clone, Copy)]
pub struct LossWeights {
    pub lambda2: f64,
    pub alpha: f64,
    pub lambda_max: f64,
    pub t_total: f64,
}

impl LossWeights {
    pub fn new(lambda2: f64, alpha: f64, lambda_max: f64, t_total: f64) -> Result<Self> {
        if lambda2 < 0.0 || alpha < 0.0 || t_total < 1.0 {
            return Err(Error::invalid(
                "loss weights need lambda2 >= 0, alpha >= 0, T >= 1",
            ));
        }
        Ok(LossWeights {
            lambda2,
            alpha,
            lambda_max,
            t_total,
        })
    }
}

impl Default for LossWeights {
    /// Reference constants: lambda2 = 5e-6, alpha = 1, lambda_max = 15,
    /// T = 40 warm-up epochs.
    fn default() -> Self {
        LossWeights {
            lambda2: 5e-6,
            alpha: 1.0,
            lambda_max: 15.0,
            t_total: 40.0,
        }
    }
}

/// Total loss: sum of supervised terms + lambda1(t) * unsupervised +
/// lambda2 * EWC pull-back.
pub fn total_loss(
    sup_terms: &[f64],
    unsup: f64,
    ewc: f64,
    weights: &LossWeights,
    t: f64,
) -> Result<f64> {
    let lambda1 = lambda_schedule(t, weights.t_total, weights.lambda_max)?;
    let sup: f64 = sup_terms.iter().sum();
    Ok(sup + lambda1 * unsup + weights.lambda2 * ewc)
}
