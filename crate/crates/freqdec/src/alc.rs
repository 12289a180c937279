//! Adaptive Laplacian convolution machinery: Laplacian-initialized 3D
//! kernels, an elastic pull-back regularizer toward the Laplacian benchmark,
//! Fisher-information accumulation with z-score importance masking and
//! gradient freezing, exercised end to end by a small analytic-gradient
//! convolution demo.

use crate::error::{Error, Result};
use crate::io::{MultiModalVolume, Volume3D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

/// Discrete Laplacian stencil on an odd-sized 3D grid: -6 at the centre,
/// +1 at the six face neighbours (fewer on axes of extent 1, keeping the
/// tap sum exactly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianKernel {
    pub kdims: (usize, usize, usize),
    pub taps: Vec<f64>,
}

impl LaplacianKernel {
    pub fn new(kdims: (usize, usize, usize)) -> Result<Self> {
        let (kd, kh, kw) = kdims;
        if kd % 2 == 0 || kh % 2 == 0 || kw % 2 == 0 {
            return Err(Error::invalid("kernel dims must be odd"));
        }
        let mut taps = vec![0.0; kd * kh * kw];
        let (cz, cy, cx) = (kd / 2, kh / 2, kw / 2);
        let idx = |z: usize, y: usize, x: usize| (z * kh + y) * kw + x;
        let mut neighbours = 0;
        let mut put = |z: usize, y: usize, x: usize, taps: &mut Vec<f64>| {
            taps[idx(z, y, x)] = 1.0;
            neighbours += 1;
        };
        if kd > 1 {
            put(cz - 1, cy, cx, &mut taps);
            put(cz + 1, cy, cx, &mut taps);
        }
        if kh > 1 {
            put(cz, cy - 1, cx, &mut taps);
            put(cz, cy + 1, cx, &mut taps);
        }
        if kw > 1 {
            put(cz, cy, cx - 1, &mut taps);
            put(cz, cy, cx + 1, &mut taps);
        }
        taps[idx(cz, cy, cx)] = -(neighbours as f64);
        Ok(LaplacianKernel { kdims, taps })
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.iter().sum()
    }
}

/// Weight state of one ALC layer: parameters, the Laplacian benchmark they
/// are pulled toward, the Fisher accumulator, and the freeze mask.
#[derive(Debug, Clone)]
pub struct AlcState {
    pub c_out: usize,
    pub c_in: usize,
    pub kdims: (usize, usize, usize),
    /// (c_out, c_in, kd, kh, kw), flattened.
    pub theta: Vec<f64>,
    pub benchmark: Vec<f64>,
    pub fisher: Vec<f64>,
    pub batches_seen: usize,
    pub mask: Vec<bool>,
    pub masked: bool,
}

impl AlcState {
    pub fn kvol(&self) -> usize {
        self.kdims.0 * self.kdims.1 * self.kdims.2
    }

    pub fn n_weights(&self) -> usize {
        self.c_out * self.c_in * self.kvol()
    }
}

/// Laplacian-initialized layer: every (c_out, c_in) kernel slice starts as
/// the benchmark stencil; Fisher zero; nothing frozen.
pub fn init_alc(c_out: usize, c_in: usize, kdims: (usize, usize, usize)) -> Result<AlcState> {
    if c_out == 0 || c_in == 0 {
        return Err(Error::invalid("channel counts must be >= 1"));
    }
    let lap = LaplacianKernel::new(kdims)?;
    let kvol = lap.taps.len();
    let n = c_out * c_in * kvol;
    let mut theta = Vec::with_capacity(n);
    for _ in 0..c_out * c_in {
        theta.extend_from_slice(&lap.taps);
    }
    Ok(AlcState {
        c_out,
        c_in,
        kdims,
        benchmark: theta.clone(),
        theta,
        fisher: vec![0.0; n],
        batches_seen: 0,
        mask: vec![false; n],
        masked: false,
    })
}

/// Pull-back distance sum_p (theta_p - benchmark_p)^2; the caller applies
/// its weight.
pub fn ewc_loss(state: &AlcState) -> f64 {
    state
        .theta
        .iter()
        .zip(&state.benchmark)
        .map(|(t, d)| (t - d) * (t - d))
        .sum()
}

/// Gradient of `ewc_loss` with respect to theta: 2 (theta - benchmark).
pub fn ewc_grad(state: &AlcState) -> Vec<f64> {
    state
        .theta
        .iter()
        .zip(&state.benchmark)
        .map(|(t, d)| 2.0 * (t - d))
        .collect()
}

/// Fold one gradient sample into the running mean of squared gradients:
/// after N calls, fisher_p = (1/N) sum_i g_{i,p}^2.
pub fn accumulate_fisher(state: &mut AlcState, grad: &[f64]) -> Result<()> {
    if grad.len() != state.fisher.len() {
        return Err(Error::shape("gradient shape differs from fisher"));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient sample".into()));
    }
    let n = state.batches_seen as f64;
    for (f, g) in state.fisher.iter_mut().zip(grad) {
        *f = (*f * n + g * g) / (n + 1.0);
    }
    state.batches_seen += 1;
    Ok(())
}

/// Mark weights whose Fisher value exceeds mean + k * population-std as
/// important (frozen). One-shot: masking twice is an error.
pub fn compute_mask(state: &mut AlcState, k: f64) -> Result<()> {
    if state.masked {
        return Err(Error::invalid("importance mask already computed"));
    }
    if state.batches_seen == 0 {
        return Err(Error::invalid("no Fisher batches accumulated"));
    }
    let n = state.fisher.len() as f64;
    let mu = state.fisher.iter().sum::<f64>() / n;
    let var = state.fisher.iter().map(|f| (f - mu) * (f - mu)).sum::<f64>() / n;
    let thresh = mu + k * var.sqrt();
    for (m, f) in state.mask.iter_mut().zip(&state.fisher) {
        *m = *f > thresh;
    }
    state.masked = true;
    Ok(())
}

/// Zero the gradient of every frozen weight.
pub fn apply_freeze(state: &AlcState, grad: &mut [f64]) -> Result<()> {
    if !state.masked {
        return Err(Error::invalid("freeze applied before masking"));
    }
    if grad.len() != state.mask.len() {
        return Err(Error::shape("gradient shape differs from mask"));
    }
    for (g, &m) in grad.iter_mut().zip(&state.mask) {
        if m {
            *g = 0.0;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Demo problem: one 3D convolution layer, MSE to a synthetic HF target
// ---------------------------------------------------------------------------

/// Fixed regression problem for the demo: input channels, targets produced
/// by a perturbed Laplacian (so the data term and the benchmark pull-back
/// disagree), and the layer geometry.
pub struct DemoProblem {
    pub input: Vec<Volume3D>,
    pub target: Vec<Volume3D>,
    pub c_out: usize,
    pub kdims: (usize, usize, usize),
}

/// Anchored 3D convolution with zero extension, one output channel:
/// out[x] = sum_i sum_k theta[i][k] in_i[x + off(k)].
fn conv3d_out(
    input: &[Volume3D],
    theta: &[f64],
    kdims: (usize, usize, usize),
    o: usize,
    c_in: usize,
) -> Volume3D {
    let (d, h, w) = input[0].dims;
    let (kd, kh, kw) = kdims;
    let kvol = kd * kh * kw;
    let (az, ay, ax) = (kd as isize / 2, kh as isize / 2, kw as isize / 2);
    let mut out = Volume3D::zeros((d, h, w));
    for i in 0..c_in {
        let taps = &theta[(o * c_in + i) * kvol..(o * c_in + i + 1) * kvol];
        let vol = &input[i];
        for (kidx, &t) in taps.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let dz = (kidx / (kh * kw)) as isize - az;
            let dy = ((kidx / kw) % kh) as isize - ay;
            let dx = (kidx % kw) as isize - ax;
            for z in 0..d as isize {
                let sz = z - dz;
                if sz < 0 || sz >= d as isize {
                    continue;
                }
                for y in 0..h as isize {
                    let sy = y - dy;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for x in 0..w as isize {
                        let sx = x - dx;
                        if sx < 0 || sx >= w as isize {
                            continue;
                        }
                        let v = vol.get(sz as usize, sy as usize, sx as usize);
                        out.data[(z as usize * h + y as usize) * w + x as usize] += t * v;
                    }
                }
            }
        }
    }
    out
}

impl DemoProblem {
    /// Build the regression problem: targets come from a benchmark kernel
    /// perturbed by seeded noise (amplitude 0.3).
    pub fn new(mm: &MultiModalVolume, c_out: usize, kdims: (usize, usize, usize), seed: u64) -> Result<Self> {
        let input: Vec<Volume3D> = mm.modalities.iter().map(|(_, v)| v.clone()).collect();
        let c_in = input.len();
        let lap = LaplacianKernel::new(kdims)?;
        let kvol = lap.taps.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut target_theta = Vec::with_capacity(c_out * c_in * kvol);
        for _ in 0..c_out * c_in {
            for &t in &lap.taps {
                target_theta.push(t + 0.3 * rng.gen_range(-1.0..1.0));
            }
        }
        let target = (0..c_out)
            .map(|o| conv3d_out(&input, &target_theta, kdims, o, c_in))
            .collect();
        Ok(DemoProblem {
            input,
            target,
            c_out,
            kdims,
        })
    }

    fn c_in(&self) -> usize {
        self.input.len()
    }

    fn n_out(&self) -> f64 {
        let (d, h, w) = self.input[0].dims;
        (self.c_out * d * h * w) as f64
    }

    /// Data term: mean squared error over all output voxels.
    pub fn mse(&self, theta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for o in 0..self.c_out {
            let out = conv3d_out(&self.input, theta, self.kdims, o, self.c_in());
            acc += out
                .data
                .iter()
                .zip(&self.target[o].data)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        acc / self.n_out()
    }

    /// Analytic MSE gradient (convolution adjoint: correlation of the
    /// residual with the input at each tap offset).
    pub fn mse_grad(&self, theta: &[f64]) -> Vec<f64> {
        let (d, h, w) = self.input[0].dims;
        let (kd, kh, kw) = self.kdims;
        let kvol = kd * kh * kw;
        let (az, ay, ax) = (kd as isize / 2, kh as isize / 2, kw as isize / 2);
        let c_in = self.c_in();
        let mut grad = vec![0.0; theta.len()];
        for o in 0..self.c_out {
            let out = conv3d_out(&self.input, theta, self.kdims, o, c_in);
            let resid: Vec<f64> = out
                .data
                .iter()
                .zip(&self.target[o].data)
                .map(|(a, b)| a - b)
                .collect();
            for i in 0..c_in {
                let vol = &self.input[i];
                let g = &mut grad[(o * c_in + i) * kvol..(o * c_in + i + 1) * kvol];
                for (kidx, gk) in g.iter_mut().enumerate() {
                    let dz = (kidx / (kh * kw)) as isize - az;
                    let dy = ((kidx / kw) % kh) as isize - ay;
                    let dx = (kidx % kw) as isize - ax;
                    let mut s = 0.0;
                    for z in 0..d as isize {
                        let sz = z - dz;
                        if sz < 0 || sz >= d as isize {
                            continue;
                        }
                        for y in 0..h as isize {
                            let sy = y - dy;
                            if sy < 0 || sy >= h as isize {
                                continue;
                            }
                            for x in 0..w as isize {
                                let sx = x - dx;
                                if sx < 0 || sx >= w as isize {
                                    continue;
                                }
                                s += resid[(z as usize * h + y as usize) * w + x as usize]
                                    * vol.get(sz as usize, sy as usize, sx as usize);
                            }
                        }
                    }
                    *gk = 2.0 * s / self.n_out();
                }
            }
        }
        grad
    }
}

/// One row of the demo training trace.
#[derive(Debug, Clone, Serialize)]
pub struct AlcTraceStep {
    pub step: usize,
    pub loss: f64,
    pub theta_hash: u64,
    pub frozen: usize,
}

/// Demo result: the trace, the final state, and the invariant check that
/// frozen weights never moved after masking.
pub struct AlcDemoResult {
    pub trace: Vec<AlcTraceStep>,
    pub state: AlcState,
    pub frozen_bits_stable: bool,
}

/// FNV-1a over the raw f64 bits of the parameter vector.
pub fn theta_hash(theta: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in theta {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Train the demo layer with plain gradient descent (momentum 0.9):
/// accumulate Fisher during warm-up, mask at `warmup_steps`, freeze the
/// important weights (their momentum is zeroed so they stay bit-identical).
pub fn alc_demo_train(
    mm: &MultiModalVolume,
    steps: usize,
    lr: f64,
    lambda2: f64,
    warmup_steps: usize,
    k: f64,
    seed: u64,
) -> Result<AlcDemoResult> {
    if steps <= warmup_steps {
        return Err(Error::invalid("steps must exceed warmup_steps"));
    }
    let kdims = (3, 3, 3);
    let c_out = 2;
    let problem = DemoProblem::new(mm, c_out, kdims, seed)?;
    let mut state = init_alc(c_out, problem.c_in(), kdims)?;
    let mut velocity = vec![0.0; state.n_weights()];
    let mut trace = Vec::with_capacity(steps);
    let mut frozen_snapshot: Vec<(usize, u64)> = Vec::new();
    for step in 0..steps {
        let mut grad = problem.mse_grad(&state.theta);
        for (g, e) in grad.iter_mut().zip(ewc_grad(&state)) {
            *g += lambda2 * e;
        }
        let loss = problem.mse(&state.theta) + lambda2 * ewc_loss(&state);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("demo diverged at step {step}")));
        }
        if step < warmup_steps {
            accumulate_fisher(&mut state, &grad)?;
        }
        if step == warmup_steps {
            compute_mask(&mut state, k)?;
            // frozen weights must not move: drop their momentum too
            for (v, &m) in velocity.iter_mut().zip(&state.mask) {
                if m {
                    *v = 0.0;
                }
            }
            frozen_snapshot = state
                .mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| (i, state.theta[i].to_bits()))
                .collect();
        }
        if state.masked {
            apply_freeze(&state, &mut grad)?;
        }
        // warm-up only estimates Fisher; descent starts after masking
        if step >= warmup_steps {
            for ((t, v), g) in state.theta.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = 0.9 * *v + g;
                *t -= lr * *v;
            }
        }
        trace.push(AlcTraceStep {
            step,
            loss,
            theta_hash: theta_hash(&state.theta),
            frozen: state.mask.iter().filter(|&&m| m).count(),
        });
    }
    let frozen_bits_stable = frozen_snapshot
        .iter()
        .all(|&(i, bits)| state.theta[i].to_bits() == bits);
    Ok(AlcDemoResult {
        trace,
        state,
        frozen_bits_stable,
    })
}

/// Distance of the trained weights from the Laplacian benchmark.
pub fn benchmark_distance(state: &AlcState) -> f64 {
    ewc_loss(state).sqrt()
}

/// Deterministic standard-normal vector (used by tests and the CLI demos).
pub fn seeded_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, 1.0).expect("valid normal");
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{make_phantom_stack, PhantomKind};
    use rand::{Rng, SeedableRng};

    fn demo_input() -> MultiModalVolume {
        make_phantom_stack(PhantomKind::TexturedShell, (16, 16, 16), 11, 2).unwrap()
    }

    #[test]
    fn laplacian_zero_dc_and_init_contract() {
        let lap = LaplacianKernel::new((3, 3, 3)).unwrap();
        assert_eq!(lap.dc_gain(), 0.0);
        assert_eq!(lap.taps[13], -6.0);
        assert_eq!(lap.taps.iter().filter(|&&t| t == 1.0).count(), 6);
        assert!(LaplacianKernel::new((3, 2, 3)).is_err());

        let state = init_alc(2, 3, (3, 3, 3)).unwrap();
        assert_eq!(state.n_weights(), 2 * 3 * 27);
        for s in 0..6 {
            let slice = &state.theta[s * 27..(s + 1) * 27];
            assert_eq!(slice, &lap.taps[..]);
            assert_eq!(slice.iter().sum::<f64>(), 0.0);
        }
        assert!(state.fisher.iter().all(|&f| f == 0.0));
        assert!(state.mask.iter().all(|&m| !m));
    }

    #[test]
    fn laplacian_annihilates_constants_in_interior() {
        let state = init_alc(1, 1, (3, 3, 3)).unwrap();
        let c = Volume3D::from_vec((8, 8, 8), vec![0.4; 512]).unwrap();
        let out = conv3d_out(&[c], &state.theta, (3, 3, 3), 0, 1);
        for z in 1..7 {
            for y in 1..7 {
                for x in 1..7 {
                    assert!(out.get(z, y, x).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn ewc_loss_cases() {
        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        assert_eq!(ewc_loss(&state), 0.0);
        state.theta[5] += 0.25;
        assert!((ewc_loss(&state) - 0.0625).abs() < 1e-15);
        // brute-force oracle on random theta
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in state.theta.iter_mut() {
            *t = rng.gen_range(-1.0..1.0);
        }
        let brute: f64 = state
            .theta
            .iter()
            .zip(&state.benchmark)
            .map(|(t, d)| (t - d).powi(2))
            .sum();
        assert!((ewc_loss(&state) - brute).abs() < 1e-12);
    }

    #[test]
    fn ewc_grad_matches_finite_differences() {
        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in state.theta.iter_mut() {
            *t = rng.gen_range(-1.0..1.0);
        }
        let grad = ewc_grad(&state);
        // central differences are exact for a quadratic, so a large step
        // minimizes cancellation error
        let eps = 1e-3;
        for p in [0, 7, 26] {
            let mut s = state.clone();
            s.theta[p] += eps;
            let up = ewc_loss(&s);
            s.theta[p] -= 2.0 * eps;
            let dn = ewc_loss(&s);
            let fd = (up - dn) / (2.0 * eps);
            assert!((fd - grad[p]).abs() < 1e-10 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn fisher_running_mean_and_sign_invariance() {
        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        let g: Vec<f64> = (0..27).map(|i| i as f64 * 0.1 - 1.0).collect();
        accumulate_fisher(&mut state, &g).unwrap();
        for (f, gi) in state.fisher.iter().zip(&g) {
            assert!((f - gi * gi).abs() < 1e-15);
        }
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        accumulate_fisher(&mut state, &neg).unwrap();
        for (f, gi) in state.fisher.iter().zip(&g) {
            assert!((f - gi * gi).abs() < 1e-15);
        }
        assert_eq!(state.batches_seen, 2);
        assert!(accumulate_fisher(&mut state, &[0.0; 3]).is_err());
    }

    #[test]
    fn fisher_brute_force_and_permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grads: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..27).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let mut a = init_alc(1, 1, (3, 3, 3)).unwrap();
        for g in &grads {
            accumulate_fisher(&mut a, g).unwrap();
        }
        // brute force
        for p in 0..27 {
            let want: f64 = grads.iter().map(|g| g[p] * g[p]).sum::<f64>() / 5.0;
            assert!((a.fisher[p] - want).abs() < 1e-12);
        }
        // permuted order
        let mut b = init_alc(1, 1, (3, 3, 3)).unwrap();
        for i in [3usize, 0, 4, 1, 2] {
            accumulate_fisher(&mut b, &grads[i]).unwrap();
        }
        for (x, y) in a.fisher.iter().zip(&b.fisher) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_uniform_outlier_and_sentinel() {
        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        state.batches_seen = 1;
        state.fisher = vec![2.0; 27];
        compute_mask(&mut state, 1.0).unwrap();
        assert!(state.mask.iter().all(|&m| !m));
        assert!(compute_mask(&mut state, 1.0).is_err()); // twice

        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        state.batches_seen = 1;
        state.fisher = vec![0.0; 27];
        state.fisher[9] = 100.0;
        compute_mask(&mut state, 1.0).unwrap();
        // direct mu/sigma on the constructed vector
        let mu: f64 = 100.0 / 27.0;
        let sigma = ((26.0 * mu * mu + (100.0 - mu) * (100.0 - mu)) / 27.0).sqrt();
        assert!(100.0 > mu + sigma && 0.0 < mu + sigma);
        for (i, &m) in state.mask.iter().enumerate() {
            assert_eq!(m, i == 9);
        }

        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        state.batches_seen = 1;
        state.fisher = (0..27).map(|i| 0.1 + i as f64).collect();
        compute_mask(&mut state, -1e18).unwrap();
        assert!(state.mask.iter().all(|&m| m));

        let mut fresh = init_alc(1, 1, (3, 3, 3)).unwrap();
        assert!(compute_mask(&mut fresh, 1.0).is_err()); // zero batches
    }

    #[test]
    fn freeze_elementwise() {
        let mut state = init_alc(1, 1, (3, 3, 3)).unwrap();
        let g0: Vec<f64> = (0..27).map(|i| i as f64).collect();
        let mut g = g0.clone();
        assert!(apply_freeze(&state, &mut g).is_err()); // before masking
        state.masked = true;
        state.mask = (0..27).map(|i| i % 3 == 0).collect();
        apply_freeze(&state, &mut g).unwrap();
        for i in 0..27 {
            assert_eq!(g[i], if i % 3 == 0 { 0.0 } else { g0[i] });
        }
    }

    #[test]
    fn demo_gradient_matches_finite_differences() {
        let mm = demo_input();
        let problem = DemoProblem::new(&mm, 2, (3, 3, 3), 5).unwrap();
        let state = init_alc(2, 2, (3, 3, 3)).unwrap();
        let mut theta = state.theta.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in theta.iter_mut() {
            *t += rng.gen_range(-0.2..0.2);
        }
        let grad = problem.mse_grad(&theta);
        let eps = 1e-4;
        let mut probes: Vec<usize> = (0..10).map(|_| rng.gen_range(0..theta.len())).collect();
        probes.dedup();
        for p in probes {
            let mut th = theta.clone();
            th[p] += eps;
            let up = problem.mse(&th);
            th[p] -= 2.0 * eps;
            let dn = problem.mse(&th);
            let fd = (up - dn) / (2.0 * eps);
            let rel = (fd - grad[p]).abs() / fd.abs().max(grad[p].abs()).max(1e-8);
            assert!(rel < 1e-5, "weight {p}: rel err {rel:.2e}");
        }
    }

    #[test]
    fn demo_lr_zero_is_constant() {
        let mm = demo_input();
        let res = alc_demo_train(&mm, 12, 0.0, 5e-6, 5, 1.0, 7).unwrap();
        let h0 = res.trace[0].theta_hash;
        assert!(res.trace.iter().all(|s| s.theta_hash == h0));
        let l0 = res.trace[0].loss;
        assert!(res.trace.iter().all(|s| (s.loss - l0).abs() < 1e-15));
    }

    #[test]
    fn demo_frozen_weights_bit_identical() {
        let mm = demo_input();
        let res = alc_demo_train(&mm, 40, 0.05, 5e-6, 10, 0.5, 7).unwrap();
        assert!(res.frozen_bits_stable);
        assert!(res.state.mask.iter().any(|&m| m), "mask froze nothing");
        assert!(res.state.mask.iter().any(|&m| !m), "mask froze everything");
        // loss should actually improve on the unfrozen weights
        assert!(res.trace.last().unwrap().loss < res.trace[0].loss);
    }

    #[test]
    fn demo_full_freeze_preserves_zero_dc_exactly() {
        // freezing every weight (sentinel k) keeps each kernel slice's DC
        // gain at exactly 0 through training
        let mm = demo_input();
        let res = alc_demo_train(&mm, 20, 0.05, 5e-6, 5, -1e18, 7).unwrap();
        assert!(res.state.mask.iter().all(|&m| m));
        let kvol = res.state.kvol();
        for s in 0..res.state.c_out * res.state.c_in {
            let dc: f64 = res.state.theta[s * kvol..(s + 1) * kvol].iter().sum();
            assert_eq!(dc, 0.0);
        }
    }

    #[test]
    fn demo_benchmark_distance_monotone_in_lambda2() {
        let mm = demo_input();
        let mut dists = Vec::new();
        for lambda2 in [5e-6, 5e-3, 5e0] {
            let res = alc_demo_train(&mm, 60, 0.05, lambda2, 10, 1.0, 7).unwrap();
            dists.push(benchmark_distance(&res.state));
        }
        assert!(
            dists[0] >= dists[1] && dists[1] >= dists[2],
            "distances {dists:?} not nonincreasing"
        );
        assert!(dists[2] < dists[0], "no pull-back effect visible");
    }
}
