//! Command-line surface: one binary, subcommand per workflow. Exit codes:
//! 0 success, 2 usage error, 1 runtime error. All randomness sits behind
//! `--seed`; `--json` switches every subcommand to machine-readable output
//! with schema version "1".

use crate::alc::{alc_demo_train, benchmark_distance};
use crate::dtcwt::{dtcwt_level1, idtcwt_level1, lowpass_magnitude, ComplexPlane, DtcwtLevel1};
use crate::dwt::{dwt2_level1, idwt2_level1, Subbands2D};
use crate::error::{Error, Result};
use crate::fdca::{fdca_apply, fdca_apply_with_maps, AttentionMaps, FdcaParams, FeatureMap};
use crate::fdd::{fdd_decompose, FddConfig, Strategy};
use crate::filterbank::FilterBank1D;
use crate::io::{
    make_phantom_stack, read_raw, write_raw, ChannelVolume, LabelVolume, MultiModalVolume,
    PhantomKind, Volume3D,
};
use crate::loss::{dfl, dice_loss, lambda_schedule, total_loss, LossWeights, Prediction};
use crate::metrics::{dice_score, freq_entropy, hd95, shift_invariance_score_of};
use crate::nsct::{aliasing_energy, nsct_reconstruct, NsctConfig, NsctDecomposition};
use crate::plane::Plane;
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Parser, Debug)]
#[command(
    name = "freqdec",
    version,
    about = "Volumetric frequency-domain decomposition toolkit"
)]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for per-slice parallelism (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a synthetic phantom volume file.
    Phantom {
        /// smooth-blob | textured-shell | oriented-stripes(DEG) | checker
        #[arg(long)]
        kind: String,
        /// Volume dims as D,H,W (each >= 16).
        #[arg(long)]
        dims: String,
        /// Number of modalities (channels).
        #[arg(long, default_value_t = 1)]
        modalities: usize,
        out: PathBuf,
    },
    /// Split a volume into low- and high-frequency channel stacks.
    Decompose {
        /// LF/HF transform pair, e.g. "dtcwt/nsct" (single name = both).
        #[arg(long, default_value = "dtcwt/nsct")]
        strategy: String,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        dirs: usize,
        /// Write raw invertible coefficients instead of the LF/HF stacks
        /// (single transform name required in --strategy; one output file).
        #[arg(long)]
        keep_coeffs: bool,
        input: PathBuf,
        out_l: PathBuf,
        /// HF output (omitted with --keep-coeffs).
        out_h: Option<PathBuf>,
    },
    /// Invert a coefficient file written by `decompose --keep-coeffs`.
    Reconstruct {
        /// Transform the coefficients came from: dwt | dtcwt | nsct.
        #[arg(long)]
        transform: String,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        dirs: usize,
        coeffs: PathBuf,
        out: PathBuf,
    },
    /// Per-channel spectral entropy, shift-invariance, and aliasing report.
    Analyze {
        input: PathBuf,
        /// Shift range K for the shift-invariance score.
        #[arg(long, default_value_t = 4)]
        shift_k: usize,
    },
    /// Train the consolidation demo and report the freeze behaviour.
    AlcDemo {
        #[arg(long, default_value_t = 40)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 5e-6)]
        lambda2: f64,
        #[arg(long, default_value_t = 10)]
        warmup: usize,
        #[arg(long, default_value_t = 0.5)]
        k: f64,
        #[arg(long, default_value = "16,16,16")]
        dims: String,
        #[arg(long, default_value_t = 2)]
        modalities: usize,
    },
    /// Run frequency-domain cross-attention on a random feature map.
    FdcaDemo {
        #[arg(long, default_value_t = 2)]
        c: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long = "h", default_value_t = 16)]
        height: usize,
        #[arg(long = "w", default_value_t = 16)]
        width: usize,
    },
    /// Evaluate the composite loss on seeded random predictions.
    LossEval {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 5e-6)]
        lambda2: f64,
        #[arg(long, default_value_t = 15.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 40.0)]
        t: f64,
        #[arg(long, default_value_t = 40.0)]
        t_total: f64,
        #[arg(long, default_value = "8,8,8")]
        dims: String,
        #[arg(long, default_value_t = 3)]
        classes: usize,
    },
    /// Dice / HD95 between a prediction and a ground-truth label volume.
    Evaluate {
        pred: PathBuf,
        gt: PathBuf,
        /// Class label to score.
        #[arg(long, default_value_t = 1)]
        cls: u16,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Voxel spacing as D,H,W.
        #[arg(long, default_value = "1,1,1")]
        spacing: String,
    },
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::invalid(format!("expected D,H,W, got '{s}'")));
    }
    let mut v = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad number '{p}'")))?;
    }
    Ok((v[0], v[1], v[2]))
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize)> {
    let (d, h, w) = parse_triple(s)?;
    if d.fract() != 0.0 || h.fract() != 0.0 || w.fract() != 0.0 || d < 1.0 || h < 1.0 || w < 1.0 {
        return Err(Error::invalid(format!("dims must be positive integers, got '{s}'")));
    }
    Ok((d as usize, h as usize, w as usize))
}

fn channels_as_modalities(cv: ChannelVolume) -> Result<MultiModalVolume> {
    MultiModalVolume::new(
        cv.channels
            .into_iter()
            .enumerate()
            .map(|(i, v)| (format!("ch{i}"), v))
            .collect(),
    )
}

/// Stack one coefficient plane per slice into a volume.
fn volume_of(d: usize, planes: &[Plane]) -> Volume3D {
    let (h, w) = (planes[0].h, planes[0].w);
    Volume3D::from_slices((d, h, w), |z| planes[z].clone())
}

fn coeff_channels(vol: &Volume3D, transform: Strategy, nsct: NsctConfig) -> Result<Vec<Volume3D>> {
    let (d, _, _) = vol.dims;
    match transform {
        Strategy::Dwt => {
            let bank = FilterBank1D::haar();
            let subs: Vec<Subbands2D> = (0..d)
                .map(|z| dwt2_level1(&vol.slice(z), &bank))
                .collect::<Result<_>>()?;
            Ok([
                |s: &Subbands2D| s.ll.clone(),
                |s: &Subbands2D| s.lh.clone(),
                |s: &Subbands2D| s.hl.clone(),
                |s: &Subbands2D| s.hh.clone(),
            ]
            .iter()
            .map(|f| volume_of(d, &subs.iter().map(f).collect::<Vec<_>>()))
            .collect())
        }
        Strategy::Dtcwt => {
            let decs: Vec<DtcwtLevel1> = (0..d)
                .map(|z| dtcwt_level1(&vol.slice(z)))
                .collect::<Result<_>>()?;
            let mut chans = Vec::with_capacity(16);
            let pick = |f: &dyn Fn(&DtcwtLevel1) -> Plane| {
                volume_of(d, &decs.iter().map(f).collect::<Vec<_>>())
            };
            chans.push(pick(&|x| x.lf.re.clone()));
            chans.push(pick(&|x| x.lf.im.clone()));
            chans.push(pick(&|x| x.lf_cross.0.clone()));
            chans.push(pick(&|x| x.lf_cross.1.clone()));
            for b in 0..6 {
                chans.push(pick(&move |x| x.hf[b].re.clone()));
                chans.push(pick(&move |x| x.hf[b].im.clone()));
            }
            Ok(chans)
        }
        Strategy::Nsct => {
            let decs: Vec<NsctDecomposition> = (0..d)
                .map(|z| crate::nsct::nsct_decompose(&vol.slice(z), nsct))
                .collect::<Result<_>>()?;
            let mut chans = Vec::with_capacity(1 + nsct.levels * nsct.directions);
            chans.push(volume_of(
                d,
                &decs.iter().map(|x| x.lowpass.clone()).collect::<Vec<_>>(),
            ));
            for lv in 0..nsct.levels {
                for dir in 0..nsct.directions {
                    chans.push(volume_of(
                        d,
                        &decs.iter().map(|x| x.bands[lv][dir].clone()).collect::<Vec<_>>(),
                    ));
                }
            }
            Ok(chans)
        }
    }
}

fn coeff_count(transform: Strategy, nsct: NsctConfig) -> usize {
    match transform {
        Strategy::Dwt => 4,
        Strategy::Dtcwt => 16,
        Strategy::Nsct => 1 + nsct.levels * nsct.directions,
    }
}

fn reconstruct_modality(
    chans: &[Volume3D],
    transform: Strategy,
    nsct: NsctConfig,
) -> Result<Volume3D> {
    let (d, h, w) = chans[0].dims;
    match transform {
        Strategy::Dwt => {
            let bank = FilterBank1D::haar();
            Ok(Volume3D::from_slices((d, 2 * h, 2 * w), |z| {
                let sub = Subbands2D {
                    ll: chans[0].slice(z),
                    lh: chans[1].slice(z),
                    hl: chans[2].slice(z),
                    hh: chans[3].slice(z),
                    orig_dims: (2 * h, 2 * w),
                };
                idwt2_level1(&sub, &bank).expect("coefficient dims are consistent")
            }))
        }
        Strategy::Dtcwt => Ok(Volume3D::from_slices((d, 2 * h, 2 * w), |z| {
            let hf: Vec<ComplexPlane> = (0..6)
                .map(|b| ComplexPlane {
                    re: chans[4 + 2 * b].slice(z),
                    im: chans[5 + 2 * b].slice(z),
                })
                .collect();
            let dec = DtcwtLevel1 {
                lf: ComplexPlane {
                    re: chans[0].slice(z),
                    im: chans[1].slice(z),
                },
                lf_cross: (chans[2].slice(z), chans[3].slice(z)),
                hf: hf.try_into().expect("six bands"),
                orig_dims: (2 * h, 2 * w),
            };
            idtcwt_level1(&dec).expect("coefficient dims are consistent")
        })),
        Strategy::Nsct => Ok(Volume3D::from_slices((d, h, w), |z| {
            let dec = NsctDecomposition {
                lowpass: chans[0].slice(z),
                bands: (0..nsct.levels)
                    .map(|lv| {
                        (0..nsct.directions)
                            .map(|dir| chans[1 + lv * nsct.directions + dir].slice(z))
                            .collect()
                    })
                    .collect(),
            };
            nsct_reconstruct(&dec, nsct).expect("coefficient dims are consistent")
        })),
    }
}

fn softmax_prediction(classes: usize, dims: (usize, usize, usize), rng: &mut ChaCha8Rng) -> Prediction {
    let n = dims.0 * dims.1 * dims.2;
    let mut data = vec![0.0; classes * n];
    for v in 0..n {
        let raw: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (c, r) in raw.iter().enumerate() {
            data[c * n + v] = r / s;
        }
    }
    Prediction::new(classes, dims, data).expect("normalized by construction")
}

fn dtcwt_lf_rep(p: &Plane) -> Result<Plane> {
    Ok(lowpass_magnitude(&dtcwt_level1(p)?).upsample2_bilinear())
}

fn dwt_ll_rep(p: &Plane) -> Result<Plane> {
    Ok(dwt2_level1(p, &FilterBank1D::haar())?.ll.upsample2_bilinear())
}

fn stat_line(name: &str, v: &[f64]) -> String {
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    format!("{name:<10} min {min:.4}  mean {mean:.4}  max {max:.4}")
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Some(t) = cli.threads {
        // a global pool may already exist (e.g. in tests); that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.cmd {
        Cmd::Phantom {
            kind,
            dims,
            modalities,
            out: path,
        } => {
            let kind: PhantomKind = kind.parse()?;
            let dims = parse_dims(&dims)?;
            let mm = make_phantom_stack(kind, dims, cli.seed, modalities)?;
            let cv = ChannelVolume::new(mm.modalities.into_iter().map(|(_, v)| v).collect())?;
            write_raw(&cv, &path)?;
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "phantom",
                        "dims": [dims.0, dims.1, dims.2],
                        "modalities": modalities,
                        "seed": cli.seed,
                        "path": path.display().to_string(),
                    })
                )?;
            } else {
                writeln!(
                    out,
                    "wrote {} ({}x{}x{}, {} modalities, seed {})",
                    path.display(),
                    dims.0,
                    dims.1,
                    dims.2,
                    modalities,
                    cli.seed
                )?;
            }
        }
        Cmd::Decompose {
            strategy,
            levels,
            dirs,
            keep_coeffs,
            input,
            out_l,
            out_h,
        } => {
            let nsct = NsctConfig::new(levels, dirs)?;
            let mm = channels_as_modalities(read_raw(&input)?)?;
            if keep_coeffs {
                if out_h.is_some() {
                    return Err(Error::invalid("--keep-coeffs writes a single output file"));
                }
                let transform: Strategy = strategy.parse().map_err(|_| {
                    Error::invalid("--keep-coeffs needs one transform name in --strategy")
                })?;
                let mut chans = Vec::new();
                for (_, vol) in &mm.modalities {
                    chans.extend(coeff_channels(vol, transform, nsct)?);
                }
                let cv = ChannelVolume::new(chans)?;
                write_raw(&cv, &out_l)?;
                if cli.json {
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "schema_version": SCHEMA_VERSION,
                            "command": "decompose",
                            "mode": "coeffs",
                            "transform": transform.to_string(),
                            "channels": cv.c(),
                            "path": out_l.display().to_string(),
                        })
                    )?;
                } else {
                    writeln!(
                        out,
                        "wrote {} coefficient channels ({transform}) to {}",
                        cv.c(),
                        out_l.display()
                    )?;
                }
                return Ok(());
            }
            let out_h =
                out_h.ok_or_else(|| Error::invalid("decompose needs OUT_L and OUT_H files"))?;
            let (lf_s, hf_s) = match strategy.split_once('/') {
                Some((a, b)) => (a.parse::<Strategy>()?, b.parse::<Strategy>()?),
                None => {
                    let s: Strategy = strategy.parse()?;
                    (s, s)
                }
            };
            let cfg = FddConfig {
                lf_strategy: lf_s,
                hf_strategy: hf_s,
                nsct,
            };
            let split = fdd_decompose(&mm, cfg)?;
            let (cl, ch) = (split.x_l.c(), split.x_h.c());
            write_raw(&split.x_l, &out_l)?;
            write_raw(&split.x_h, &out_h)?;
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "decompose",
                        "mode": "fdd",
                        "lf_strategy": lf_s.to_string(),
                        "hf_strategy": hf_s.to_string(),
                        "lf_channels": cl,
                        "hf_channels": ch,
                        "lf_path": out_l.display().to_string(),
                        "hf_path": out_h.display().to_string(),
                    })
                )?;
            } else {
                writeln!(
                    out,
                    "wrote LF {} ({cl} channels) and HF {} ({ch} channels)",
                    out_l.display(),
                    out_h.display()
                )?;
            }
        }
        Cmd::Reconstruct {
            transform,
            levels,
            dirs,
            coeffs,
            out: path,
        } => {
            let transform: Strategy = transform.parse()?;
            let nsct = NsctConfig::new(levels, dirs)?;
            let cv = read_raw(&coeffs)?;
            let per = coeff_count(transform, nsct);
            if cv.c() % per != 0 {
                return Err(Error::shape(format!(
                    "{} channels is not a multiple of {per} ({transform} coefficients)",
                    cv.c()
                )));
            }
            let m = cv.c() / per;
            let mut modalities = Vec::with_capacity(m);
            for i in 0..m {
                modalities.push(reconstruct_modality(
                    &cv.channels[i * per..(i + 1) * per],
                    transform,
                    nsct,
                )?);
            }
            let rec = ChannelVolume::new(modalities)?;
            let dims = rec.dims();
            write_raw(&rec, &path)?;
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "reconstruct",
                        "transform": transform.to_string(),
                        "modalities": m,
                        "dims": [dims.0, dims.1, dims.2],
                        "path": path.display().to_string(),
                    })
                )?;
            } else {
                writeln!(
                    out,
                    "reconstructed {m} modalities ({}x{}x{}) to {}",
                    dims.0,
                    dims.1,
                    dims.2,
                    path.display()
                )?;
            }
        }
        Cmd::Analyze { input, shift_k } => {
            let cv = read_raw(&input)?;
            let (d, h, w) = cv.dims();
            let mid = d / 2;
            let mut rows = Vec::new();
            for (i, ch) in cv.channels.iter().enumerate() {
                let entropy = freq_entropy(ch).ok();
                let slice = ch.slice(mid);
                let s_dtcwt = shift_invariance_score_of(dtcwt_lf_rep, &slice, shift_k).ok();
                let s_dwt = shift_invariance_score_of(dwt_ll_rep, &slice, shift_k).ok();
                let alias = aliasing_energy(&slice).ok();
                rows.push((i, entropy, s_dtcwt, s_dwt, alias));
            }
            if cli.json {
                let channels: Vec<_> = rows
                    .iter()
                    .map(|(i, e, sd, sw, al)| {
                        json!({
                            "index": i,
                            "entropy": e,
                            "s_dtcwt_lf": sd,
                            "s_dwt_ll": sw,
                            "aliased_energy": al.map(|a| a.0),
                            "nonsubsampled_energy": al.map(|a| a.1),
                        })
                    })
                    .collect();
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "analyze",
                        "dims": [d, h, w],
                        "shift_k": shift_k,
                        "channels": channels,
                    })
                )?;
            } else {
                writeln!(out, "channel  entropy  S(dtcwt-lf)  S(dwt-ll)  aliased  nonsub")?;
                let fmt = |v: Option<f64>| match v {
                    Some(x) => format!("{x:.4}"),
                    None => "-".into(),
                };
                for (i, e, sd, sw, al) in rows {
                    writeln!(
                        out,
                        "{i:>7}  {:>7}  {:>11}  {:>9}  {:>7}  {:>6}",
                        fmt(e),
                        fmt(sd),
                        fmt(sw),
                        fmt(al.map(|a| a.0)),
                        fmt(al.map(|a| a.1)),
                    )?;
                }
            }
        }
        Cmd::AlcDemo {
            steps,
            lr,
            lambda2,
            warmup,
            k,
            dims,
            modalities,
        } => {
            let dims = parse_dims(&dims)?;
            let mm = make_phantom_stack(PhantomKind::TexturedShell, dims, cli.seed, modalities)?;
            let res = alc_demo_train(&mm, steps, lr, lambda2, warmup, k, cli.seed)?;
            let frozen = res.state.mask.iter().filter(|&&m| m).count();
            let first = &res.trace[0];
            let last = res.trace.last().expect("nonempty trace");
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "alc-demo",
                        "steps": steps,
                        "loss_first": first.loss,
                        "loss_last": last.loss,
                        "frozen": frozen,
                        "weights": res.state.n_weights(),
                        "frozen_bits_stable": res.frozen_bits_stable,
                        "benchmark_distance": benchmark_distance(&res.state),
                        "theta_hash": format!("{:016x}", last.theta_hash),
                    })
                )?;
            } else {
                writeln!(out, "loss: {:.6} -> {:.6} over {steps} steps", first.loss, last.loss)?;
                writeln!(
                    out,
                    "frozen {frozen}/{} weights after {warmup} warm-up batches (k={k})",
                    res.state.n_weights()
                )?;
                writeln!(out, "frozen weights bit-stable: {}", res.frozen_bits_stable)?;
                writeln!(out, "distance to benchmark: {:.6}", benchmark_distance(&res.state))?;
            }
        }
        Cmd::FdcaDemo {
            c,
            n,
            height,
            width,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let f = FeatureMap::from_fn(c, n, height, width, |_, _, _, _| rng.gen_range(-1.0..1.0))?;
            let params = FdcaParams::new(c, n, cli.seed)?;
            let res = fdca_apply(&f, &params, None)?;
            let ones = AttentionMaps {
                m_s: vec![1.0; c],
                m_p: vec![1.0; height * width],
                m_n: vec![1.0; n],
            };
            let (ident, _) = fdca_apply_with_maps(&f, &ones)?;
            let round_trip = ident.max_abs_diff(&f);
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "fdca-demo",
                        "dims": [c, n, height, width],
                        "m_s": res.maps.m_s,
                        "m_n": res.maps.m_n,
                        "m_p_mean": res.maps.m_p.iter().sum::<f64>() / res.maps.m_p.len() as f64,
                        "imag_residual": res.imag_residual,
                        "round_trip_residual": round_trip,
                    })
                )?;
            } else {
                writeln!(out, "{}", stat_line("semantic", &res.maps.m_s))?;
                writeln!(out, "{}", stat_line("positional", &res.maps.m_p))?;
                writeln!(out, "{}", stat_line("slice", &res.maps.m_n))?;
                writeln!(out, "imaginary residual after modulation: {:.3e}", res.imag_residual)?;
                writeln!(out, "identity-map round trip residual: {round_trip:.3e}")?;
            }
        }
        Cmd::LossEval {
            alpha,
            lambda2,
            lambda_max,
            t,
            t_total,
            dims,
            classes,
        } => {
            let dims = parse_dims(&dims)?;
            let n = dims.0 * dims.1 * dims.2;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let p_l = softmax_prediction(classes, dims, &mut rng);
            let p_h = softmax_prediction(classes, dims, &mut rng);
            let labels: Vec<u16> = (0..n).map(|_| rng.gen_range(0..classes as u16)).collect();
            let gt = LabelVolume::new(dims, classes, labels)?;
            let dice_l = dice_loss(&p_l, &gt)?;
            let dice_h = dice_loss(&p_h, &gt)?;
            let unsup = dfl(&p_l, &p_h, alpha)?;
            let weights = LossWeights::new(lambda2, alpha, lambda_max, t_total)?;
            let lambda1 = lambda_schedule(t, t_total, lambda_max)?;
            let total = total_loss(&[dice_l, dice_h], unsup, 0.0, &weights, t)?;
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "loss-eval",
                        "dice_loss_l": dice_l,
                        "dice_loss_h": dice_h,
                        "dfl": unsup,
                        "lambda1": lambda1,
                        "lambda2": lambda2,
                        "total": total,
                    })
                )?;
            } else {
                writeln!(out, "dice loss (LF branch): {dice_l:.6}")?;
                writeln!(out, "dice loss (HF branch): {dice_h:.6}")?;
                writeln!(out, "dynamic focal loss (alpha={alpha}): {unsup:.6}")?;
                writeln!(out, "lambda1({t}/{t_total}) = {lambda1:.4}, lambda2 = {lambda2:e}")?;
                writeln!(out, "total: {total:.6}")?;
            }
        }
        Cmd::Evaluate {
            pred,
            gt,
            cls,
            classes,
            spacing,
        } => {
            let spacing = parse_triple(&spacing)?;
            let to_labels = |cv: ChannelVolume| -> Result<LabelVolume> {
                let vol = &cv.channels[0];
                let data: Vec<u16> = vol.data.iter().map(|&v| v.round().max(0.0) as u16).collect();
                LabelVolume::new(vol.dims, classes, data)
            };
            let a = to_labels(read_raw(&pred)?)?;
            let b = to_labels(read_raw(&gt)?)?;
            let dice = dice_score(&a, &b, cls)?;
            let hd = hd95(&a, &b, cls, [spacing.0, spacing.1, spacing.2])?;
            if cli.json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "evaluate",
                        "cls": cls,
                        "dice": dice,
                        "hd95": hd,
                    })
                )?;
            } else {
                writeln!(out, "class {cls}: Dice {dice:.2}  HD95 {hd:.3}")?;
            }
        }
    }
    Ok(())
}

/// Run with explicit arguments (first element is the program name); used by
/// the binary and the test suite.
pub fn run_args<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; anything else is usage
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    run_args(std::env::args_os(), &mut stdout.lock())
}
