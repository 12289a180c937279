//! Frequency-domain decomposition: per-modality low/high-frequency channel
//! stacks under selectable transform strategies. Complex-valued strategies
//! hand off magnitudes; decimated strategies are bilinearly upsampled back
//! to full size, so every output channel matches the input dims.

use crate::dtcwt::{dtcwt_level1, lowpass_magnitude};
use crate::dwt::dwt2_level1;
use crate::error::{Error, Result};
use crate::filterbank::FilterBank1D;
use crate::io::{ChannelVolume, MultiModalVolume, Volume3D};
use crate::nsct::{nsct_decompose, NsctConfig};
use crate::plane::Plane;

/// Transform family for one branch of the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Haar DWT; raw subband coefficients, upsampled.
    Dwt,
    /// Dual-tree complex wavelet; magnitude maps, upsampled.
    Dtcwt,
    /// Nonsubsampled contourlet; raw full-size planes.
    Nsct,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dwt" => Ok(Strategy::Dwt),
            "dtcwt" => Ok(Strategy::Dtcwt),
            "nsct" => Ok(Strategy::Nsct),
            other => Err(Error::invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Dwt => "dwt",
            Strategy::Dtcwt => "dtcwt",
            Strategy::Nsct => "nsct",
        })
    }
}

/// Strategy selection for the two branches plus the contourlet shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FddConfig {
    pub lf_strategy: Strategy,
    pub hf_strategy: Strategy,
    pub nsct: NsctConfig,
}

impl Default for FddConfig {
    /// The reference configuration: dual-tree LF, contourlet [1,4] HF.
    fn default() -> Self {
        FddConfig {
            lf_strategy: Strategy::Dtcwt,
            hf_strategy: Strategy::Nsct,
            nsct: NsctConfig::default(),
        }
    }
}

impl FddConfig {
    /// HF channels per modality under the configured strategy.
    pub fn d_hf(&self) -> usize {
        match self.hf_strategy {
            Strategy::Dwt => 3,
            Strategy::Dtcwt => 6,
            Strategy::Nsct => self.nsct.directions * self.nsct.levels,
        }
    }

    fn validate(&self) -> Result<()> {
        NsctConfig::new(self.nsct.levels, self.nsct.directions)?;
        Ok(())
    }
}

/// The channel stacks: `x_l` has one channel per modality, `x_h` has
/// `d_hf` channels per modality (modality-major, direction-minor).
#[derive(Debug, Clone)]
pub struct FddOutput {
    pub x_l: ChannelVolume,
    pub x_h: ChannelVolume,
}

fn lf_slice(slice: &Plane, strategy: Strategy, nsct: NsctConfig) -> Result<Plane> {
    match strategy {
        Strategy::Dwt => {
            let sub = dwt2_level1(slice, &FilterBank1D::haar())?;
            Ok(sub.ll.upsample2_bilinear())
        }
        Strategy::Dtcwt => Ok(lowpass_magnitude(&dtcwt_level1(slice)?).upsample2_bilinear()),
        Strategy::Nsct => {
            let dec = nsct_decompose(slice, nsct)?;
            Ok(dec.lowpass)
        }
    }
}

fn hf_slices(slice: &Plane, strategy: Strategy, nsct: NsctConfig) -> Result<Vec<Plane>> {
    match strategy {
        Strategy::Dwt => {
            let sub = dwt2_level1(slice, &FilterBank1D::haar())?;
            Ok(vec![
                sub.lh.upsample2_bilinear(),
                sub.hl.upsample2_bilinear(),
                sub.hh.upsample2_bilinear(),
            ])
        }
        Strategy::Dtcwt => {
            let dec = dtcwt_level1(slice)?;
            Ok(dec
                .hf
                .iter()
                .map(|b| b.magnitude().upsample2_bilinear())
                .collect())
        }
        Strategy::Nsct => {
            let dec = nsct_decompose(slice, nsct)?;
            Ok(dec.bands.into_iter().flatten().collect())
        }
    }
}

/// Split every modality into one LF channel and `d_hf` HF channels.
pub fn fdd_decompose(mm: &MultiModalVolume, cfg: FddConfig) -> Result<FddOutput> {
    cfg.validate()?;
    let (d, h, w) = mm.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::invalid("decomposition needs even in-plane dims"));
    }
    if h < 8 || w < 8 {
        return Err(Error::invalid("decomposition needs in-plane dims >= 8"));
    }
    let d_hf = cfg.d_hf();
    let mut lf_channels = Vec::with_capacity(mm.m());
    let mut hf_channels = Vec::with_capacity(mm.m() * d_hf);
    for (_, vol) in &mm.modalities {
        lf_channels.push(Volume3D::from_slices((d, h, w), |z| {
            lf_slice(&vol.slice(z), cfg.lf_strategy, cfg.nsct).expect("dims validated")
        }));
        // compute all HF planes per slice once, then regroup by direction
        use rayon::prelude::*;
        let per_slice: Vec<Vec<Plane>> = (0..d)
            .into_par_iter()
            .map(|z| {
                hf_slices(&vol.slice(z), cfg.hf_strategy, cfg.nsct).expect("dims validated")
            })
            .collect();
        for dir in 0..d_hf {
            let mut ch = Volume3D::zeros((d, h, w));
            for (z, planes) in per_slice.iter().enumerate() {
                ch.set_slice(z, &planes[dir]);
            }
            hf_channels.push(ch);
        }
    }
    Ok(FddOutput {
        x_l: ChannelVolume::new(lf_channels)?,
        x_h: ChannelVolume::new(hf_channels)?,
    })
}
