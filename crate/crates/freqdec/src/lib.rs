//! Volumetric frequency-domain decomposition toolkit.
//!
//! The library implements the mathematical core of a dual-branch
//! frequency-domain segmentation pipeline at desk scale:
//!
//! * [`dwt`], [`dtcwt`], [`nsct`] — the three 2D transforms (decimated
//!   wavelet, dual-tree complex wavelet, nonsubsampled contourlet), built on
//!   the shared convolution primitives in [`filterbank`];
//! * [`fdd`] — the per-modality low/high-frequency split that feeds the two
//!   branches;
//! * [`alc`] — Laplacian-initialized convolution with Fisher-information
//!   weight consolidation and gradient freezing;
//! * [`fdca`] — FFT-domain semantic/positional/slice cross-attention;
//! * [`loss`] — Dice, dynamic focal (spectral) loss, and the composite
//!   training objective;
//! * [`metrics`] — spectral entropy, shift-invariance score, SSIM, Dice,
//!   HD95;
//! * [`io`] — volume containers, a minimal NIfTI-1 reader, the FREQVOL1 raw
//!   container, and synthetic phantoms for every test in the suite.
//!
//! All internal arithmetic is `f64`; on-disk storage is `f32`.

pub mod alc;
pub mod cli;
pub mod dtcwt;
pub mod dwt;
pub mod error;
pub mod fdca;
pub mod fdd;
pub mod filterbank;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod nsct;
pub mod plane;

pub use error::{Error, Result};
pub use plane::Plane;
