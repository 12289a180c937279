//! C ABI for the freqdec toolkit: opaque volume handles, integer error
//! codes, and a small set of entry points (phantom generation, raw file
//! I/O, frequency-domain decomposition, metrics). The header is generated
//! by cbindgen at build time into `include/freqdec.h`.
//!
//! Conventions: every fallible call returns an `FqdStatus`; results are
//! written through out-pointers. Handles must be released with the matching
//! `*_free` call. All pointers must be non-null unless documented otherwise;
//! passing null yields `FQD_STATUS_NULL_POINTER`, never a crash.

use freqdec::fdd::{fdd_decompose, FddConfig, Strategy};
use freqdec::io::{
    make_phantom_stack, read_raw, write_raw, ChannelVolume, LabelVolume, MultiModalVolume,
    PhantomKind,
};
use freqdec::metrics::{dice_score, freq_entropy, hd95};
use freqdec::nsct::NsctConfig;
use freqdec::Error;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqdStatus {
    Ok = 0,
    InvalidArgument = 1,
    ShapeMismatch = 2,
    IoError = 3,
    FormatError = 4,
    NumericError = 5,
    NullPointer = 6,
    Panic = 7,
}

fn status_of(e: &Error) -> FqdStatus {
    match e {
        Error::Invalid(_) => FqdStatus::InvalidArgument,
        Error::Shape(_) => FqdStatus::ShapeMismatch,
        Error::Io(_) => FqdStatus::IoError,
        Error::Format(_) => FqdStatus::FormatError,
        Error::Numeric(_) => FqdStatus::NumericError,
        _ => FqdStatus::InvalidArgument,
    }
}

/// Opaque multi-channel volume handle.
pub struct FqdVolume {
    inner: ChannelVolume,
}

fn guard(f: impl FnOnce() -> FqdStatus) -> FqdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(FqdStatus::Panic)
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn fqd_status_message(status: FqdStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        FqdStatus::Ok => b"ok\0",
        FqdStatus::InvalidArgument => b"invalid argument\0",
        FqdStatus::ShapeMismatch => b"shape mismatch\0",
        FqdStatus::IoError => b"i/o error\0",
        FqdStatus::FormatError => b"format error\0",
        FqdStatus::NumericError => b"numeric error\0",
        FqdStatus::NullPointer => b"null pointer\0",
        FqdStatus::Panic => b"internal panic\0",
    };
    msg.as_ptr() as *const c_char
}

/// Library version string (static, never null).
#[no_mangle]
pub extern "C" fn fqd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a volume from a dense f64 buffer laid out channel-major as
/// (channels, depth, height, width).
///
/// # Safety
/// `data` must point to `channels * depth * height * width` doubles;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_create(
    channels: usize,
    depth: usize,
    height: usize,
    width: usize,
    data: *const f64,
    out: *mut *mut FqdVolume,
) -> FqdStatus {
    if data.is_null() || out.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let n = depth * height * width;
        let make = || -> Result<ChannelVolume, Error> {
            let mut vols = Vec::with_capacity(channels);
            for c in 0..channels {
                let chunk = std::slice::from_raw_parts(data.add(c * n), n);
                vols.push(freqdec::io::Volume3D::from_vec(
                    (depth, height, width),
                    chunk.to_vec(),
                )?);
            }
            ChannelVolume::new(vols)
        };
        match make() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FqdVolume { inner }));
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Generate a deterministic phantom volume.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_phantom(
    kind: *const c_char,
    depth: usize,
    height: usize,
    width: usize,
    seed: u64,
    modalities: usize,
    out: *mut *mut FqdVolume,
) -> FqdStatus {
    if out.is_null() {
        return FqdStatus::NullPointer;
    }
    let Some(kind) = cstr(kind) else {
        return FqdStatus::NullPointer;
    };
    guard(|| {
        let run = || -> Result<ChannelVolume, Error> {
            let kind: PhantomKind = kind.parse()?;
            let mm = make_phantom_stack(kind, (depth, height, width), seed, modalities)?;
            ChannelVolume::new(mm.modalities.into_iter().map(|(_, v)| v).collect())
        };
        match run() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FqdVolume { inner }));
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Read a FREQVOL1 (.fv) or NIfTI-1 (.nii) file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_read(
    path: *const c_char,
    out: *mut *mut FqdVolume,
) -> FqdStatus {
    if out.is_null() {
        return FqdStatus::NullPointer;
    }
    let Some(path) = cstr(path) else {
        return FqdStatus::NullPointer;
    };
    guard(|| {
        let run = || -> Result<ChannelVolume, Error> {
            if path.ends_with(".nii") {
                let mm = freqdec::io::read_nifti(path)?;
                ChannelVolume::new(mm.modalities.into_iter().map(|(_, v)| v).collect())
            } else {
                read_raw(path)
            }
        };
        match run() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FqdVolume { inner }));
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Write a volume as a FREQVOL1 (.fv) file.
///
/// # Safety
/// `vol` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_write(vol: *const FqdVolume, path: *const c_char) -> FqdStatus {
    let Some(path) = cstr(path) else {
        return FqdStatus::NullPointer;
    };
    if vol.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| match write_raw(&(*vol).inner, path) {
        Ok(()) => FqdStatus::Ok,
        Err(e) => status_of(&e),
    })
}

/// Query the shape of a volume. Any out-pointer may be null to skip it.
///
/// # Safety
/// `vol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_shape(
    vol: *const FqdVolume,
    channels: *mut usize,
    depth: *mut usize,
    height: *mut usize,
    width: *mut usize,
) -> FqdStatus {
    if vol.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let v = &(*vol).inner;
        let (d, h, w) = v.dims();
        if !channels.is_null() {
            *channels = v.c();
        }
        if !depth.is_null() {
            *depth = d;
        }
        if !height.is_null() {
            *height = h;
        }
        if !width.is_null() {
            *width = w;
        }
        FqdStatus::Ok
    })
}

/// Copy one channel into a caller-owned buffer of depth*height*width doubles.
///
/// # Safety
/// `vol` must be live; `out` must hold depth*height*width doubles.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_channel_data(
    vol: *const FqdVolume,
    channel: usize,
    out: *mut f64,
) -> FqdStatus {
    if vol.is_null() || out.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let v = &(*vol).inner;
        if channel >= v.c() {
            return FqdStatus::InvalidArgument;
        }
        let data = &v.channels[channel].data;
        std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        FqdStatus::Ok
    })
}

/// Release a volume handle (null is a no-op).
///
/// # Safety
/// `vol` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fqd_volume_free(vol: *mut FqdVolume) {
    if !vol.is_null() {
        drop(Box::from_raw(vol));
    }
}

/// Frequency-domain decomposition: split the input (channels = modalities)
/// into low- and high-frequency stacks. Strategies are "dwt", "dtcwt", or
/// "nsct"; `levels`/`dirs` configure the contourlet.
///
/// # Safety
/// `vol` must be live; strategy strings NUL-terminated; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_fdd_decompose(
    vol: *const FqdVolume,
    lf_strategy: *const c_char,
    hf_strategy: *const c_char,
    levels: usize,
    dirs: usize,
    out_l: *mut *mut FqdVolume,
    out_h: *mut *mut FqdVolume,
) -> FqdStatus {
    if vol.is_null() || out_l.is_null() || out_h.is_null() {
        return FqdStatus::NullPointer;
    }
    let (Some(lf), Some(hf)) = (cstr(lf_strategy), cstr(hf_strategy)) else {
        return FqdStatus::NullPointer;
    };
    guard(|| {
        let run = || -> Result<(ChannelVolume, ChannelVolume), Error> {
            let cfg = FddConfig {
                lf_strategy: lf.parse::<Strategy>()?,
                hf_strategy: hf.parse::<Strategy>()?,
                nsct: NsctConfig::new(levels, dirs)?,
            };
            let mm = MultiModalVolume::new(
                (*vol)
                    .inner
                    .channels
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (format!("ch{i}"), v.clone()))
                    .collect(),
            )?;
            let split = fdd_decompose(&mm, cfg)?;
            Ok((split.x_l, split.x_h))
        };
        match run() {
            Ok((l, h)) => {
                *out_l = Box::into_raw(Box::new(FqdVolume { inner: l }));
                *out_h = Box::into_raw(Box::new(FqdVolume { inner: h }));
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Spectral entropy of one channel.
///
/// # Safety
/// `vol` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_freq_entropy(
    vol: *const FqdVolume,
    channel: usize,
    out: *mut f64,
) -> FqdStatus {
    if vol.is_null() || out.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let v = &(*vol).inner;
        if channel >= v.c() {
            return FqdStatus::InvalidArgument;
        }
        match freq_entropy(&v.channels[channel]) {
            Ok(e) => {
                *out = e;
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

fn labels_of(cv: &ChannelVolume, n_classes: usize) -> Result<LabelVolume, Error> {
    let vol = &cv.channels[0];
    let data: Vec<u16> = vol.data.iter().map(|&v| v.round().max(0.0) as u16).collect();
    LabelVolume::new(vol.dims, n_classes, data)
}

/// Dice overlap (percent) between channel 0 of two volumes interpreted as
/// integer label maps with `n_classes` classes.
///
/// # Safety
/// Both handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_dice(
    pred: *const FqdVolume,
    gt: *const FqdVolume,
    cls: u16,
    n_classes: usize,
    out: *mut f64,
) -> FqdStatus {
    if pred.is_null() || gt.is_null() || out.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let run = || -> Result<f64, Error> {
            dice_score(
                &labels_of(&(*pred).inner, n_classes)?,
                &labels_of(&(*gt).inner, n_classes)?,
                cls,
            )
        };
        match run() {
            Ok(v) => {
                *out = v;
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// 95th-percentile symmetric boundary distance between channel 0 of two
/// label volumes, with voxel spacing in (depth, height, width) order.
///
/// # Safety
/// Both handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fqd_hd95(
    pred: *const FqdVolume,
    gt: *const FqdVolume,
    cls: u16,
    n_classes: usize,
    spacing_d: f64,
    spacing_h: f64,
    spacing_w: f64,
    out: *mut f64,
) -> FqdStatus {
    if pred.is_null() || gt.is_null() || out.is_null() {
        return FqdStatus::NullPointer;
    }
    guard(|| {
        let run = || -> Result<f64, Error> {
            hd95(
                &labels_of(&(*pred).inner, n_classes)?,
                &labels_of(&(*gt).inner, n_classes)?,
                cls,
                [spacing_d, spacing_h, spacing_w],
            )
        };
        match run() {
            Ok(v) => {
                *out = v;
                FqdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
