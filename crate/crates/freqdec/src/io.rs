//! Volume containers, a minimal NIfTI-1 reader, the FREQVOL1 raw container,
//! and deterministic synthetic phantoms.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Real-valued voxel grid, row-major with `W` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    /// (depth D, height H, width W)
    pub dims: (usize, usize, usize),
    /// Voxel spacing in mm per axis (D, H, W).
    pub spacing: [f64; 3],
    pub data: Vec<f64>,
}

impl Volume3D {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Volume3D {
            dims,
            spacing: [1.0; 3],
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_vec(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::Length(format!(
                "volume data length {} != {}x{}x{}",
                data.len(),
                dims.0,
                dims.1,
                dims.2
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("volume contains non-finite values".into()));
        }
        Ok(Volume3D {
            dims,
            spacing: [1.0; 3],
            data,
        })
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> f64 {
        let (_, h, w) = self.dims;
        self.data[(z * h + y) * w + x]
    }

    #[inline]
    pub fn set(&mut self, z: usize, y: usize, x: usize, v: f64) {
        let (_, h, w) = self.dims;
        self.data[(z * h + y) * w + x] = v;
    }

    pub fn slice(&self, z: usize) -> Plane {
        let (_, h, w) = self.dims;
        Plane {
            h,
            w,
            data: self.data[z * h * w..(z + 1) * h * w].to_vec(),
        }
    }

    pub fn set_slice(&mut self, z: usize, p: &Plane) {
        let (_, h, w) = self.dims;
        assert!(p.h == h && p.w == w, "slice dims mismatch");
        self.data[z * h * w..(z + 1) * h * w].copy_from_slice(&p.data);
    }

    /// Build a volume by computing each slice independently.
    pub fn from_slices(
        dims: (usize, usize, usize),
        f: impl Fn(usize) -> Plane + Sync + Send,
    ) -> Volume3D {
        use rayon::prelude::*;
        let (d, h, w) = dims;
        let slices: Vec<Plane> = (0..d).into_par_iter().map(f).collect();
        let mut data = Vec::with_capacity(d * h * w);
        for s in &slices {
            assert!(s.h == h && s.w == w, "slice dims mismatch");
            data.extend_from_slice(&s.data);
        }
        Volume3D {
            dims,
            spacing: [1.0; 3],
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Volume3D {
        Volume3D {
            dims: self.dims,
            spacing: self.spacing,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Ordered set of modalities sharing dims and spacing.
#[derive(Debug, Clone)]
pub struct MultiModalVolume {
    pub modalities: Vec<(String, Volume3D)>,
}

impl MultiModalVolume {
    pub fn new(modalities: Vec<(String, Volume3D)>) -> Result<Self> {
        if modalities.is_empty() {
            return Err(Error::invalid("MultiModalVolume requires M >= 1"));
        }
        let dims = modalities[0].1.dims;
        let spacing = modalities[0].1.spacing;
        for (name, v) in &modalities {
            if v.dims != dims || v.spacing != spacing {
                return Err(Error::shape(format!(
                    "modality '{name}' dims/spacing differ from the first modality"
                )));
            }
        }
        Ok(MultiModalVolume { modalities })
    }

    pub fn single(name: &str, vol: Volume3D) -> Self {
        MultiModalVolume {
            modalities: vec![(name.to_string(), vol)],
        }
    }

    pub fn m(&self) -> usize {
        self.modalities.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.modalities[0].1.dims
    }
}

/// `C` volumes of identical dims: the x^L / x^H channel stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVolume {
    pub channels: Vec<Volume3D>,
}

impl ChannelVolume {
    pub fn new(channels: Vec<Volume3D>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::invalid("ChannelVolume requires C >= 1"));
        }
        let dims = channels[0].dims;
        if channels.iter().any(|c| c.dims != dims) {
            return Err(Error::shape("channel dims differ"));
        }
        Ok(ChannelVolume { channels })
    }

    pub fn c(&self) -> usize {
        self.channels.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.channels[0].dims
    }
}

/// Integer class-id volume.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    pub dims: (usize, usize, usize),
    pub spacing: [f64; 3],
    pub n_classes: usize,
    pub data: Vec<u16>,
}

impl LabelVolume {
    pub fn new(dims: (usize, usize, usize), n_classes: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::Length("label data length mismatch".into()));
        }
        if data.iter().any(|&c| c as usize >= n_classes) {
            return Err(Error::invalid("class id >= declared class count"));
        }
        Ok(LabelVolume {
            dims,
            spacing: [1.0; 3],
            n_classes,
            data,
        })
    }

    /// Binary mask of one class.
    pub fn mask(&self, cls: u16) -> Vec<bool> {
        self.data.iter().map(|&c| c == cls).collect()
    }
}

// ---------------------------------------------------------------------------
// NIfTI-1 reader (uncompressed, 3D, float32/int16/uint8)
// ---------------------------------------------------------------------------

const NIFTI_HEADER_LEN: usize = 348;

fn rd_i16(b: &[u8], off: usize) -> i16 {
    i16::from_le_bytes([b[off], b[off + 1]])
}
fn rd_f32(b: &[u8], off: usize) -> f32 {
    f32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

/// Read an uncompressed 3D NIfTI-1 file as a single-modality volume.
pub fn read_nifti(path: impl AsRef<Path>) -> Result<MultiModalVolume> {
    let bytes = std::fs::read(path.as_ref())?;
    read_nifti_bytes(&bytes, path.as_ref().to_string_lossy().as_ref())
}

pub fn read_nifti_bytes(bytes: &[u8], name: &str) -> Result<MultiModalVolume> {
    if bytes.len() < NIFTI_HEADER_LEN {
        return Err(Error::Length("file shorter than NIfTI-1 header".into()));
    }
    let magic = &bytes[344..348];
    if magic != b"n+1\0" && magic != b"ni1\0" {
        return Err(Error::Format("NIfTI-1 magic ('n+1'/'ni1') absent".into()));
    }
    let ndim = rd_i16(bytes, 40);
    if ndim != 3 {
        return Err(Error::Format(format!("expected 3D NIfTI, got dim[0]={ndim}")));
    }
    let nx = rd_i16(bytes, 42) as usize; // fastest-varying
    let ny = rd_i16(bytes, 44) as usize;
    let nz = rd_i16(bytes, 46) as usize;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::Format("zero NIfTI dimension".into()));
    }
    let datatype = rd_i16(bytes, 70);
    let pixdim = [
        rd_f32(bytes, 76 + 4) as f64, // pixdim[1] -> x
        rd_f32(bytes, 76 + 8) as f64,
        rd_f32(bytes, 76 + 12) as f64,
    ];
    let vox_offset = rd_f32(bytes, 108) as usize;
    let scl_slope = rd_f32(bytes, 112) as f64;
    let scl_inter = rd_f32(bytes, 116) as f64;
    let offset = if vox_offset >= NIFTI_HEADER_LEN {
        vox_offset
    } else {
        NIFTI_HEADER_LEN
    };

    let n = nx * ny * nz;
    let bpv = match datatype {
        2 => 1,  // uint8
        4 => 2,  // int16
        16 => 4, // float32
        other => {
            return Err(Error::Unsupported(format!(
                "NIfTI datatype {other} (supported: uint8, int16, float32)"
            )))
        }
    };
    if bytes.len() < offset + n * bpv {
        return Err(Error::Length(format!(
            "truncated NIfTI payload: need {} bytes after offset, have {}",
            n * bpv,
            bytes.len().saturating_sub(offset)
        )));
    }
    let raw = &bytes[offset..offset + n * bpv];
    let mut data = Vec::with_capacity(n);
    match datatype {
        2 => data.extend(raw.iter().map(|&b| b as f64)),
        4 => data.extend(
            raw.chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64),
        ),
        16 => data.extend(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64),
        ),
        _ => unreachable!(),
    }
    // scl_slope == 0 means "no scaling" by NIfTI convention.
    if scl_slope != 0.0 && (scl_slope != 1.0 || scl_inter != 0.0) {
        for v in &mut data {
            *v = *v * scl_slope + scl_inter;
        }
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("NIfTI payload contains non-finite values".into()));
    }
    // NIfTI stores x fastest; our layout is (D=z, H=y, W=x), also x fastest,
    // so the payload is already in order.
    let mut vol = Volume3D::from_vec((nz, ny, nx), data)?;
    vol.spacing = [pixdim[2], pixdim[1], pixdim[0]];
    Ok(MultiModalVolume::single(name, vol))
}

// ---------------------------------------------------------------------------
// FREQVOL1 raw container
// ---------------------------------------------------------------------------

/// 8 ASCII bytes + 8 zero pad = the 16-byte magic.
const FREQVOL_MAGIC: [u8; 16] = *b"FREQVOL1\0\0\0\0\0\0\0\0";

/// Write a channel volume in the FREQVOL1 interchange format:
/// 16-byte magic, LE u32 `C,D,H,W`, 3 x f32 spacing (D,H,W order),
/// then `C*D*H*W` LE f32 voxels.
pub fn write_raw(vol: &ChannelVolume, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_raw_to(vol, &mut f)
}

pub fn write_raw_to(vol: &ChannelVolume, out: &mut impl Write) -> Result<()> {
    let (d, h, w) = vol.dims();
    out.write_all(&FREQVOL_MAGIC)?;
    for v in [vol.c() as u32, d as u32, h as u32, w as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    for s in vol.channels[0].spacing {
        out.write_all(&(s as f32).to_le_bytes())?;
    }
    for ch in &vol.channels {
        for &v in &ch.data {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<ChannelVolume> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_raw_from(&mut f)
}

pub fn read_raw_from(inp: &mut impl Read) -> Result<ChannelVolume> {
    let mut bytes = Vec::new();
    inp.read_to_end(&mut bytes)?;
    if bytes.len() < 44 {
        return Err(Error::Length("FREQVOL1 file shorter than header".into()));
    }
    if bytes[..16] != FREQVOL_MAGIC {
        return Err(Error::Format("FREQVOL1 magic mismatch".into()));
    }
    let rd_u32 = |off: usize| {
        u32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]]) as usize
    };
    let (c, d, h, w) = (rd_u32(16), rd_u32(20), rd_u32(24), rd_u32(28));
    let spacing = [
        rd_f32(&bytes, 32) as f64,
        rd_f32(&bytes, 36) as f64,
        rd_f32(&bytes, 40) as f64,
    ];
    let n = c * d * h * w;
    if bytes.len() != 44 + 4 * n {
        return Err(Error::Length(format!(
            "FREQVOL1 payload: expected {} bytes, found {}",
            44 + 4 * n,
            bytes.len()
        )));
    }
    let mut channels = Vec::with_capacity(c);
    for ci in 0..c {
        let mut data = Vec::with_capacity(d * h * w);
        let base = 44 + ci * d * h * w * 4;
        for i in 0..d * h * w {
            data.push(rd_f32(&bytes, base + 4 * i) as f64);
        }
        let mut v = Volume3D::from_vec((d, h, w), data)?;
        v.spacing = spacing;
        channels.push(v);
    }
    ChannelVolume::new(channels)
}

// ---------------------------------------------------------------------------
// Phantoms
// ---------------------------------------------------------------------------

/// Synthetic volume families for desk-scale tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhantomKind {
    /// Low-frequency Gaussian blob; spectral energy almost entirely below pi/2.
    SmoothBlob,
    /// Low-frequency sphere plus a high-frequency sinusoidal shell.
    TexturedShell,
    /// 2D sinusoid at the given angle (degrees), replicated across slices.
    OrientedStripes(f64),
    /// Per-slice checkerboard (energy at the Nyquist corner).
    Checker,
}

/// Deterministic phantom generation; values in [0, 1].
pub fn make_phantom(
    kind: PhantomKind,
    dims: (usize, usize, usize),
    seed: u64,
) -> Result<MultiModalVolume> {
    let (d, h, w) = dims;
    if d < 16 || h < 16 || w < 16 {
        return Err(Error::invalid("phantom dims must each be >= 16"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = h.min(w) as f64;
    let vol = match kind {
        PhantomKind::SmoothBlob => {
            let cz = d as f64 / 2.0 + rng.gen_range(-2.0..2.0);
            let cy = h as f64 / 2.0 + rng.gen_range(-2.0..2.0);
            let cx = w as f64 / 2.0 + rng.gen_range(-2.0..2.0);
            let sig = 0.22 * n;
            let mut v = Volume3D::zeros(dims);
            for z in 0..d {
                for y in 0..h {
                    for x in 0..w {
                        let r2 = (z as f64 - cz).powi(2)
                            + (y as f64 - cy).powi(2)
                            + (x as f64 - cx).powi(2);
                        v.set(z, y, x, (-r2 / (2.0 * sig * sig)).exp());
                    }
                }
            }
            v
        }
        PhantomKind::TexturedShell => {
            let cz = d as f64 / 2.0 + rng.gen_range(-1.0..1.0);
            let cy = h as f64 / 2.0 + rng.gen_range(-3.0..3.0);
            let cx = w as f64 / 2.0 + rng.gen_range(-3.0..3.0);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let r0 = 0.30 * n;
            let edge = 0.06 * n;
            let shell_sig = 0.03 * n;
            let mut v = Volume3D::zeros(dims);
            for z in 0..d {
                for y in 0..h {
                    for x in 0..w {
                        let dz = z as f64 - cz;
                        let dy = y as f64 - cy;
                        let dx = x as f64 - cx;
                        let r = (dz * dz + dy * dy + dx * dx).sqrt();
                        let base = 1.0 / (1.0 + ((r - r0) / edge).exp());
                        let ring = (-(r - r0).powi(2) / (2.0 * shell_sig * shell_sig)).exp();
                        let theta = dy.atan2(dx);
                        let tex = ring
                            * 0.5
                            * (1.0 + (2.6 * r + 0.05 * (r - r0).powi(2) + 5.0 * theta + phi).sin());
                        v.set(z, y, x, (0.4 * base + 0.6 * tex).clamp(0.0, 1.0));
                    }
                }
            }
            v
        }
        PhantomKind::OrientedStripes(theta_deg) => {
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let th = theta_deg.to_radians();
            let w0 = std::f64::consts::FRAC_PI_2;
            let mut v = Volume3D::zeros(dims);
            for y in 0..h {
                for x in 0..w {
                    let arg = w0 * (x as f64 * th.cos() + y as f64 * th.sin()) + phi;
                    let val = 0.5 + 0.5 * arg.sin();
                    for z in 0..d {
                        v.set(z, y, x, val);
                    }
                }
            }
            v
        }
        PhantomKind::Checker => {
            let mut v = Volume3D::zeros(dims);
            for z in 0..d {
                for y in 0..h {
                    for x in 0..w {
                        v.set(z, y, x, ((y + x) % 2) as f64);
                    }
                }
            }
            v
        }
    };
    Ok(MultiModalVolume::single(&kind_name(kind), vol))
}

/// M-modality phantom stack: modality i is `make_phantom` with seed `seed+i`.
pub fn make_phantom_stack(
    kind: PhantomKind,
    dims: (usize, usize, usize),
    seed: u64,
    m: usize,
) -> Result<MultiModalVolume> {
    if m == 0 {
        return Err(Error::invalid("modality count must be >= 1"));
    }
    let mut mods = Vec::with_capacity(m);
    for i in 0..m {
        let mm = make_phantom(kind, dims, seed + i as u64)?;
        let (_, vol) = mm.modalities.into_iter().next().unwrap();
        mods.push((format!("{}-{}", kind_name(kind), i), vol));
    }
    MultiModalVolume::new(mods)
}

fn kind_name(kind: PhantomKind) -> String {
    match kind {
        PhantomKind::SmoothBlob => "smooth-blob".into(),
        PhantomKind::TexturedShell => "textured-shell".into(),
        PhantomKind::OrientedStripes(t) => format!("oriented-stripes({t})"),
        PhantomKind::Checker => "checker".into(),
    }
}

impl std::str::FromStr for PhantomKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s
            .strip_prefix("oriented-stripes(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let deg: f64 = rest
                .parse()
                .map_err(|_| Error::invalid(format!("bad stripe angle '{rest}'")))?;
            return Ok(PhantomKind::OrientedStripes(deg));
        }
        match s {
            "smooth-blob" => Ok(PhantomKind::SmoothBlob),
            "textured-shell" => Ok(PhantomKind::TexturedShell),
            "oriented-stripes" => Ok(PhantomKind::OrientedStripes(45.0)),
            "checker" => Ok(PhantomKind::Checker),
            other => Err(Error::invalid(format!("unknown phantom kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nifti_bytes(dims: (usize, usize, usize), datatype: i16, payload: &[u8]) -> Vec<u8> {
        let mut b = vec![0u8; NIFTI_HEADER_LEN];
        b[0..4].copy_from_slice(&348i32.to_le_bytes());
        b[40..42].copy_from_slice(&3i16.to_le_bytes());
        b[42..44].copy_from_slice(&(dims.2 as i16).to_le_bytes());
        b[44..46].copy_from_slice(&(dims.1 as i16).to_le_bytes());
        b[46..48].copy_from_slice(&(dims.0 as i16).to_le_bytes());
        b[70..72].copy_from_slice(&datatype.to_le_bytes());
        for (i, s) in [1.0f32, 2.0, 3.0, 4.0].iter().enumerate() {
            b[76 + 4 * i..80 + 4 * i].copy_from_slice(&s.to_le_bytes());
        }
        b[108..112].copy_from_slice(&(NIFTI_HEADER_LEN as f32).to_le_bytes());
        b[344..348].copy_from_slice(b"n+1\0");
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn nifti_float32_sequential() {
        let payload: Vec<u8> = (0..64u32)
            .flat_map(|i| (i as f32).to_le_bytes())
            .collect();
        let mm = read_nifti_bytes(&nifti_bytes((4, 4, 4), 16, &payload), "t").unwrap();
        let v = &mm.modalities[0].1;
        assert_eq!(v.dims, (4, 4, 4));
        for i in 0..64 {
            assert_eq!(v.data[i], i as f64);
        }
        // pixdim[1..3] = (2,3,4) = (x,y,z) -> spacing (D,H,W) = (4,3,2)
        assert_eq!(v.spacing, [4.0, 3.0, 2.0]);
    }

    #[test]
    fn nifti_slope_zero_passthrough() {
        let payload: Vec<u8> = (0..64u32)
            .flat_map(|i| (i as f32).to_le_bytes())
            .collect();
        let mut b = nifti_bytes((4, 4, 4), 16, &payload);
        b[112..116].copy_from_slice(&0.0f32.to_le_bytes()); // scl_slope = 0
        b[116..120].copy_from_slice(&100.0f32.to_le_bytes()); // inter ignored
        let mm = read_nifti_bytes(&b, "t").unwrap();
        assert_eq!(mm.modalities[0].1.data[5], 5.0);
    }

    #[test]
    fn nifti_scaling_applied() {
        let payload: Vec<u8> = (0..8i16).flat_map(|i| i.to_le_bytes()).collect();
        let mut b = nifti_bytes((2, 2, 2), 4, &payload);
        b[40..42].copy_from_slice(&3i16.to_le_bytes());
        b[112..116].copy_from_slice(&2.0f32.to_le_bytes());
        b[116..120].copy_from_slice(&1.0f32.to_le_bytes());
        let mm = read_nifti_bytes(&b, "t").unwrap();
        assert_eq!(mm.modalities[0].1.data[3], 7.0); // 3*2+1
    }

    #[test]
    fn nifti_rejects_2d_bad_magic_truncation_unsupported() {
        let payload: Vec<u8> = (0..64u32)
            .flat_map(|i| (i as f32).to_le_bytes())
            .collect();
        let mut b2 = nifti_bytes((4, 4, 4), 16, &payload);
        b2[40..42].copy_from_slice(&2i16.to_le_bytes());
        assert!(matches!(read_nifti_bytes(&b2, "t"), Err(Error::Format(_))));

        let mut bm = nifti_bytes((4, 4, 4), 16, &payload);
        bm[344..348].copy_from_slice(b"xxx\0");
        assert!(matches!(read_nifti_bytes(&bm, "t"), Err(Error::Format(_))));

        let bt = nifti_bytes((4, 4, 4), 16, &payload[..100]);
        assert!(matches!(read_nifti_bytes(&bt, "t"), Err(Error::Length(_))));

        let bu = nifti_bytes((4, 4, 4), 64, &payload);
        assert!(matches!(
            read_nifti_bytes(&bu, "t"),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn freqvol_round_trip_and_size() {
        let v = Volume3D::from_vec((2, 2, 2), vec![1.0; 8]).unwrap();
        let cv = ChannelVolume::new(vec![v]).unwrap();
        let mut buf = Vec::new();
        write_raw_to(&cv, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 + 12 + 32);
        let back = read_raw_from(&mut &buf[..]).unwrap();
        assert_eq!(back, cv);
    }

    #[test]
    fn freqvol_rejects_bad_magic_and_length() {
        let v = Volume3D::from_vec((2, 2, 2), vec![1.0; 8]).unwrap();
        let cv = ChannelVolume::new(vec![v]).unwrap();
        let mut buf = Vec::new();
        write_raw_to(&cv, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_raw_from(&mut &bad[..]),
            Err(Error::Format(_))
        ));
        let short = &buf[..buf.len() - 4];
        assert!(matches!(
            read_raw_from(&mut &short[..]),
            Err(Error::Length(_))
        ));
    }

    #[test]
    fn zero_channel_volume_rejected() {
        assert!(ChannelVolume::new(vec![]).is_err());
    }

    #[test]
    fn phantoms_deterministic_and_bounded() {
        for kind in [
            PhantomKind::SmoothBlob,
            PhantomKind::TexturedShell,
            PhantomKind::OrientedStripes(30.0),
            PhantomKind::Checker,
        ] {
            let a = make_phantom(kind, (16, 32, 32), 7).unwrap();
            let b = make_phantom(kind, (16, 32, 32), 7).unwrap();
            assert_eq!(a.modalities[0].1, b.modalities[0].1);
            let (lo, hi) = {
                let d = &a.modalities[0].1.data;
                (
                    d.iter().cloned().fold(f64::INFINITY, f64::min),
                    d.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            assert!(lo >= 0.0 && hi <= 1.0, "{kind:?} out of [0,1]");
        }
    }

    #[test]
    fn phantom_dims_too_small_rejected() {
        assert!(make_phantom(PhantomKind::Checker, (8, 32, 32), 0).is_err());
    }

    #[test]
    fn phantom_kind_parses() {
        assert_eq!(
            "oriented-stripes(45)".parse::<PhantomKind>().unwrap(),
            PhantomKind::OrientedStripes(45.0)
        );
        assert_eq!(
            "textured-shell".parse::<PhantomKind>().unwrap(),
            PhantomKind::TexturedShell
        );
    }
}
