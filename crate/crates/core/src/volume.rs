//! Labeled-volume data model, header/raw file I/O, and synthetic dataset
//! generation.
//!
//! A volume is a regular lattice of `M x N x O` points carrying unsigned
//! integer labels, stored x-fastest (`index = i + M*(j + N*k)`). Voxel cells
//! are spanned by the eight points at `(i..=i+1, j..=j+1, k..=k+1)`, so a
//! volume has `(M-1)*(N-1)*(O-1)` voxels.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::labels::BACKGROUND;

/// Errors produced by volume construction, generation, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum VolumeError {
    #[error("volume dims must each be >= 2, got {0}x{1}x{2}")]
    BadDims(u32, u32, u32),
    #[error("volume spacing must be > 0 on every axis, got ({0}, {1}, {2})")]
    BadSpacing(f64, f64, f64),
    #[error("scalar array has {got} elements, dims require {want}")]
    ScalarLength { got: usize, want: usize },
    #[error("scalar value {0:#x} collides with the reserved background sentinel")]
    ReservedLabel(u32),
    #[error("sphere spec invalid: {0}")]
    BadSphereSpec(String),
    #[error("{path}: {msg}")]
    Header { path: PathBuf, msg: String },
    #[error("raw file {path} holds {got} bytes, header requires {want}")]
    RawSize { path: PathBuf, got: u64, want: u64 },
    #[error("unsupported dtype {0:?} (expected u8, u16, or u32)")]
    UnsupportedDtype(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Scalar element width of a stored volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemWidth {
    U8,
    U16,
    U32,
}

impl ElemWidth {
    pub fn bytes(self) -> usize {
        match self {
            ElemWidth::U8 => 1,
            ElemWidth::U16 => 2,
            ElemWidth::U32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElemWidth::U8 => "u8",
            ElemWidth::U16 => "u16",
            ElemWidth::U32 => "u32",
        }
    }

    /// Smallest width that can hold `max_value`.
    pub fn fitting(max_value: u32) -> ElemWidth {
        if max_value <= u8::MAX as u32 {
            ElemWidth::U8
        } else if max_value <= u16::MAX as u32 {
            ElemWidth::U16
        } else {
            ElemWidth::U32
        }
    }
}

impl fmt::Display for ElemWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat scalar storage in one of the three supported widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalars {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
}

impl Scalars {
    pub fn len(&self) -> usize {
        match self {
            Scalars::U8(v) => v.len(),
            Scalars::U16(v) => v.len(),
            Scalars::U32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> ElemWidth {
        match self {
            Scalars::U8(_) => ElemWidth::U8,
            Scalars::U16(_) => ElemWidth::U16,
            Scalars::U32(_) => ElemWidth::U32,
        }
    }

    #[inline(always)]
    pub fn get(&self, idx: usize) -> u32 {
        match self {
            Scalars::U8(v) => v[idx] as u32,
            Scalars::U16(v) => v[idx] as u32,
            Scalars::U32(v) => v[idx],
        }
    }

    fn set(&mut self, idx: usize, value: u32) {
        match self {
            Scalars::U8(v) => v[idx] = value as u8,
            Scalars::U16(v) => v[idx] = value as u16,
            Scalars::U32(v) => v[idx] = value,
        }
    }

    fn zeroed(width: ElemWidth, len: usize) -> Scalars {
        match width {
            ElemWidth::U8 => Scalars::U8(vec![0; len]),
            ElemWidth::U16 => Scalars::U16(vec![0; len]),
            ElemWidth::U32 => Scalars::U32(vec![0; len]),
        }
    }

    fn to_le_bytes(&self) -> Vec<u8> {
        match self {
            Scalars::U8(v) => v.clone(),
            Scalars::U16(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Scalars::U32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    fn from_le_bytes(width: ElemWidth, bytes: &[u8]) -> Scalars {
        match width {
            ElemWidth::U8 => Scalars::U8(bytes.to_vec()),
            ElemWidth::U16 => Scalars::U16(
                bytes
                    .chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]))
                    .collect(),
            ),
            ElemWidth::U32 => Scalars::U32(
                bytes
                    .chunks_exact(4)
                    .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            ),
        }
    }
}

/// A 3D lattice of integer labels with world-space placement.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVolume {
    dims: (u32, u32, u32),
    spacing: (f64, f64, f64),
    origin: (f64, f64, f64),
    scalars: Scalars,
}

impl LabeledVolume {
    pub fn new(
        dims: (u32, u32, u32),
        spacing: (f64, f64, f64),
        origin: (f64, f64, f64),
        scalars: Scalars,
    ) -> Result<Self, VolumeError> {
        let (m, n, o) = dims;
        if m < 2 || n < 2 || o < 2 {
            return Err(VolumeError::BadDims(m, n, o));
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
            return Err(VolumeError::BadSpacing(spacing.0, spacing.1, spacing.2));
        }
        let want = m as usize * n as usize * o as usize;
        if scalars.len() != want {
            return Err(VolumeError::ScalarLength {
                got: scalars.len(),
                want,
            });
        }
        if let Scalars::U32(v) = &scalars {
            if v.contains(&BACKGROUND) {
                return Err(VolumeError::ReservedLabel(BACKGROUND));
            }
        }
        Ok(LabeledVolume {
            dims,
            spacing,
            origin,
            scalars,
        })
    }

    pub fn dims(&self) -> (u32, u32, u32) {
        self.dims
    }

    /// Voxel cell counts per axis: `(M-1, N-1, O-1)`.
    pub fn voxel_dims(&self) -> (u32, u32, u32) {
        (self.dims.0 - 1, self.dims.1 - 1, self.dims.2 - 1)
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn origin(&self) -> (f64, f64, f64) {
        self.origin
    }

    pub fn scalars(&self) -> &Scalars {
        &self.scalars
    }

    /// Flat index of grid point `(i, j, k)`, x-fastest.
    #[inline(always)]
    pub fn index(&self, i: u32, j: u32, k: u32) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        i as usize + self.dims.0 as usize * (j as usize + self.dims.1 as usize * k as usize)
    }

    /// Inverse of [`index`](Self::index).
    pub fn coords(&self, idx: usize) -> (u32, u32, u32) {
        let m = self.dims.0 as usize;
        let n = self.dims.1 as usize;
        ((idx % m) as u32, ((idx / m) % n) as u32, (idx / (m * n)) as u32)
    }

    #[inline(always)]
    pub fn label_at(&self, i: u32, j: u32, k: u32) -> u32 {
        self.scalars.get(self.index(i, j, k))
    }

    /// World position of grid point `(i, j, k)`.
    pub fn point_position(&self, i: u32, j: u32, k: u32) -> (f64, f64, f64) {
        (
            self.origin.0 + i as f64 * self.spacing.0,
            self.origin.1 + j as f64 * self.spacing.1,
            self.origin.2 + k as f64 * self.spacing.2,
        )
    }

    /// World-space center of voxel `(i, j, k)` as 32-bit floats.
    #[inline]
    pub fn voxel_center(&self, i: u32, j: u32, k: u32) -> [f32; 3] {
        [
            (self.origin.0 + (i as f64 + 0.5) * self.spacing.0) as f32,
            (self.origin.1 + (j as f64 + 0.5) * self.spacing.1) as f32,
            (self.origin.2 + (k as f64 + 0.5) * self.spacing.2) as f32,
        ]
    }

    /// Histogram of label values, sorted ascending by value.
    pub fn histogram(&self) -> Vec<(u32, u64)> {
        let mut map = std::collections::BTreeMap::new();
        for idx in 0..self.scalars.len() {
            *map.entry(self.scalars.get(idx)).or_insert(0u64) += 1;
        }
        map.into_iter().collect()
    }

    /// Distinct nonzero label values, sorted ascending.
    pub fn labels_present(&self) -> Vec<u32> {
        self.histogram()
            .into_iter()
            .map(|(v, _)| v)
            .filter(|&v| v != 0)
            .collect()
    }
}

/// Parameters for [`gen_spheres`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    /// Number of spheres (labels `label_start..label_start+count`).
    pub count: u32,
    /// Radius range `(min, max)` in voxel index units.
    pub radius_range: (f64, f64),
    /// Label assigned to the first sphere.
    pub label_start: u32,
    /// Seed for the SplitMix64 draw sequence.
    pub seed: u64,
}

impl SphereSpec {
    fn validate(&self) -> Result<(), VolumeError> {
        if self.count < 1 {
            return Err(VolumeError::BadSphereSpec("count must be >= 1".into()));
        }
        let (lo, hi) = self.radius_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(VolumeError::BadSphereSpec(format!(
                "radius range must satisfy 0 < min <= max, got {lo}:{hi}"
            )));
        }
        let max_label = self
            .label_start
            .checked_add(self.count - 1)
            .filter(|&v| v != BACKGROUND);
        if max_label.is_none() {
            return Err(VolumeError::BadSphereSpec(
                "label range reaches the reserved background sentinel".into(),
            ));
        }
        Ok(())
    }
}

/// SplitMix64 (Steele, Lea, Flood 2014): increment 0x9E3779B97F4A7C15,
/// finalizer constants 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB. Chosen for
/// portable, seed-stable fixtures.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, n)`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        (self.next_f64() * n as f64) as u64
    }
}

/// Fill a volume with `spec.count` labeled, possibly overlapping spheres.
///
/// Per sphere `n`, the draws are `(cx, cy, cz, r)` in that order: center
/// uniform over the continuous index box `[0,M-1) x [0,N-1) x [0,O-1)`,
/// radius uniform in `radius_range`. Grid points with squared index-space
/// distance `<= r^2` receive `label_start + n`; later spheres overwrite
/// earlier ones. Everything else stays 0.
pub fn gen_spheres(
    dims: (u32, u32, u32),
    spacing: (f64, f64, f64),
    spec: SphereSpec,
) -> Result<LabeledVolume, VolumeError> {
    let (m, n, o) = dims;
    if m < 2 || n < 2 || o < 2 {
        return Err(VolumeError::BadDims(m, n, o));
    }
    spec.validate()?;

    let width = ElemWidth::fitting(spec.label_start + (spec.count - 1));
    let len = m as usize * n as usize * o as usize;
    let mut scalars = Scalars::zeroed(width, len);

    let mut rng = SplitMix64::new(spec.seed);
    for sphere in 0..spec.count {
        let cx = rng.next_f64() * (m - 1) as f64;
        let cy = rng.next_f64() * (n - 1) as f64;
        let cz = rng.next_f64() * (o - 1) as f64;
        let (rlo, rhi) = spec.radius_range;
        let r = rlo + rng.next_f64() * (rhi - rlo);
        let r2 = r * r;
        let label = spec.label_start + sphere;

        let lo = |c: f64| ((c - r).ceil().max(0.0)) as u32;
        let hi = |c: f64, max: u32| ((c + r).floor().min((max - 1) as f64)).max(0.0) as u32;
        for k in lo(cz)..=hi(cz, o) {
            let dz = k as f64 - cz;
            for j in lo(cy)..=hi(cy, n) {
                let dy = j as f64 - cy;
                let plane = dz * dz + dy * dy;
                if plane > r2 {
                    continue;
                }
                for i in lo(cx)..=hi(cx, m) {
                    let dx = i as f64 - cx;
                    if plane + dx * dx <= r2 {
                        let idx = i as usize + m as usize * (j as usize + n as usize * k as usize);
                        scalars.set(idx, label);
                    }
                }
            }
        }
    }

    LabeledVolume::new(dims, spacing, (0.0, 0.0, 0.0), scalars)
}

fn header_err(path: &Path, msg: impl Into<String>) -> VolumeError {
    VolumeError::Header {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> VolumeError + '_ {
    move |source| VolumeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_triple<T: std::str::FromStr>(path: &Path, key: &str, val: &str) -> Result<(T, T, T), VolumeError> {
    let parts: Vec<&str> = val.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(header_err(path, format!("{key} needs three values, got {val:?}")));
    }
    let parse = |s: &str| {
        s.parse::<T>()
            .map_err(|_| header_err(path, format!("bad {key} component {s:?}")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

/// Load a volume from a text header file (see FORMATS.md). The raw file is
/// resolved relative to the header's directory and read little-endian.
pub fn load_volume(path: impl AsRef<Path>) -> Result<LabeledVolume, VolumeError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;

    let mut dims = None;
    let mut spacing = (1.0, 1.0, 1.0);
    let mut origin = (0.0, 0.0, 0.0);
    let mut dtype = None;
    let mut data = None;

    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| header_err(path, format!("expected key = value, got {line:?}")))?;
        let (key, val) = (key.trim(), val.trim());
        match key {
            "dims" => dims = Some(parse_triple::<u32>(path, key, val)?),
            "spacing" => spacing = parse_triple::<f64>(path, key, val)?,
            "origin" => origin = parse_triple::<f64>(path, key, val)?,
            "dtype" => {
                dtype = Some(match val {
                    "u8" => ElemWidth::U8,
                    "u16" => ElemWidth::U16,
                    "u32" => ElemWidth::U32,
                    other => return Err(VolumeError::UnsupportedDtype(other.to_string())),
                })
            }
            "data" => data = Some(val.to_string()),
            other => return Err(header_err(path, format!("unknown key {other:?}"))),
        }
    }

    let dims = dims.ok_or_else(|| header_err(path, "missing dims"))?;
    let dtype = dtype.ok_or_else(|| header_err(path, "missing dtype"))?;
    let data = data.ok_or_else(|| header_err(path, "missing data"))?;

    let raw_path = path.parent().unwrap_or(Path::new(".")).join(&data);
    let mut raw = Vec::new();
    fs::File::open(&raw_path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(io_err(&raw_path))?;

    let want =
        dims.0 as u64 * dims.1 as u64 * dims.2 as u64 * dtype.bytes() as u64;
    if raw.len() as u64 != want {
        return Err(VolumeError::RawSize {
            path: raw_path,
            got: raw.len() as u64,
            want,
        });
    }

    LabeledVolume::new(dims, spacing, origin, Scalars::from_le_bytes(dtype, &raw))
}

/// Write `vol` as a header file at `path` plus a sibling `.raw` file.
/// `load_volume(save_volume(vol))` reproduces the volume bit-exactly.
pub fn save_volume(vol: &LabeledVolume, path: impl AsRef<Path>) -> Result<(), VolumeError> {
    let path = path.as_ref();
    let raw_name = path
        .file_stem()
        .map(|s| format!("{}.raw", s.to_string_lossy()))
        .unwrap_or_else(|| "volume.raw".to_string());
    let raw_path = path.parent().unwrap_or(Path::new(".")).join(&raw_name);

    let (m, n, o) = vol.dims;
    let (sx, sy, sz) = vol.spacing;
    let (ox, oy, oz) = vol.origin;
    let header = format!(
        "dims = {m} {n} {o}\nspacing = {sx} {sy} {sz}\norigin = {ox} {oy} {oz}\ndtype = {}\ndata = {raw_name}\n",
        vol.scalars.width()
    );

    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(header.as_bytes()).map_err(io_err(path))?;
    fs::write(&raw_path, vol.scalars.to_le_bytes()).map_err(io_err(&raw_path))?;
    Ok(())
}
