//! Volume and mask containers plus the two on-disk formats they are read from:
//! a raw-encoded NRRD subset and a raw little-endian payload with a JSON
//! sidecar.
//!
//! Voxel arrays are stored x-fastest: `index = x + nx * (y + ny * z)`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Unit {
    #[serde(rename = "SUV")]
    Suv,
    #[serde(rename = "HU")]
    Hu,
    #[default]
    #[serde(rename = "arbitrary")]
    Arbitrary,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Suv => "SUV",
            Unit::Hu => "HU",
            Unit::Arbitrary => "arbitrary",
        }
    }

    pub fn parse(s: &str) -> Option<Unit> {
        match s.trim() {
            "SUV" | "suv" => Some(Unit::Suv),
            "HU" | "hu" => Some(Unit::Hu),
            "arbitrary" => Some(Unit::Arbitrary),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Element type of an on-disk payload. All types are little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    U8,
    I8,
    U16,
    I16,
    I32,
    F32,
    F64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::U8 | DType::I8 => 1,
            DType::U16 | DType::I16 => 2,
            DType::I32 | DType::F32 => 4,
            DType::F64 => 8,
        }
    }

    fn nrrd_name(self) -> &'static str {
        match self {
            DType::U8 => "uchar",
            DType::I8 => "signed char",
            DType::U16 => "ushort",
            DType::I16 => "short",
            DType::I32 => "int",
            DType::F32 => "float",
            DType::F64 => "double",
        }
    }

    fn from_nrrd(name: &str) -> Option<DType> {
        let t = match name.trim() {
            "uchar" | "unsigned char" | "uint8" | "uint8_t" => DType::U8,
            "signed char" | "int8" | "int8_t" => DType::I8,
            "ushort" | "unsigned short" | "unsigned short int" | "uint16" | "uint16_t" => {
                DType::U16
            }
            "short" | "short int" | "signed short" | "signed short int" | "int16" | "int16_t" => {
                DType::I16
            }
            "int" | "signed int" | "int32" | "int32_t" => DType::I32,
            "float" => DType::F32,
            "double" => DType::F64,
            _ => return None,
        };
        Some(t)
    }

    fn decode(self, bytes: &[u8]) -> Vec<f64> {
        let n = self.size();
        bytes
            .chunks_exact(n)
            .map(|c| match self {
                DType::U8 => c[0] as f64,
                DType::I8 => c[0] as i8 as f64,
                DType::U16 => u16::from_le_bytes([c[0], c[1]]) as f64,
                DType::I16 => i16::from_le_bytes([c[0], c[1]]) as f64,
                DType::I32 => i32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
                DType::F32 => f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
                DType::F64 => f64::from_le_bytes(c.try_into().unwrap()),
            })
            .collect()
    }

    fn encode(self, values: &[f64], out: &mut Vec<u8>) {
        out.reserve(values.len() * self.size());
        for &v in values {
            match self {
                DType::U8 => out.push(v as u8),
                DType::I8 => out.push(v as i8 as u8),
                DType::U16 => out.extend_from_slice(&(v as u16).to_le_bytes()),
                DType::I16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
                DType::I32 => out.extend_from_slice(&(v as i32).to_le_bytes()),
                DType::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                DType::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Nrrd,
    RawJson,
}

impl Format {
    /// Guess the format from the file extension: `.nrrd`/`.nhdr` are NRRD,
    /// `.json`/`.raw` are the raw payload with JSON sidecar.
    pub fn detect(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "nrrd" | "nhdr" => Some(Format::Nrrd),
            "json" | "raw" => Some(Format::RawJson),
            _ => None,
        }
    }
}

fn linear_index(dims: [usize; 3], x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

fn grid_coords(dims: [usize; 3], index: usize) -> [usize; 3] {
    let x = index % dims[0];
    let y = (index / dims[0]) % dims[1];
    let z = index / (dims[0] * dims[1]);
    [x, y, z]
}

fn check_geometry(dims: [usize; 3], spacing: [f64; 3]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spacing must be finite and positive, got {spacing:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    voxels: Vec<f64>,
    unit: Unit,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], voxels: Vec<f64>, unit: Unit) -> Result<Self> {
        check_geometry(dims, spacing)?;
        let expected = dims.iter().product();
        if voxels.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: voxels.len(),
            });
        }
        if let Some(index) = voxels.iter().position(|v| !v.is_finite()) {
            let [x, y, z] = grid_coords(dims, index);
            return Err(Error::NonFinite { index, x, y, z });
        }
        Ok(Volume {
            dims,
            spacing,
            voxels,
            unit,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.voxels[linear_index(self.dims, x, y, z)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: [usize; 3],
    voxels: Vec<bool>,
    voxel_count: usize,
}

impl Mask {
    /// Builds a mask, rejecting the all-false case.
    pub fn new(dims: [usize; 3], voxels: Vec<bool>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "dimensions must be positive, got {dims:?}"
            )));
        }
        if voxels.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: voxels.len(),
            });
        }
        let voxel_count = voxels.iter().filter(|&&b| b).count();
        if voxel_count == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(Mask {
            dims,
            voxels,
            voxel_count,
        })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let mut voxels = Vec::with_capacity(dims.iter().product());
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    voxels.push(f(x, y, z));
                }
            }
        }
        Mask::new(dims, voxels)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_count(&self) -> usize {
        self.voxel_count
    }

    pub fn voxels(&self) -> &[bool] {
        &self.voxels
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.voxels[linear_index(self.dims, x, y, z)]
    }

    /// Grid coordinates of the set voxels in x-fastest scan order.
    pub fn coords(&self) -> Vec<[usize; 3]> {
        self.voxels
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| grid_coords(self.dims, i))
            .collect()
    }
}

/// The masked voxels of a volume, in x-fastest scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiSample {
    pub coords: Vec<[usize; 3]>,
    pub intensities: Vec<f64>,
    pub spacing: [f64; 3],
    pub unit: Unit,
}

impl RoiSample {
    /// Builds a sample directly from coordinates and intensities; used by
    /// tests and synthetic inputs that never touch a full volume.
    pub fn new(
        coords: Vec<[usize; 3]>,
        intensities: Vec<f64>,
        spacing: [f64; 3],
        unit: Unit,
    ) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyRoi);
        }
        if coords.len() != intensities.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates but {} intensities",
                coords.len(),
                intensities.len()
            )));
        }
        if let Some(index) = intensities.iter().position(|v| !v.is_finite()) {
            let [x, y, z] = coords[index];
            return Err(Error::NonFinite { index, x, y, z });
        }
        let mut seen = std::collections::HashSet::with_capacity(coords.len());
        if let Some(dup) = coords.iter().find(|c| !seen.insert(**c)) {
            return Err(Error::InvalidParameter(format!(
                "duplicate roi coordinate {dup:?}"
            )));
        }
        Ok(RoiSample {
            coords,
            intensities,
            spacing,
            unit,
        })
    }

    /// Convenience constructor for a row of voxels along x with unit spacing.
    pub fn from_line(intensities: &[f64]) -> Result<Self> {
        let coords = (0..intensities.len()).map(|x| [x, 0, 0]).collect();
        RoiSample::new(coords, intensities.to_vec(), [1.0; 3], Unit::Arbitrary)
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.intensities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.intensities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same voxels with every intensity replaced by `f(intensity)`.
    pub fn map_intensities(&self, f: impl Fn(f64) -> f64) -> RoiSample {
        RoiSample {
            coords: self.coords.clone(),
            intensities: self.intensities.iter().map(|&v| f(v)).collect(),
            spacing: self.spacing,
            unit: self.unit,
        }
    }
}

pub fn extract_roi(volume: &Volume, mask: &Mask) -> Result<RoiSample> {
    if volume.dims != mask.dims {
        return Err(Error::DimsMismatch {
            left: volume.dims,
            right: mask.dims,
        });
    }
    let mut coords = Vec::with_capacity(mask.voxel_count);
    let mut intensities = Vec::with_capacity(mask.voxel_count);
    for (i, (&inside, &value)) in mask.voxels.iter().zip(&volume.voxels).enumerate() {
        if inside {
            coords.push(grid_coords(volume.dims, i));
            intensities.push(value);
        }
    }
    Ok(RoiSample {
        coords,
        intensities,
        spacing: volume.spacing,
        unit: volume.unit,
    })
}

/// Decoded file contents before any volume/mask-specific validation.
struct RawImage {
    dims: [usize; 3],
    spacing: [f64; 3],
    unit: Unit,
    values: Vec<f64>,
}

pub fn load_volume(path: impl AsRef<Path>, format: Format) -> Result<Volume> {
    let raw = read_image(path.as_ref(), format)?;
    Volume::new(raw.dims, raw.spacing, raw.values, raw.unit)
}

/// Loads a mask, mapping every nonzero voxel to `true`. The format is taken
/// from the file extension.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let format = Format::detect(path)
        .ok_or_else(|| Error::header(path, "unrecognised extension (expected .nrrd, .nhdr, .json or .raw)"))?;
    let raw = read_image(path, format)?;
    if let Some(index) = raw.values.iter().position(|v| v.is_nan()) {
        let [x, y, z] = grid_coords(raw.dims, index);
        return Err(Error::NonFinite { index, x, y, z });
    }
    Mask::new(raw.dims, raw.values.iter().map(|&v| v != 0.0).collect())
}

pub fn save_volume(path: impl AsRef<Path>, volume: &Volume, format: Format, dtype: DType) -> Result<()> {
    let image = RawImage {
        dims: volume.dims,
        spacing: volume.spacing,
        unit: volume.unit,
        values: volume.voxels.clone(),
    };
    write_image(path.as_ref(), &image, format, dtype)
}

/// Writes a mask as 0/1 `u8` voxels.
pub fn save_mask(path: impl AsRef<Path>, mask: &Mask, spacing: [f64; 3], format: Format) -> Result<()> {
    let image = RawImage {
        dims: mask.dims,
        spacing,
        unit: Unit::Arbitrary,
        values: mask.voxels.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    };
    write_image(path.as_ref(), &image, format, DType::U8)
}

fn read_image(path: &Path, format: Format) -> Result<RawImage> {
    match format {
        Format::Nrrd => read_nrrd(path),
        Format::RawJson => read_raw_json(path),
    }
}

fn write_image(path: &Path, image: &RawImage, format: Format, dtype: DType) -> Result<()> {
    match format {
        Format::Nrrd => write_nrrd(path, image, dtype),
        Format::RawJson => write_raw_json(path, image, dtype),
    }
}

fn decode_payload(path: &Path, bytes: &[u8], dims: [usize; 3], dtype: DType) -> Result<Vec<f64>> {
    let expected: usize = dims.iter().product();
    if !bytes.len().is_multiple_of(dtype.size()) {
        return Err(Error::header(
            path,
            format!(
                "payload of {} bytes is not a whole number of {}-byte elements",
                bytes.len(),
                dtype.size()
            ),
        ));
    }
    let actual = bytes.len() / dtype.size();
    if actual != expected {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(dtype.decode(bytes))
}

// ---------------------------------------------------------------------------
// NRRD

const NRRD_UNIT_KEY: &str = "intensity_unit";

fn read_nrrd(path: &Path) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if !bytes.starts_with(b"NRRD000") {
        return Err(Error::header(path, "missing NRRD magic"));
    }

    // The header ends at the first empty line; anything after it is an
    // attached payload.
    let mut header_end = bytes.len();
    let mut data_start = bytes.len();
    let mut pos = 0;
    while pos < bytes.len() {
        let line_end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |o| pos + o);
        let line = &bytes[pos..line_end];
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.is_empty() {
            header_end = pos;
            data_start = (line_end + 1).min(bytes.len());
            break;
        }
        pos = line_end + 1;
    }
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::header(path, "header is not valid UTF-8"))?;

    let mut dimension = None;
    let mut sizes = None;
    let mut dtype = None;
    let mut encoding = None;
    let mut endian = None;
    let mut spacing = None;
    let mut data_file = None;
    let mut unit = Unit::Arbitrary;

    for line in header.lines().skip(1) {
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(":=") {
            if key.trim() == NRRD_UNIT_KEY {
                unit = Unit::parse(value)
                    .ok_or_else(|| Error::header(path, format!("unknown unit {value:?}")))?;
            }
            continue;
        }
        let Some((key, value)) = line.split_once(": ") else {
            return Err(Error::header(path, format!("unparseable line {line:?}")));
        };
        let value = value.trim();
        match key.trim() {
            "dimension" => dimension = Some(value.to_string()),
            "sizes" => sizes = Some(parse_triple::<usize>(path, "sizes", value)?),
            "type" => {
                dtype = Some(
                    DType::from_nrrd(value)
                        .ok_or_else(|| Error::header(path, format!("unsupported type {value:?}")))?,
                )
            }
            "encoding" => encoding = Some(value.to_string()),
            "endian" => endian = Some(value.to_string()),
            "spacings" => spacing = Some(parse_triple::<f64>(path, "spacings", value)?),
            "space directions" => spacing = Some(parse_space_directions(path, value)?),
            "data file" | "datafile" => data_file = Some(value.to_string()),
            _ => {}
        }
    }

    if dimension.as_deref() != Some("3") {
        return Err(Error::header(path, "only 3-dimensional NRRD is supported"));
    }
    let dims = sizes.ok_or_else(|| Error::header(path, "missing sizes"))?;
    let dtype = dtype.ok_or_else(|| Error::header(path, "missing type"))?;
    let spacing = spacing.ok_or_else(|| Error::header(path, "missing space directions or spacings"))?;
    match encoding.as_deref() {
        Some("raw") => {}
        Some(other) => return Err(Error::header(path, format!("unsupported encoding {other:?}"))),
        None => return Err(Error::header(path, "missing encoding")),
    }
    if dtype.size() > 1 && endian.as_deref() != Some("little") {
        return Err(Error::header(path, "multi-byte payloads must declare endian: little"));
    }
    check_geometry(dims, spacing).map_err(|e| Error::header(path, e.to_string()))?;

    let values = match data_file {
        Some(name) => {
            let data_path = path.parent().unwrap_or(Path::new(".")).join(name);
            let payload = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
            decode_payload(&data_path, &payload, dims, dtype)?
        }
        None => decode_payload(path, &bytes[data_start..], dims, dtype)?,
    };
    Ok(RawImage {
        dims,
        spacing,
        unit,
        values,
    })
}

fn parse_triple<T: std::str::FromStr>(path: &Path, field: &str, value: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = value
        .split_whitespace()
        .map(|s| s.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::header(path, format!("bad {field}: {value:?}")))?;
    <[T; 3]>::try_from(parts).map_err(|_| Error::header(path, format!("{field} needs 3 entries")))
}

fn parse_space_directions(path: &Path, value: &str) -> Result<[f64; 3]> {
    let vectors: Vec<&str> = value.split_whitespace().collect();
    if vectors.len() != 3 {
        return Err(Error::header(path, "space directions needs 3 vectors"));
    }
    let mut spacing = [0.0; 3];
    for (axis, v) in vectors.iter().enumerate() {
        let inner = v
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::header(path, format!("bad direction vector {v:?}")))?;
        let comps: Vec<f64> = inner
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::header(path, format!("bad direction vector {v:?}")))?;
        if comps.len() != 3 {
            return Err(Error::header(path, format!("bad direction vector {v:?}")));
        }
        for (k, c) in comps.iter().enumerate() {
            if k != axis && *c != 0.0 {
                return Err(Error::header(path, "only diagonal space directions are supported"));
            }
        }
        spacing[axis] = comps[axis].abs();
    }
    Ok(spacing)
}

fn write_nrrd(path: &Path, image: &RawImage, dtype: DType) -> Result<()> {
    let [nx, ny, nz] = image.dims;
    let [sx, sy, sz] = image.spacing;
    let mut out = format!(
        "NRRD0004\n\
         type: {}\n\
         dimension: 3\n\
         space dimension: 3\n\
         sizes: {nx} {ny} {nz}\n\
         space directions: ({sx},0,0) (0,{sy},0) (0,0,{sz})\n\
         endian: little\n\
         encoding: raw\n\
         {NRRD_UNIT_KEY}:={}\n\n",
        dtype.nrrd_name(),
        image.unit
    )
    .into_bytes();
    dtype.encode(&image.values, &mut out);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Raw payload + JSON sidecar

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    dtype: DType,
    #[serde(default)]
    unit: Unit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data_file: Option<String>,
}

/// Resolves `(sidecar, payload)` paths from either member of the pair.
fn raw_json_paths(path: &Path) -> (PathBuf, Option<PathBuf>) {
    match path.extension().and_then(|e| e.to_str()) {
        Some("raw") => (path.with_extension("json"), Some(path.to_path_buf())),
        _ => (path.to_path_buf(), None),
    }
}

fn read_raw_json(path: &Path) -> Result<RawImage> {
    let (sidecar_path, payload_path) = raw_json_paths(path);
    let text = fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: Sidecar =
        serde_json::from_str(&text).map_err(|e| Error::header(&sidecar_path, e.to_string()))?;
    check_geometry(sidecar.dims, sidecar.spacing_mm).map_err(|e| Error::header(&sidecar_path, e.to_string()))?;
    let payload_path = payload_path.unwrap_or_else(|| match &sidecar.data_file {
        Some(name) => sidecar_path.parent().unwrap_or(Path::new(".")).join(name),
        None => sidecar_path.with_extension("raw"),
    });
    let payload = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let values = decode_payload(&payload_path, &payload, sidecar.dims, sidecar.dtype)?;
    Ok(RawImage {
        dims: sidecar.dims,
        spacing: sidecar.spacing_mm,
        unit: sidecar.unit,
        values,
    })
}

fn write_raw_json(path: &Path, image: &RawImage, dtype: DType) -> Result<()> {
    let sidecar_path = path.with_extension("json");
    let payload_path = path.with_extension("raw");
    let sidecar = Sidecar {
        dims: image.dims,
        spacing_mm: image.spacing,
        dtype,
        unit: image.unit,
        data_file: None,
    };
    let mut payload = Vec::new();
    dtype.encode(&image.values, &mut payload);
    fs::write(&payload_path, payload).map_err(|e| Error::io(&payload_path, e))?;
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&sidecar_path, text + "\n").map_err(|e| Error::io(&sidecar_path, e))
}
