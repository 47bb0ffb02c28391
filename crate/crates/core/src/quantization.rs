//! Grey-level quantization of raw roi intensities.
//!
//! Two schemes are supported: a fixed number of bins spanning the roi's own
//! intensity range, and fixed-width bins anchored to absolute intensity
//! values. Both map onto the integer levels `1..=G`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume_io::{RoiSample, Unit};

pub const DEFAULT_BINS: u32 = 64;
pub const DEFAULT_WIDTH_SUV: f64 = 0.5;
pub const DEFAULT_WIDTH_HU: f64 = 10.0;

/// Upper bound on the number of grey levels a quantized roi may carry.
/// Texture matrices are dense in the level count.
pub const MAX_LEVELS: u32 = 4096;

/// Relative distance to an integer below which `I / W` is treated as that
/// integer, so that floating-point noise cannot push a value across a bin
/// edge it lies on.
const EDGE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QuantizationSpec {
    FixedBins { bins: u32 },
    FixedWidth { width: f64 },
}

impl QuantizationSpec {
    pub fn fixed_bins(bins: u32) -> Result<Self> {
        let spec = QuantizationSpec::FixedBins { bins };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fixed_width(width: f64) -> Result<Self> {
        let spec = QuantizationSpec::FixedWidth { width };
        spec.validate()?;
        Ok(spec)
    }

    /// Fixed-width default for a modality: 0.5 SUV for PET, 10 HU for CT.
    pub fn default_width(unit: Unit) -> Self {
        let width = match unit {
            Unit::Hu => DEFAULT_WIDTH_HU,
            Unit::Suv | Unit::Arbitrary => DEFAULT_WIDTH_SUV,
        };
        QuantizationSpec::FixedWidth { width }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            QuantizationSpec::FixedBins { bins } if !(2..=MAX_LEVELS).contains(&bins) => Err(
                Error::InvalidParameter(format!("bin count must be in 2..={MAX_LEVELS}, got {bins}")),
            ),
            QuantizationSpec::FixedWidth { width } if !(width.is_finite() && width > 0.0) => Err(
                Error::InvalidParameter(format!("bin width must be positive, got {width}")),
            ),
            _ => Ok(()),
        }
    }

    /// Suffix used in feature identifiers, e.g. `bins64` or `w0.5`.
    pub fn tag(&self) -> String {
        match *self {
            QuantizationSpec::FixedBins { bins } => format!("bins{bins}"),
            QuantizationSpec::FixedWidth { width } => format!("w{width}"),
        }
    }
}

impl Default for QuantizationSpec {
    fn default() -> Self {
        QuantizationSpec::FixedBins { bins: DEFAULT_BINS }
    }
}

impl fmt::Display for QuantizationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            QuantizationSpec::FixedBins { bins } => write!(f, "bins:{bins}"),
            QuantizationSpec::FixedWidth { width } => write!(f, "width:{width}"),
        }
    }
}

/// Parses the command-line form `bins:<B>` or `width:<W>`.
impl FromStr for QuantizationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected bins:<B> or width:<W>, got {s:?}"));
        let (mode, value) = s.split_once(':').ok_or_else(bad)?;
        match mode.trim() {
            "bins" => QuantizationSpec::fixed_bins(value.trim().parse().map_err(|_| bad())?),
            "width" | "w" => QuantizationSpec::fixed_width(value.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedRoi {
    pub coords: Vec<[usize; 3]>,
    pub spacing: [f64; 3],
    /// One level per voxel, each in `1..=n_levels`.
    pub levels: Vec<u32>,
    pub n_levels: u32,
    pub spec: QuantizationSpec,
}

impl QuantizedRoi {
    /// Builds a quantized roi from explicit levels, with `n_levels` set to
    /// the largest level present.
    pub fn from_levels(coords: Vec<[usize; 3]>, levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyRoi);
        }
        if coords.len() != levels.len() {
            return Err(Error::InvalidParameter("coords and levels differ in length".into()));
        }
        if levels.contains(&0) {
            return Err(Error::InvalidParameter("grey levels start at 1".into()));
        }
        let n_levels = *levels.iter().max().unwrap();
        Ok(QuantizedRoi {
            coords,
            spacing: [1.0; 3],
            levels,
            n_levels,
            spec: QuantizationSpec::FixedWidth { width: 1.0 },
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

pub fn quantize(roi: &RoiSample, spec: QuantizationSpec) -> Result<QuantizedRoi> {
    match spec {
        QuantizationSpec::FixedBins { bins } => quantize_fixed_bins(roi, bins),
        QuantizationSpec::FixedWidth { width } => quantize_fixed_width(roi, width),
    }
}

/// `level = min(B, floor(B (I - I_min) / (I_max - I_min)) + 1)`; a constant
/// roi maps entirely to level 1.
pub fn quantize_fixed_bins(roi: &RoiSample, bins: u32) -> Result<QuantizedRoi> {
    let spec = QuantizationSpec::fixed_bins(bins)?;
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let (lo, hi) = (roi.min(), roi.max());
    let range = hi - lo;
    let b = bins as f64;
    let levels = roi
        .intensities
        .iter()
        .map(|&v| {
            if range > 0.0 {
                let t = (b * (v - lo) / range).floor();
                (t as u32 + 1).min(bins)
            } else {
                1
            }
        })
        .collect();
    Ok(QuantizedRoi {
        coords: roi.coords.clone(),
        spacing: roi.spacing,
        levels,
        n_levels: bins,
        spec,
    })
}

fn width_index(v: f64, width: f64) -> i64 {
    let r = v / width;
    let nearest = r.round();
    if (r - nearest).abs() <= EDGE_SNAP * nearest.abs().max(1.0) {
        nearest as i64
    } else {
        r.ceil() as i64
    }
}

/// `level = ceil(I / W) - min(ceil(I / W)) + 1`. Negative intensities need no
/// special handling since only index differences matter.
pub fn quantize_fixed_width(roi: &RoiSample, width: f64) -> Result<QuantizedRoi> {
    let spec = QuantizationSpec::fixed_width(width)?;
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let idx: Vec<i64> = roi.intensities.iter().map(|&v| width_index(v, width)).collect();
    let lowest = *idx.iter().min().unwrap();
    let highest = *idx.iter().max().unwrap();
    let span = highest - lowest + 1;
    if span > MAX_LEVELS as i64 {
        return Err(Error::InvalidParameter(format!(
            "bin width {width} yields {span} grey levels (limit {MAX_LEVELS})"
        )));
    }
    let levels = idx.iter().map(|&i| (i - lowest + 1) as u32).collect();
    Ok(QuantizedRoi {
        coords: roi.coords.clone(),
        spacing: roi.spacing,
        levels,
        n_levels: span as u32,
        spec,
    })
}
