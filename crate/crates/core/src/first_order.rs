//! First-order statistics of the raw roi intensities. No quantization is
//! applied; the energy and entropy histogram is internal to this module.

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::volume_io::RoiSample;

pub const HISTOGRAM_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderResult {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub median: f64,
    /// Fisher g1 (moment ratio `m3 / m2^1.5`).
    pub skewness: f64,
    /// Pearson kurtosis `m4 / m2²`, 3 for a normal distribution.
    pub kurtosis: f64,
    pub energy: f64,
    /// Histogram entropy in bits.
    pub entropy_hist: f64,
    pub ch_auc: f64,
    /// Zero-variance roi: skewness and kurtosis are set to 0, `ch_auc` to 1.
    pub degenerate: bool,
}

impl FirstOrderResult {
    pub fn to_feature_set(&self) -> FeatureSet {
        let mut f = FeatureSet::new();
        f.push("min", self.min);
        f.push("max", self.max);
        f.push("mean", self.mean);
        f.push("sd", self.sd);
        f.push("median", self.median);
        f.push("skewness", self.skewness);
        f.push("kurtosis", self.kurtosis);
        f.push("energy", self.energy);
        f.push("entropy_hist", self.entropy_hist);
        f.push("ch_auc", self.ch_auc);
        if self.degenerate {
            f.flag("skewness");
            f.flag("kurtosis");
            f.flag("ch_auc");
        }
        f
    }
}

pub fn first_order_features(roi: &RoiSample) -> Result<FirstOrderResult> {
    first_order_with_bins(roi, HISTOGRAM_BINS)
}

/// First-order features with energy and entropy taken over an equal-width
/// `hist_bins`-bin histogram spanning `[min, max]`.
pub fn first_order_with_bins(roi: &RoiSample, hist_bins: usize) -> Result<FirstOrderResult> {
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    if hist_bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let values = &roi.intensities;
    let n = values.len() as f64;
    let (min, max) = (roi.min(), roi.max());
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let degenerate = !(max > min) || m2 <= 0.0;
    let (skewness, kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    };

    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };

    let mut hist = vec![0u64; hist_bins];
    let range = max - min;
    for &v in values {
        let bin = if range > 0.0 {
            ((hist_bins as f64 * (v - min) / range).floor() as usize).min(hist_bins - 1)
        } else {
            0
        };
        hist[bin] += 1;
    }
    let mut energy = 0.0;
    let mut entropy_hist = 0.0;
    for &c in hist.iter().filter(|&&c| c > 0) {
        let p = c as f64 / n;
        energy += p * p;
        entropy_hist -= p * p.log2();
    }

    Ok(FirstOrderResult {
        min,
        max,
        mean,
        sd: m2.sqrt(),
        median,
        skewness,
        kurtosis,
        energy,
        entropy_hist,
        ch_auc: ch_auc_sorted(&sorted),
        degenerate,
    })
}

/// Area under the cumulative-histogram curve `F(u)`, the fraction of voxels
/// whose normalised intensity is at least `u`, over `u` in `[0, 1]`.
/// Returns 1 for a constant roi.
pub fn cumulative_histogram_auc(roi: &RoiSample) -> Result<f64> {
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let mut sorted = roi.intensities.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(ch_auc_sorted(&sorted))
}

fn ch_auc_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let range = hi - lo;
    if !(range > 0.0) {
        return 1.0;
    }
    // F is constant between consecutive distinct normalised values: on
    // (u_k, u_{k+1}] it equals the fraction of voxels at or above u_{k+1}.
    let mut area = 0.0;
    let mut prev = 0.0;
    let mut i = 0;
    while i < n {
        let value = sorted[i];
        let u = (value - lo) / range;
        area += (u - prev) * (n - i) as f64 / n as f64;
        prev = u;
        while i < n && sorted[i] == value {
            i += 1;
        }
    }
    area
}
