//! Test-retest repeatability statistics: Bland-Altman limits on percent
//! differences, reliability categories relative to the volume's own
//! repeatability, Spearman rank correlation and ICC(2,1).

mod correlation;
mod report;
mod shapiro;

pub use correlation::{icc, ranks, spearman, CorrelationResult};
pub use report::{
    bland_altman_with_fallback, repeatability_report, FeaturePoints, RepeatabilityReport, ReportRow,
};
pub use shapiro::{shapiro_wilk, ShapiroWilk};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier of the difference SD that gives the repeatability limits.
pub const LIMIT_Z: f64 = 1.96;
/// Significance level of the normality test deciding the log path.
pub const NORMALITY_ALPHA: f64 = 0.05;
/// Differences further than this many SDs from the mean are flagged.
pub const OUTLIER_SDS: f64 = 3.0;

/// Test and retest values of one feature, aligned by lesion.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    pub feature_id: String,
    pub test: Vec<f64>,
    pub retest: Vec<f64>,
}

impl PairedSeries {
    pub fn new(feature_id: impl Into<String>, test: Vec<f64>, retest: Vec<f64>) -> Result<Self> {
        if test.len() != retest.len() {
            return Err(Error::InvalidParameter(format!(
                "test has {} values, retest {}",
                test.len(),
                retest.len()
            )));
        }
        if test.len() < 3 {
            return Err(Error::InsufficientData {
                required: 3,
                actual: test.len(),
            });
        }
        if test.iter().chain(&retest).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("paired series contains non-finite values".into()));
        }
        Ok(PairedSeries {
            feature_id: feature_id.into(),
            test,
            retest,
        })
    }

    pub fn len(&self) -> usize {
        self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.test.is_empty()
    }

    /// Same series with test and retest exchanged.
    pub fn swapped(&self) -> PairedSeries {
        PairedSeries {
            feature_id: self.feature_id.clone(),
            test: self.retest.clone(),
            retest: self.test.clone(),
        }
    }

    /// Per-lesion mean of test and retest.
    pub fn pair_means(&self) -> Vec<f64> {
        self.test
            .iter()
            .zip(&self.retest)
            .map(|(t, r)| 0.5 * (t + r))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentDifferences {
    pub values: Vec<f64>,
    /// Lesion index of each entry in `values`.
    pub lesions: Vec<usize>,
    /// Lesions dropped because their pair mean was zero.
    pub excluded: usize,
}

/// `100 (retest - test) / mean(test, retest)` for every lesion with a
/// nonzero pair mean.
pub fn percent_differences(s: &PairedSeries) -> PercentDifferences {
    let mut values = Vec::with_capacity(s.len());
    let mut lesions = Vec::with_capacity(s.len());
    for (i, (&t, &r)) in s.test.iter().zip(&s.retest).enumerate() {
        let mean = 0.5 * (t + r);
        if mean != 0.0 {
            values.push(100.0 * (r - t) / mean);
            lesions.push(i);
        }
    }
    PercentDifferences {
        excluded: s.len() - values.len(),
        values,
        lesions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltmanResult {
    /// Mean difference. On the log path: `100 * mean(ln(retest / test))`.
    pub mean_pct: f64,
    /// SD of the differences. On the log path: `100 * sd(ln(retest / test))`.
    pub sd_pct: f64,
    pub lower_limit_pct: f64,
    pub upper_limit_pct: f64,
    pub n: usize,
    pub normal: bool,
    /// Shapiro-Wilk p-value of the percent differences (NaN when the test
    /// was not run because the differences have zero spread).
    pub normality_p: f64,
    pub log_transformed: bool,
    /// Lesions dropped for a zero pair mean.
    pub excluded: usize,
    /// Differences beyond three SDs of the mean. Flagged, never removed.
    pub outliers: usize,
}

impl BlandAltmanResult {
    /// Whether a pair falls inside the limits, measured on the same scale
    /// the limits were computed on.
    pub fn contains(&self, test: f64, retest: f64) -> bool {
        let d = if self.log_transformed {
            100.0 * (retest / test - 1.0)
        } else {
            100.0 * (retest - test) / (0.5 * (test + retest))
        };
        d >= self.lower_limit_pct && d <= self.upper_limit_pct
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn count_outliers(values: &[f64], mean: f64, sd: f64) -> usize {
    values
        .iter()
        .filter(|v| (*v - mean).abs() > OUTLIER_SDS * sd)
        .count()
}

/// Shapiro-Wilk p-value, evaluated on an evenly strided subsample when the
/// series exceeds the test's size limit.
fn normality_p(values: &[f64]) -> Result<f64> {
    if values.len() <= shapiro::MAX_N {
        return Ok(shapiro_wilk(values)?.p_value);
    }
    let stride = values.len().div_ceil(shapiro::MAX_N);
    let sub: Vec<f64> = values.iter().step_by(stride).copied().collect();
    Ok(shapiro_wilk(&sub)?.p_value)
}

/// Bland-Altman repeatability of a paired series.
///
/// Limits are `mean ± 1.96 SD` of the percent differences when these pass a
/// Shapiro-Wilk test at α = 0.05. Otherwise the analysis moves to log
/// ratios `ln(retest / test)` and the limits are back-transformed as
/// `100 (exp(m ± 1.96 s) - 1)`; this path requires every value to be
/// positive. Differences with zero spread are reported as normal without
/// running the test.
pub fn bland_altman(s: &PairedSeries) -> Result<BlandAltmanResult> {
    let pd = percent_differences(s);
    if pd.values.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: pd.values.len(),
        });
    }
    let (mean, sd) = mean_sd(&pd.values);
    let (normal, p) = if sd == 0.0 {
        (true, f64::NAN)
    } else {
        let p = normality_p(&pd.values)?;
        (p >= NORMALITY_ALPHA, p)
    };
    if normal {
        return Ok(BlandAltmanResult {
            mean_pct: mean,
            sd_pct: sd,
            lower_limit_pct: mean - LIMIT_Z * sd,
            upper_limit_pct: mean + LIMIT_Z * sd,
            n: pd.values.len(),
            normal,
            normality_p: p,
            log_transformed: false,
            excluded: pd.excluded,
            outliers: count_outliers(&pd.values, mean, sd),
        });
    }

    let mut ratios = Vec::with_capacity(s.len());
    for (i, (&t, &r)) in s.test.iter().zip(&s.retest).enumerate() {
        if t <= 0.0 {
            return Err(Error::NonPositive { index: i, value: t });
        }
        if r <= 0.0 {
            return Err(Error::NonPositive { index: i, value: r });
        }
        ratios.push((r / t).ln());
    }
    let (m, sigma) = mean_sd(&ratios);
    Ok(BlandAltmanResult {
        mean_pct: 100.0 * m,
        sd_pct: 100.0 * sigma,
        lower_limit_pct: 100.0 * ((m - LIMIT_Z * sigma).exp() - 1.0),
        upper_limit_pct: 100.0 * ((m + LIMIT_Z * sigma).exp() - 1.0),
        n: ratios.len(),
        normal: false,
        normality_p: p,
        log_transformed: true,
        excluded: 0,
        outliers: count_outliers(&ratios, m, sigma),
    })
}

/// Percent-difference limits without the normality check or log fallback.
/// Used for series that fail normality but contain non-positive values.
pub fn bland_altman_untransformed(s: &PairedSeries) -> Result<BlandAltmanResult> {
    let pd = percent_differences(s);
    if pd.values.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: pd.values.len(),
        });
    }
    let (mean, sd) = mean_sd(&pd.values);
    let p = if sd == 0.0 { f64::NAN } else { normality_p(&pd.values)? };
    Ok(BlandAltmanResult {
        mean_pct: mean,
        sd_pct: sd,
        lower_limit_pct: mean - LIMIT_Z * sd,
        upper_limit_pct: mean + LIMIT_Z * sd,
        n: pd.values.len(),
        normal: sd == 0.0 || p >= NORMALITY_ALPHA,
        normality_p: p,
        log_transformed: false,
        excluded: pd.excluded,
        outliers: count_outliers(&pd.values, mean, sd),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reliability {
    VeryReliable,
    Reliable,
    ModeratelyReliable,
    PoorlyReliable,
}

impl Reliability {
    pub fn as_str(self) -> &'static str {
        match self {
            Reliability::VeryReliable => "very_reliable",
            Reliability::Reliable => "reliable",
            Reliability::ModeratelyReliable => "moderately_reliable",
            Reliability::PoorlyReliable => "poorly_reliable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Reliability::VeryReliable,
            Reliability::Reliable,
            Reliability::ModeratelyReliable,
            Reliability::PoorlyReliable,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// Category cut-offs derived from the SD of the volume's percent
/// differences: 0.5x, 1.5x and 2x that SD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityThresholds {
    pub voi_rep_sd: f64,
    pub cut_very: f64,
    pub cut_reliable: f64,
    pub cut_moderate: f64,
}

impl ReliabilityThresholds {
    pub fn from_voi_sd(voi_rep_sd: f64) -> Result<Self> {
        if !(voi_rep_sd.is_finite() && voi_rep_sd >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "volume repeatability SD must be finite and non-negative, got {voi_rep_sd}"
            )));
        }
        Ok(ReliabilityThresholds {
            voi_rep_sd,
            cut_very: 0.5 * voi_rep_sd,
            cut_reliable: 1.5 * voi_rep_sd,
            cut_moderate: 2.0 * voi_rep_sd,
        })
    }
}

/// Places a feature SD in one of the four half-open intervals
/// `[0, 0.5v]`, `(0.5v, 1.5v]`, `(1.5v, 2v]`, `(2v, ∞)`.
pub fn reliability_category(feature_sd_pct: f64, t: &ReliabilityThresholds) -> Reliability {
    if feature_sd_pct <= t.cut_very {
        Reliability::VeryReliable
    } else if feature_sd_pct <= t.cut_reliable {
        Reliability::Reliable
    } else if feature_sd_pct <= t.cut_moderate {
        Reliability::ModeratelyReliable
    } else {
        Reliability::PoorlyReliable
    }
}
