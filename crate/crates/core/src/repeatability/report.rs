use serde::{Deserialize, Serialize};

use super::{
    bland_altman, bland_altman_untransformed, icc, percent_differences, reliability_category, spearman,
    BlandAltmanResult, PairedSeries, Reliability, ReliabilityThresholds,
};
use crate::error::{Error, Result};

/// One row of a repeatability report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub feature_id: String,
    pub n: usize,
    pub mean_pct: f64,
    pub sd_pct: f64,
    pub lower_pct: f64,
    pub upper_pct: f64,
    pub normal: bool,
    pub log_transformed: bool,
    pub category: Reliability,
    pub icc: f64,
    /// `None` when either series is constant.
    pub spearman_vs_volume: Option<f64>,
    pub spearman_vs_max_intensity: Option<f64>,
    pub outliers: usize,
    pub excluded: usize,
    /// Set when the log path was required but some value was not positive,
    /// so untransformed limits are reported instead.
    pub log_fallback: bool,
}

/// Bland-Altman scatter data of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePoints {
    pub feature_id: String,
    pub pair_mean: Vec<f64>,
    pub diff_pct: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatabilityReport {
    pub voi_feature: String,
    pub max_feature: String,
    pub thresholds: ReliabilityThresholds,
    pub rows: Vec<ReportRow>,
    pub points: Vec<FeaturePoints>,
}

impl RepeatabilityReport {
    pub fn row(&self, feature_id: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.feature_id == feature_id)
    }

    pub fn points(&self, feature_id: &str) -> Option<&FeaturePoints> {
        self.points.iter().find(|p| p.feature_id == feature_id)
    }
}

/// Bland-Altman analysis with the untransformed fallback for series that
/// fail normality but contain non-positive values.
pub fn bland_altman_with_fallback(s: &PairedSeries) -> Result<(BlandAltmanResult, bool)> {
    match bland_altman(s) {
        Ok(r) => Ok((r, false)),
        Err(Error::NonPositive { .. }) => Ok((bland_altman_untransformed(s)?, true)),
        Err(e) => Err(e),
    }
}

fn rank_correlation(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    match spearman(x, y) {
        Ok(r) => Ok(Some(r.rs)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Full report over a set of features sharing one lesion order.
///
/// Thresholds come from the SD of `voi_feature`; the two correlation
/// columns rank the per-lesion pair means of each feature against those of
/// `voi_feature` and `max_feature`.
pub fn repeatability_report(
    series: &[PairedSeries],
    voi_feature: &str,
    max_feature: &str,
) -> Result<RepeatabilityReport> {
    let find = |id: &str| {
        series
            .iter()
            .find(|s| s.feature_id == id)
            .ok_or_else(|| Error::InvalidParameter(format!("feature {id} not present")))
    };
    let voi = find(voi_feature)?;
    let max = find(max_feature)?;
    let n = voi.len();
    if let Some(s) = series.iter().find(|s| s.len() != n) {
        return Err(Error::InvalidParameter(format!(
            "feature {} has {} lesions, expected {n}",
            s.feature_id,
            s.len()
        )));
    }
    let (voi_ba, _) = bland_altman_with_fallback(voi)?;
    let thresholds = ReliabilityThresholds::from_voi_sd(voi_ba.sd_pct)?;
    let voi_means = voi.pair_means();
    let max_means = max.pair_means();

    let mut rows = Vec::with_capacity(series.len());
    let mut points = Vec::with_capacity(series.len());
    for s in series {
        let (ba, log_fallback) = bland_altman_with_fallback(s)?;
        let means = s.pair_means();
        let pd = percent_differences(s);
        rows.push(ReportRow {
            feature_id: s.feature_id.clone(),
            n: ba.n,
            mean_pct: ba.mean_pct,
            sd_pct: ba.sd_pct,
            lower_pct: ba.lower_limit_pct,
            upper_pct: ba.upper_limit_pct,
            normal: ba.normal,
            log_transformed: ba.log_transformed,
            category: reliability_category(ba.sd_pct, &thresholds),
            icc: icc(s)?,
            spearman_vs_volume: rank_correlation(&means, &voi_means)?,
            spearman_vs_max_intensity: rank_correlation(&means, &max_means)?,
            outliers: ba.outliers,
            excluded: ba.excluded,
            log_fallback,
        });
        points.push(FeaturePoints {
            feature_id: s.feature_id.clone(),
            pair_mean: pd.lesions.iter().map(|&i| means[i]).collect(),
            diff_pct: pd.values,
        });
    }
    Ok(RepeatabilityReport {
        voi_feature: voi_feature.to_string(),
        max_feature: max_feature.to_string(),
        thresholds,
        rows,
        points,
    })
}
